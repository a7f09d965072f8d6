#include "hbt/formulas.hpp"

#include <cmath>
#include <vector>

namespace hbt {

const char* to_string(Statistics s) {
  switch (s) {
    case Statistics::ChaoticBoson: return "chaotic_boson";
    case Statistics::Coherent: return "coherent";
    case Statistics::Fermion: return "fermion";
  }
  return "?";
}

double einstein_variance(double mean_n, double g_cells, Statistics statistics) {
  if (!(mean_n >= 0.0)) throw DomainError("einstein_variance: mean_n must be >= 0");
  if (!(g_cells > 0.0)) throw DomainError("einstein_variance: g_cells must be > 0");
  if (mean_n == 0.0) return 0.0;
  const double interference = mean_n * mean_n / g_cells; // 0 when g_cells = inf
  switch (statistics) {
    case Statistics::ChaoticBoson:
      return mean_n + interference;
    case Statistics::Coherent:
      return mean_n;
    case Statistics::Fermion:
      if (mean_n > g_cells)
        throw DomainError("einstein_variance: fermion occupancy exceeds available cells (mean_n > g_cells)");
      return mean_n - interference;
  }
  throw DomainError("einstein_variance: unknown statistics");
}

PhaseSpaceCellCount phase_space_cells(std::span<const double> dx,
                                      std::span<const double> dp, double h) {
  if (dx.size() != dp.size() || dx.empty())
    throw DomainError("phase_space_cells: dx and dp must be non-empty and equal length");
  if (!(h > 0.0)) throw DomainError("phase_space_cells: h must be > 0");
  double g = 1.0;
  for (std::size_t a = 0; a < dx.size(); ++a) {
    if (!(dx[a] > 0.0) || !(dp[a] > 0.0))
      throw DomainError("phase_space_cells: per-axis extents must be > 0");
    g *= dx[a] * dp[a] / h;
  }
  return {g, g < 1.0};
}

PhaseSpaceCellCount phase_space_cells(double dx, double dp, double h, int dims) {
  if (dims < 1) throw DomainError("phase_space_cells: dims must be >= 1");
  std::vector<double> xs(static_cast<std::size_t>(dims), dx);
  std::vector<double> ps(static_cast<std::size_t>(dims), dp);
  return phase_space_cells(std::span<const double>(xs), std::span<const double>(ps), h);
}

double correlation_length_optical(double wavelength, double distance, double source_rms) {
  if (!(wavelength > 0.0) || !(distance > 0.0) || !(source_rms > 0.0))
    throw DomainError("correlation_length_optical: all inputs must be > 0");
  return wavelength * distance / (2.0 * M_PI * source_rms);
}

double correlation_length_matter(double fall_time, double mass, double source_rms,
                                 double h) {
  if (fall_time == 0.0) return 0.0; // degenerate no-flight limit
  if (!(fall_time > 0.0) || !(mass > 0.0) || !(source_rms > 0.0) || !(h > 0.0))
    throw DomainError("correlation_length_matter: all inputs must be > 0");
  return h * fall_time / (2.0 * M_PI * mass * source_rms);
}

double de_broglie_wavelength(double mass, double speed, double h) {
  if (!(mass > 0.0) || !(speed > 0.0) || !(h > 0.0))
    throw DomainError("de_broglie_wavelength: mass and speed must be > 0");
  return h / (mass * speed);
}

} // namespace hbt
