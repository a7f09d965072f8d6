#pragma once
#include <span>

#include "hbt/errors.hpp"

namespace hbt {

struct PhysicalConstants {
  double h = 6.62607e-34;  // Planck constant, J s (set to 1 for reduced units)
  double g_grav = 9.81;    // gravitational acceleration, m/s^2

  void validate() const {
    if (!(h > 0.0)) throw DomainError("constants: h must be > 0");
    if (!(g_grav > 0.0)) throw DomainError("constants: g_grav must be > 0");
  }
};

enum class Statistics { ChaoticBoson, Coherent, Fermion };

const char* to_string(Statistics s);

/// Occupied phase-space cell count. Values below one are physically
/// degenerate (sub-cell volume); they are flagged, not rejected.
struct PhaseSpaceCellCount {
  double g_cells = 1.0;
  bool subunity = false;
};

/// Number-fluctuation variance of N particles spread over g phase-space
/// cells: mean + mean^2/g for chaotic bosons, mean for a coherent source,
/// mean - mean^2/g for fermions. The fermionic branch requires
/// mean_n <= g_cells (one particle per cell at most); violations throw
/// rather than clamp so configuration mistakes stay visible.
double einstein_variance(double mean_n, double g_cells, Statistics statistics);

/// Product over axes of dx*dp/h. Defined for any dimensionality; the
/// 3-axis overload below matches the usual cubed form.
PhaseSpaceCellCount phase_space_cells(std::span<const double> dx,
                                      std::span<const double> dp, double h);

/// Isotropic convenience: the same dx and dp on each of `dims` axes.
PhaseSpaceCellCount phase_space_cells(double dx, double dp, double h, int dims = 3);

/// Speckle grain size at distance L from a source of rms size s:
/// lambda L / (2 pi s).
double correlation_length_optical(double wavelength, double distance, double source_rms);

/// Matter-wave analogue after a time of flight t for particles of mass m:
/// h t / (2 pi m s). Equals the optical form with lambda = h/(m v), L = v t.
double correlation_length_matter(double fall_time, double mass, double source_rms,
                                 double h);

/// h / (m v).
double de_broglie_wavelength(double mass, double speed, double h);

} // namespace hbt
