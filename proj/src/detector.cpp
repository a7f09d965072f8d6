#include "hbt/detector.hpp"

#include <cmath>

namespace hbt {

std::vector<EventRecord> detect(std::span<const EventRecord> events,
                                const DetectorModel& model, rng::Stream& stream) {
  model.validate();
  std::vector<EventRecord> out;
  out.reserve(events.size());
  const double r_max = 0.5 * model.diameter;
  for (const EventRecord& ev : events) {
    if (std::hypot(ev.x, ev.y) > r_max) continue;
    if (stream.uniform() >= model.efficiency) continue;
    EventRecord q = ev;
    q.x = quantize(ev.x, model.spatial_resolution);
    q.y = quantize(ev.y, model.spatial_resolution);
    q.t = quantize(ev.t, model.time_resolution);
    q.z = 0.0;
    q.has_z = false; // vertical positions are rebuilt from the quantized times
    out.push_back(q);
  }
  return out;
}

namespace {

// Peak of box(d) * box(d) * exp(-t^2/l^2) with unit-area boxes:
// (1/d^2) integral over [-d/2, d/2]^2 of exp(-(u-v)^2/l^2). Midpoint samples
// inside the box; the double sum collapses onto the diagonal offsets, which
// is the discrete box-box convolution weight at each lag.
double convolved_peak(double l, double d) {
  const double target_step = std::min(l, d) / 400.0;
  const long long m = std::max<long long>(64, static_cast<long long>(std::ceil(d / target_step)));
  const double h = d / static_cast<double>(m);
  double peak = 0.0;
  for (long long k = 0; k < m; ++k) {
    const double t = static_cast<double>(k) * h;
    const double weight = static_cast<double>(m - k) * (k == 0 ? 1.0 : 2.0);
    peak += weight * std::exp(-t * t / (l * l));
  }
  return peak / (static_cast<double>(m) * static_cast<double>(m));
}

} // namespace

double effective_contrast(std::span<const double> correlation_lengths,
                          std::span<const double> resolution_widths) {
  if (correlation_lengths.size() != resolution_widths.size() || correlation_lengths.empty())
    throw DomainError("effective_contrast: need one resolution width per correlation length");
  double factor = 1.0;
  for (std::size_t a = 0; a < correlation_lengths.size(); ++a) {
    const double l = correlation_lengths[a];
    const double d = resolution_widths[a];
    if (!(l > 0.0)) throw DomainError("effective_contrast: correlation lengths must be > 0");
    if (d < 0.0) throw DomainError("effective_contrast: resolution widths must be >= 0");
    if (d == 0.0 || d < 1e-6 * l) continue; // ideal axis
    factor /= convolved_peak(l, d);
  }
  return factor;
}

double effective_contrast(std::span<const double> correlation_lengths,
                          const DetectorModel& model, double mean_speed,
                          std::span<const AxisRole> roles) {
  model.validate();
  if (correlation_lengths.size() != roles.size())
    throw DomainError("effective_contrast: one correlation length per axis required");
  std::vector<double> widths(roles.size());
  for (std::size_t a = 0; a < roles.size(); ++a) {
    if (roles[a] == AxisRole::Z) {
      if (!(mean_speed > 0.0))
        throw DomainError("effective_contrast: mean speed must be > 0 for the time axis");
      widths[a] = model.time_resolution * mean_speed;
    } else {
      widths[a] = model.spatial_resolution;
    }
  }
  return effective_contrast(correlation_lengths, widths);
}

} // namespace hbt
