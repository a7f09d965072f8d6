#pragma once
#include <span>
#include <vector>

#include "hbt/rng.hpp"
#include "hbt/types.hpp"

namespace hbt {

/// Microchannel-plate model: circular aperture, flat detection efficiency,
/// box quantization of positions and arrival times (delay-line anodes
/// report discrete bins, not Gaussian blur).
struct DetectorModel {
  double diameter = 0.085;           // m
  double spatial_resolution = 5e-4;  // m
  double time_resolution = 1e-9;     // s
  double efficiency = 1.0;

  void validate() const {
    if (!(diameter > 0.0) || !(spatial_resolution > 0.0) || !(time_resolution > 0.0))
      throw DomainError("detector: diameter and resolutions must be > 0");
    if (!(efficiency >= 0.0) || !(efficiency <= 1.0))
      throw DomainError("detector: efficiency must lie in [0, 1]");
  }
};

/// Quantize a coordinate to its bin center: (floor(c/pitch) + 0.5) * pitch.
inline double quantize(double coordinate, double pitch) {
  return (std::floor(coordinate / pitch) + 0.5) * pitch;
}

/// Apply the detector: drop events with transverse radius > diameter/2,
/// keep survivors with probability `efficiency`, then quantize x and y to
/// the spatial pitch and t to the time pitch. Idempotent on already
/// quantized events. One uniform is consumed per in-aperture event.
std::vector<EventRecord> detect(std::span<const EventRecord> events,
                                const DetectorModel& model, rng::Stream& stream);

/// Factor by which finite resolution reduces the zero-separation contrast:
/// a unit-contrast Gaussian correlation exp(-d^2/l^2) is numerically
/// convolved per axis with the two box kernels of the given widths and the
/// peak value is read off; the factor is the inverse of the product of
/// peaks (>= 1). Axes with zero width contribute nothing.
double effective_contrast(std::span<const double> correlation_lengths,
                          std::span<const double> resolution_widths);

/// Convenience overload mapping geometry axes onto detector pitches: X/Y
/// use the spatial pitch, Z uses the time pitch converted to a length via
/// the mean arrival speed v.
double effective_contrast(std::span<const double> correlation_lengths,
                          const DetectorModel& model, double mean_speed,
                          std::span<const AxisRole> roles);

} // namespace hbt
