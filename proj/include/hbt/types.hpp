#pragma once
#include <optional>
#include <vector>

#include "hbt/errors.hpp"
#include "hbt/formulas.hpp"

namespace hbt {

struct GridAxis {
  double extent = 0.0; // full width, centered on zero (m)
  int cells = 0;
};

/// Regular detector-plane grid; field values and sampling cells live on
/// cell centers.
struct GridSpec {
  std::vector<GridAxis> axes;

  int dims() const { return static_cast<int>(axes.size()); }
  double cell_width(int a) const { return axes[a].extent / axes[a].cells; }
  double center(int a, int i) const {
    return -0.5 * axes[a].extent + (i + 0.5) * cell_width(a);
  }
  long long cell_count() const {
    long long n = 1;
    for (const auto& ax : axes) n *= ax.cells;
    return n;
  }
  /// Cell measure (product of cell widths).
  double cell_measure() const {
    double w = 1.0;
    for (int a = 0; a < dims(); ++a) w *= cell_width(a);
    return w;
  }
  void validate() const {
    if (axes.empty() || axes.size() > 3)
      throw DomainError("grid: dims must be 1, 2 or 3");
    for (const auto& ax : axes)
      if (!(ax.extent > 0.0) || ax.cells < 1)
        throw DomainError("grid: extents and cell counts must be positive");
  }
};

struct SourceModel {
  Statistics statistics = Statistics::ChaoticBoson;
  double source_rms = 0.0;            // s (m)
  std::optional<double> mass;         // kg, matter mode
  std::optional<double> wavelength;   // m, optical mode
  double mean_count = 0.0;            // expected detections per shot
  std::optional<double> temperature_scale; // dimensionless thermal-kernel width knob

  void validate() const {
    if (!(source_rms > 0.0)) throw DomainError("source: size must be > 0");
    if (mass.has_value() == wavelength.has_value())
      throw DomainError("source: exactly one of mass / wavelength must be set");
    if (mass && !(*mass > 0.0)) throw DomainError("source: mass must be > 0");
    if (wavelength && !(*wavelength > 0.0))
      throw DomainError("source: wavelength must be > 0");
    if (!(mean_count >= 0.0)) throw DomainError("source: mean_count must be >= 0");
  }
};

/// Which physical coordinate a grid axis maps to. Z is the vertical axis,
/// reconstructed from arrival times in time-of-flight mode.
enum class AxisRole { X, Y, Z };

struct Geometry {
  enum class Mode { Optical, TimeOfFlight };

  Mode mode = Mode::Optical;
  double distance = 0.0;    // L (m), optical mode
  double fall_time = 0.0;   // t (s), time-of-flight mode
  double fall_height = 0.0; // H (m), metadata
  GridSpec grid;

  int dims() const { return grid.dims(); }

  /// Mean arrival speed; defined only for time-of-flight (v = g_grav * t).
  double mean_speed(const PhysicalConstants& pc) const {
    if (mode != Mode::TimeOfFlight)
      throw DomainError("geometry: mean speed is defined for time-of-flight mode only");
    return pc.g_grav * fall_time;
  }

  /// Propagation distance entering the speckle formulas: L, or v*t.
  double effective_distance(const PhysicalConstants& pc) const {
    return mode == Mode::Optical ? distance : mean_speed(pc) * fall_time;
  }

  /// Wavelength entering the speckle formulas: the optical wavelength, or
  /// the de Broglie wavelength h/(m v) at the mean arrival speed.
  double effective_wavelength(const SourceModel& src, const PhysicalConstants& pc) const {
    if (mode == Mode::Optical) {
      if (!src.wavelength) throw DomainError("geometry: optical mode needs source.wavelength");
      return *src.wavelength;
    }
    if (!src.mass) throw DomainError("geometry: time-of-flight mode needs source.mass");
    return de_broglie_wavelength(*src.mass, mean_speed(pc), pc.h);
  }

  /// Predicted correlation length (same for every axis; the source is
  /// isotropic with rms s).
  double predicted_correlation_length(const SourceModel& src, const PhysicalConstants& pc) const {
    return correlation_length_optical(effective_wavelength(src, pc),
                                      effective_distance(pc), src.source_rms);
  }

  /// Axis roles by mode and dimensionality. The detector records (x, y, t),
  /// so every simulated axis must map onto one of those: optical mode is
  /// transverse-only (dims <= 2), time-of-flight uses the last axis as the
  /// vertical/time axis.
  std::vector<AxisRole> axis_roles() const {
    switch (dims()) {
      case 1:
        return mode == Mode::Optical ? std::vector<AxisRole>{AxisRole::X}
                                     : std::vector<AxisRole>{AxisRole::Z};
      case 2:
        return mode == Mode::Optical ? std::vector<AxisRole>{AxisRole::X, AxisRole::Y}
                                     : std::vector<AxisRole>{AxisRole::X, AxisRole::Z};
      case 3:
        return {AxisRole::X, AxisRole::Y, AxisRole::Z};
      default:
        throw DomainError("geometry: dims must be 1, 2 or 3");
    }
  }

  void validate() const {
    grid.validate();
    if (mode == Mode::Optical) {
      if (!(distance > 0.0)) throw DomainError("geometry: distance must be > 0");
      if (dims() > 2)
        throw DomainError("geometry: optical mode supports dims <= 2 (the third detector axis is temporal)");
    } else {
      if (!(fall_time > 0.0)) throw DomainError("geometry: fall_time must be > 0");
      if (fall_height < 0.0) throw DomainError("geometry: fall_height must be >= 0");
    }
  }
};

/// One detected particle. Continuous coordinates until the detector stage
/// quantizes them; z is derived from the arrival time in time-of-flight
/// mode.
struct EventRecord {
  long long shot_id = 0;
  double t = 0.0;
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  bool has_z = false;
};

} // namespace hbt
