#pragma once
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hbt/detector.hpp"
#include "hbt/estimators.hpp"
#include "hbt/types.hpp"

namespace hbt {

/// Full run description parsed from the flat "section.key = value" config
/// format. Unknown keys are rejected; '#' starts a comment.
struct RunConfig {
  PhysicalConstants constants;
  SourceModel source;
  Geometry geometry;
  DetectorModel detector;
  bool detector_enabled = false;

  // estimator section; zeros mean "derive from the predicted correlation
  // length" (bin_width = l/5, max_sep = 20 l, radius_cap = one bin).
  double bin_width = 0.0;
  double max_sep = 0.0;
  double norm_pairs_factor = 10.0;
  double radius_cap = 0.0;
  std::optional<std::vector<std::pair<double, double>>> subvolume; // per grid axis

  // run section
  std::uint64_t seed = 1;
  long long shots = 0;
  int emitters = 4096;
  int threads = 0; // 0 = library default; never affects results
  std::string out_dir = ".";

  std::optional<double> fermion_mass; // figure2 fermion-trace override

  static RunConfig parse_string(const std::string& text);
  static RunConfig parse_file(const std::string& path);

  void validate() const;

  /// Estimator bin width / range with defaults resolved.
  double resolved_bin_width() const;
  double resolved_max_sep() const;
  double resolved_radius_cap() const;

  /// Counting window with defaults resolved (full grid extent).
  Subvolume resolved_subvolume() const;

  /// Canonical "key = value" lines describing the physics content
  /// (constants, source, geometry, detector). Written into output headers
  /// and compared back for provenance validation.
  std::vector<std::string> physics_signature() const;

  /// All sections, canonical form (physics + estimator + seed/shots/emitters).
  std::vector<std::string> echo() const;
};

} // namespace hbt
