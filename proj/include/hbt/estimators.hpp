#pragma once
#include <cstdint>
#include <span>
#include <vector>

#include "hbt/rng.hpp"
#include "hbt/types.hpp"

namespace hbt {

/// Separation bins centered at k * width, k = 0 .. bins-1 (bin index =
/// round(|sep| / width)), so quantized separations land on bin centers.
struct HistogramSpec {
  std::vector<AxisRole> axes; // 1 axis (Axis1D) or 3 (Full3D)
  std::vector<double> width;
  std::vector<int> bins;

  void validate() const;
  bool operator==(const HistogramSpec&) const = default;
};

/// Histogram of per-axis absolute pair separations. `total_pairs` counts
/// every pair offered, in range or not, which is the normalization measure
/// shared by numerator and denominator.
struct PairHistogram {
  enum class Kind { SameShot, Mixed };

  HistogramSpec spec;
  Kind kind = Kind::SameShot;
  std::vector<long long> counts; // flattened row-major over spec.bins
  long long total_pairs = 0;
  long long shot_count = 0;

  bool full3d() const { return spec.axes.size() == 3; }
  /// Integer merge of partial histograms; order-independent.
  void merge(const PairHistogram& other);
};

/// Same-shot unordered pairs, each counted once. Events may arrive in any
/// order; grouping is by shot_id.
PairHistogram pair_histogram(std::span<const EventRecord> events, const HistogramSpec& spec);

/// OpenMP variant: per-shot partial histograms merged by integer addition,
/// so the counts match the serial reference exactly at any thread count.
PairHistogram pair_histogram_parallel(std::span<const EventRecord> events,
                                      const HistogramSpec& spec);

/// Cross-shot pairs (one event from shot i, one from shot j != i), drawn at
/// random down to `target_pairs`: the uncorrelated-pair reference with the
/// same geometry and resolution footprint as the numerator.
PairHistogram normalization_histogram(std::span<const EventRecord> events,
                                      const HistogramSpec& spec, long long target_pairs,
                                      rng::Stream& stream);

/// Collapse a Full3D histogram onto the vertical axis, keeping pairs whose
/// horizontal separation (from bin centers) is within radius_cap.
PairHistogram average_horizontal(const PairHistogram& h, double radius_cap);

struct G2Curve {
  std::vector<double> center;
  std::vector<double> g2;
  std::vector<double> sigma;
  std::vector<std::uint8_t> valid;
  long long num_pairs = 0;
  long long den_pairs = 0;
};

/// g2[b] = (num[b]/N_num) / (den[b]/N_den) with Poisson error propagation;
/// bins with an empty denominator are marked invalid rather than infinite.
G2Curve normalize_g2(const PairHistogram& num, const PairHistogram& den);

/// Weighted least-squares fit of g2(d) = 1 + c exp(-d^2/l^2). The length is
/// profiled (closed-form c at fixed l, golden-section refinement), which
/// cannot diverge; a FitError signals unusable input, not a bad fit.
struct CorrelationFit {
  double contrast = 0.0; // c, signed
  double length = 0.0;   // l
  double sigma_contrast = 0.0;
  double sigma_length = 0.0;
  double chi2_per_dof = 0.0;
  int bins_used = 0;
};

CorrelationFit fit_correlation(const G2Curve& curve);

struct CorrelationResult {
  G2Curve curve;
  bool has_fit = false;
  CorrelationFit fit;
};

/// Axis-aligned counting window; roles select the event coordinate.
struct Subvolume {
  std::vector<AxisRole> roles;
  std::vector<std::pair<double, double>> range; // [lo, hi) per axis

  bool contains(const EventRecord& ev) const;
};

struct CountingStats {
  enum class Flag { BosonLike, FermionLike, Undefined };

  Subvolume subvolume;
  std::vector<long long> per_shot;
  double mean = 0.0;
  double variance = 0.0; // unbiased
  double g_inferred = 0.0;
  double diff_standard_error = 0.0; // of (variance - mean)
  Flag flag = Flag::Undefined;
};

/// Per-shot counts in the subvolume over shots 0 .. n_shots-1, with the
/// phase-space cell count inferred by inverting the number-fluctuation
/// formula; the inversion is flagged undefined when variance - mean is
/// inside its own standard error.
CountingStats counting_statistics(std::span<const EventRecord> events, long long n_shots,
                                  const Subvolume& subvolume);

const char* to_string(CountingStats::Flag flag);

} // namespace hbt
