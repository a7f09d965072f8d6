#include "hbt/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "hbt/errors.hpp"

namespace hbt {

void HistogramSpec::validate() const {
  if (axes.size() != 1 && axes.size() != 3)
    throw DomainError("histogram: 1 or 3 separation axes supported");
  if (width.size() != axes.size() || bins.size() != axes.size())
    throw DomainError("histogram: one width and bin count per axis required");
  for (std::size_t a = 0; a < axes.size(); ++a)
    if (!(width[a] > 0.0) || bins[a] < 1)
      throw DomainError("histogram: widths and bin counts must be positive");
}

namespace {

double coordinate(const EventRecord& ev, AxisRole role) {
  switch (role) {
    case AxisRole::X: return ev.x;
    case AxisRole::Y: return ev.y;
    case AxisRole::Z:
      if (!ev.has_z)
        throw DomainError("histogram: events lack a vertical coordinate; "
                          "apply time_of_flight_positions first");
      return ev.z;
  }
  throw DomainError("histogram: unknown axis role");
}

// Flat bin index of a pair separation, or -1 if any axis overflows.
long long bin_of(const EventRecord& a, const EventRecord& b, const HistogramSpec& spec) {
  long long flat = 0;
  for (std::size_t ax = 0; ax < spec.axes.size(); ++ax) {
    const double sep = std::abs(coordinate(a, spec.axes[ax]) - coordinate(b, spec.axes[ax]));
    const long long idx = static_cast<long long>(std::floor(sep / spec.width[ax] + 0.5));
    if (idx >= spec.bins[ax]) return -1;
    flat = flat * spec.bins[ax] + idx;
  }
  return flat;
}

long long flat_bins(const HistogramSpec& spec) {
  long long n = 1;
  for (int b : spec.bins) n *= b;
  return n;
}

// Event indices grouped by shot id (insertion order preserved within a shot).
std::map<long long, std::vector<std::size_t>> group_by_shot(std::span<const EventRecord> events) {
  std::map<long long, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < events.size(); ++i) groups[events[i].shot_id].push_back(i);
  return groups;
}

} // namespace

void PairHistogram::merge(const PairHistogram& other) {
  if (!(spec == other.spec) || kind != other.kind)
    throw DomainError("histogram merge: incompatible histograms");
  for (std::size_t b = 0; b < counts.size(); ++b) counts[b] += other.counts[b];
  total_pairs += other.total_pairs;
  shot_count += other.shot_count;
}

PairHistogram pair_histogram(std::span<const EventRecord> events, const HistogramSpec& spec) {
  spec.validate();
  PairHistogram h;
  h.spec = spec;
  h.kind = PairHistogram::Kind::SameShot;
  h.counts.assign(static_cast<std::size_t>(flat_bins(spec)), 0);
  const auto groups = group_by_shot(events);
  h.shot_count = static_cast<long long>(groups.size());
  for (const auto& [shot, idx] : groups) {
    for (std::size_t i = 0; i < idx.size(); ++i) {
      for (std::size_t j = i + 1; j < idx.size(); ++j) {
        ++h.total_pairs;
        const long long b = bin_of(events[idx[i]], events[idx[j]], spec);
        if (b >= 0) ++h.counts[static_cast<std::size_t>(b)];
      }
    }
  }
  return h;
}

PairHistogram pair_histogram_parallel(std::span<const EventRecord> events,
                                      const HistogramSpec& spec) {
  spec.validate();
  const auto groups = group_by_shot(events);
  std::vector<const std::vector<std::size_t>*> shots;
  shots.reserve(groups.size());
  for (const auto& [shot, idx] : groups) shots.push_back(&idx);

  PairHistogram h;
  h.spec = spec;
  h.kind = PairHistogram::Kind::SameShot;
  h.counts.assign(static_cast<std::size_t>(flat_bins(spec)), 0);
  h.shot_count = static_cast<long long>(groups.size());

#pragma omp parallel
  {
    std::vector<long long> local(h.counts.size(), 0);
    long long local_pairs = 0;
#pragma omp for schedule(dynamic, 16) nowait
    for (long long g = 0; g < static_cast<long long>(shots.size()); ++g) {
      const auto& idx = *shots[static_cast<std::size_t>(g)];
      for (std::size_t i = 0; i < idx.size(); ++i) {
        for (std::size_t j = i + 1; j < idx.size(); ++j) {
          ++local_pairs;
          const long long b = bin_of(events[idx[i]], events[idx[j]], spec);
          if (b >= 0) ++local[static_cast<std::size_t>(b)];
        }
      }
    }
#pragma omp critical
    {
      for (std::size_t b = 0; b < local.size(); ++b) h.counts[b] += local[b];
      h.total_pairs += local_pairs;
    }
  }
  return h;
}

PairHistogram normalization_histogram(std::span<const EventRecord> events,
                                      const HistogramSpec& spec, long long target_pairs,
                                      rng::Stream& stream) {
  spec.validate();
  if (target_pairs < 0) throw DomainError("normalization_histogram: negative target");
  const auto groups = group_by_shot(events);
  long long populated = 0;
  for (const auto& [shot, idx] : groups) populated += idx.empty() ? 0 : 1;
  if (populated < 2)
    throw DomainError("normalization_histogram: needs events from at least two shots");

  PairHistogram h;
  h.spec = spec;
  h.kind = PairHistogram::Kind::Mixed;
  h.counts.assign(static_cast<std::size_t>(flat_bins(spec)), 0);
  h.shot_count = static_cast<long long>(groups.size());
  const std::size_t n = events.size();
  for (long long p = 0; p < target_pairs; ++p) {
    std::size_t i, j;
    int guard = 0;
    do {
      i = stream.index(n);
      j = stream.index(n);
      if (++guard > 100000)
        throw DomainError("normalization_histogram: cannot find cross-shot pairs");
    } while (events[i].shot_id == events[j].shot_id);
    ++h.total_pairs;
    const long long b = bin_of(events[i], events[j], spec);
    if (b >= 0) ++h.counts[static_cast<std::size_t>(b)];
  }
  return h;
}

PairHistogram average_horizontal(const PairHistogram& h, double radius_cap) {
  if (!h.full3d()) throw DomainError("average_horizontal: input must be a Full3D histogram");
  const double wx = h.spec.width[0];
  const double wy = h.spec.width[1];
  if (radius_cap < std::min(wx, wy))
    throw DomainError("average_horizontal: radius cap smaller than one bin");
  PairHistogram out;
  out.spec.axes = {h.spec.axes[2]};
  out.spec.width = {h.spec.width[2]};
  out.spec.bins = {h.spec.bins[2]};
  out.kind = h.kind;
  out.total_pairs = h.total_pairs;
  out.shot_count = h.shot_count;
  out.counts.assign(static_cast<std::size_t>(h.spec.bins[2]), 0);
  for (int bx = 0; bx < h.spec.bins[0]; ++bx) {
    for (int by = 0; by < h.spec.bins[1]; ++by) {
      if (std::hypot(bx * wx, by * wy) > radius_cap) continue;
      for (int bz = 0; bz < h.spec.bins[2]; ++bz) {
        const std::size_t src =
            (static_cast<std::size_t>(bx) * h.spec.bins[1] + by) * h.spec.bins[2] + bz;
        out.counts[static_cast<std::size_t>(bz)] += h.counts[src];
      }
    }
  }
  return out;
}

G2Curve normalize_g2(const PairHistogram& num, const PairHistogram& den) {
  if (!(num.spec == den.spec))
    throw DomainError("normalize_g2: numerator and denominator bins differ");
  if (num.spec.axes.size() != 1)
    throw DomainError("normalize_g2: 1-D histograms expected (average Full3D first)");
  G2Curve curve;
  curve.num_pairs = num.total_pairs;
  curve.den_pairs = den.total_pairs;
  const std::size_t nb = num.counts.size();
  curve.center.resize(nb);
  curve.g2.assign(nb, 0.0);
  curve.sigma.assign(nb, 0.0);
  curve.valid.assign(nb, 0);
  for (std::size_t b = 0; b < nb; ++b) {
    curve.center[b] = static_cast<double>(b) * num.spec.width[0];
    const long long cn = num.counts[b];
    const long long cd = den.counts[b];
    if (cd <= 0 || num.total_pairs <= 0 || den.total_pairs <= 0) continue; // invalid bin
    const double scale = static_cast<double>(den.total_pairs) /
                         (static_cast<double>(cd) * static_cast<double>(num.total_pairs));
    curve.g2[b] = static_cast<double>(cn) * scale;
    // Poisson errors on both histograms; an empty numerator bin gets the
    // one-count scale so its uncertainty stays positive.
    const double rel2 = 1.0 / static_cast<double>(std::max<long long>(cn, 1)) +
                        1.0 / static_cast<double>(cd);
    curve.sigma[b] = (cn > 0 ? curve.g2[b] : scale) * std::sqrt(rel2);
    curve.valid[b] = 1;
  }
  return curve;
}

namespace {

struct ProfilePoint {
  double chi2;
  double c;
};

// Closed-form amplitude at fixed length, and the resulting chi^2.
ProfilePoint profile_at(const G2Curve& curve, double length) {
  double se2 = 0.0, sye = 0.0;
  for (std::size_t b = 0; b < curve.g2.size(); ++b) {
    if (!curve.valid[b]) continue;
    const double w = 1.0 / (curve.sigma[b] * curve.sigma[b]);
    const double e = std::exp(-curve.center[b] * curve.center[b] / (length * length));
    se2 += w * e * e;
    sye += w * (curve.g2[b] - 1.0) * e;
  }
  const double c = se2 > 0.0 ? sye / se2 : 0.0;
  double chi2 = 0.0;
  for (std::size_t b = 0; b < curve.g2.size(); ++b) {
    if (!curve.valid[b]) continue;
    const double w = 1.0 / (curve.sigma[b] * curve.sigma[b]);
    const double e = std::exp(-curve.center[b] * curve.center[b] / (length * length));
    const double r = curve.g2[b] - 1.0 - c * e;
    chi2 += w * r * r;
  }
  return {chi2, c};
}

} // namespace

CorrelationFit fit_correlation(const G2Curve& curve) {
  int nvalid = 0;
  double dmax = 0.0;
  double wmin = std::numeric_limits<double>::infinity();
  for (std::size_t b = 0; b < curve.g2.size(); ++b) {
    if (!curve.valid[b]) continue;
    if (!std::isfinite(curve.g2[b]) || !(curve.sigma[b] > 0.0))
      throw FitError("fit_correlation: non-finite bin or non-positive uncertainty");
    ++nvalid;
    dmax = std::max(dmax, curve.center[b]);
  }
  if (nvalid < 5) throw FitError("fit_correlation: needs at least 5 valid bins, got " +
                                 std::to_string(nvalid));
  if (curve.center.size() >= 2) wmin = curve.center[1] - curve.center[0];
  if (!(dmax > 0.0) || !std::isfinite(wmin))
    throw FitError("fit_correlation: degenerate bin layout");

  // Coarse log-spaced scan to bracket the best length, then golden-section.
  const double lo = 0.25 * wmin;
  const double hi = 4.0 * dmax;
  const int coarse = 64;
  double best_l = lo;
  double best_chi2 = std::numeric_limits<double>::infinity();
  for (int i = 0; i < coarse; ++i) {
    const double l = lo * std::pow(hi / lo, static_cast<double>(i) / (coarse - 1));
    const double chi2 = profile_at(curve, l).chi2;
    if (chi2 < best_chi2) {
      best_chi2 = chi2;
      best_l = l;
    }
  }
  double a = best_l / std::pow(hi / lo, 1.0 / (coarse - 1));
  double b = best_l * std::pow(hi / lo, 1.0 / (coarse - 1));
  a = std::max(a, lo);
  b = std::min(b, hi);
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = b - gr * (b - a);
  double x2 = a + gr * (b - a);
  double f1 = profile_at(curve, x1).chi2;
  double f2 = profile_at(curve, x2).chi2;
  for (int it = 0; it < 200 && (b - a) > 1e-12 * b; ++it) {
    if (f1 <= f2) {
      b = x2; x2 = x1; f2 = f1;
      x1 = b - gr * (b - a);
      f1 = profile_at(curve, x1).chi2;
    } else {
      a = x1; x1 = x2; f1 = f2;
      x2 = a + gr * (b - a);
      f2 = profile_at(curve, x2).chi2;
    }
  }
  const double length = 0.5 * (a + b);
  const auto [chi2, contrast] = profile_at(curve, length);

  // Parameter covariance from the Gauss-Newton normal matrix at the optimum.
  double a00 = 0.0, a01 = 0.0, a11 = 0.0;
  for (std::size_t k = 0; k < curve.g2.size(); ++k) {
    if (!curve.valid[k]) continue;
    const double w = 1.0 / (curve.sigma[k] * curve.sigma[k]);
    const double d2 = curve.center[k] * curve.center[k];
    const double e = std::exp(-d2 / (length * length));
    const double jl = contrast * e * 2.0 * d2 / (length * length * length);
    a00 += w * e * e;
    a01 += w * e * jl;
    a11 += w * jl * jl;
  }
  CorrelationFit fit;
  fit.contrast = contrast;
  fit.length = length;
  fit.bins_used = nvalid;
  fit.chi2_per_dof = chi2 / std::max(1, nvalid - 2);
  const double det = a00 * a11 - a01 * a01;
  if (det > 0.0 && a00 > 0.0) {
    fit.sigma_contrast = std::sqrt(a11 / det);
    fit.sigma_length = std::sqrt(a00 / det);
  } else if (a00 > 0.0) {
    // Amplitude indistinguishable from zero: length unconstrained.
    fit.sigma_contrast = std::sqrt(1.0 / a00);
    fit.sigma_length = std::numeric_limits<double>::infinity();
  } else {
    throw FitError("fit_correlation: singular normal matrix");
  }
  return fit;
}

bool Subvolume::contains(const EventRecord& ev) const {
  for (std::size_t a = 0; a < roles.size(); ++a) {
    const double c = coordinate(ev, roles[a]);
    if (c < range[a].first || c >= range[a].second) return false;
  }
  return true;
}

CountingStats counting_statistics(std::span<const EventRecord> events, long long n_shots,
                                  const Subvolume& subvolume) {
  if (n_shots < 2) throw DomainError("counting_statistics: needs at least 2 shots");
  if (subvolume.roles.size() != subvolume.range.size() || subvolume.roles.empty())
    throw DomainError("counting_statistics: malformed subvolume");
  CountingStats cs;
  cs.subvolume = subvolume;
  cs.per_shot.assign(static_cast<std::size_t>(n_shots), 0);
  for (const EventRecord& ev : events) {
    if (ev.shot_id < 0 || ev.shot_id >= n_shots)
      throw DomainError("counting_statistics: shot_id outside 0..n_shots-1");
    if (subvolume.contains(ev)) ++cs.per_shot[static_cast<std::size_t>(ev.shot_id)];
  }
  const double n = static_cast<double>(n_shots);
  double sum = 0.0;
  for (long long c : cs.per_shot) sum += static_cast<double>(c);
  cs.mean = sum / n;
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (long long c : cs.per_shot) {
    const double d = static_cast<double>(c) - cs.mean;
    m2 += d * d;
    m3 += d * d * d;
    m4 += d * d * d * d;
  }
  cs.variance = m2 / (n - 1.0);
  m2 /= n;
  m3 /= n;
  m4 /= n;

  // Asymptotic standard error of (s^2 - mean); the inversion below is
  // meaningless when the difference sits inside it.
  const double var_s2 = std::max(0.0, (m4 - m2 * m2) / n);
  const double se2 = std::max(0.0, var_s2 + m2 / n - 2.0 * m3 / n);
  cs.diff_standard_error = std::sqrt(se2);

  const double diff = cs.variance - cs.mean;
  if (std::abs(diff) <= cs.diff_standard_error || cs.mean == 0.0) {
    cs.flag = CountingStats::Flag::Undefined;
    cs.g_inferred = std::numeric_limits<double>::quiet_NaN();
  } else if (diff > 0.0) {
    cs.flag = CountingStats::Flag::BosonLike;
    cs.g_inferred = cs.mean * cs.mean / diff;
  } else {
    cs.flag = CountingStats::Flag::FermionLike;
    cs.g_inferred = cs.mean * cs.mean / (-diff);
  }
  return cs;
}

const char* to_string(CountingStats::Flag flag) {
  switch (flag) {
    case CountingStats::Flag::BosonLike: return "boson_like";
    case CountingStats::Flag::FermionLike: return "fermion_like";
    case CountingStats::Flag::Undefined: return "undefined";
  }
  return "?";
}

} // namespace hbt
