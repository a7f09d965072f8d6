#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "hbt/estimators.hpp"

using namespace hbt;

namespace {

EventRecord ev1d(long long shot, double x) {
  EventRecord ev;
  ev.shot_id = shot;
  ev.x = x;
  return ev;
}

EventRecord ev3d(long long shot, double x, double y, double z) {
  EventRecord ev;
  ev.shot_id = shot;
  ev.x = x;
  ev.y = y;
  ev.z = z;
  ev.has_z = true;
  return ev;
}

HistogramSpec spec1d(double width, int bins) {
  HistogramSpec s;
  s.axes = {AxisRole::X};
  s.width = {width};
  s.bins = {bins};
  return s;
}

} // namespace

TEST_CASE("pair_histogram: enumeration oracle") {
  const HistogramSpec spec = spec1d(0.5, 8);

  SUBCASE("two events, one pair") {
    const std::vector<EventRecord> events{ev1d(0, 0.0), ev1d(0, 1.0)};
    const auto h = pair_histogram(events, spec);
    CHECK(h.total_pairs == 1);
    CHECK(std::accumulate(h.counts.begin(), h.counts.end(), 0LL) == 1);
    CHECK(h.counts[2] == 1); // separation 1.0 -> bin 2
  }
  SUBCASE("positions 0,1,2 give separations 1,1,2") {
    const std::vector<EventRecord> events{ev1d(0, 0.0), ev1d(0, 1.0), ev1d(0, 2.0)};
    const auto h = pair_histogram(events, spec);
    CHECK(h.total_pairs == 3);
    CHECK(h.counts[2] == 2);
    CHECK(h.counts[4] == 1);
  }
  SUBCASE("no same-shot pairs across shots") {
    const std::vector<EventRecord> events{ev1d(0, 0.0), ev1d(1, 1.0)};
    const auto h = pair_histogram(events, spec);
    CHECK(h.total_pairs == 0);
    CHECK(std::accumulate(h.counts.begin(), h.counts.end(), 0LL) == 0);
  }
  SUBCASE("empty input is a valid empty histogram") {
    const auto h = pair_histogram({}, spec);
    CHECK(h.total_pairs == 0);
    CHECK(h.shot_count == 0);
  }
  SUBCASE("missing z is a dimensionality error") {
    HistogramSpec zspec = spec;
    zspec.axes = {AxisRole::Z};
    const std::vector<EventRecord> events{ev1d(0, 0.0), ev1d(0, 1.0)};
    CHECK_THROWS_AS(pair_histogram(events, zspec), DomainError);
  }
}

TEST_CASE("normalization_histogram: cross-shot pairs only") {
  const HistogramSpec spec = spec1d(0.5, 8);
  const std::vector<EventRecord> two{ev1d(0, 0.0), ev1d(1, 1.0)};

  rng::Stream s(5);
  const auto h = normalization_histogram(two, spec, 50, s);
  CHECK(h.total_pairs == 50);
  CHECK(h.counts[2] == 50); // every cross pair separates by exactly 1

  rng::Stream s2(6);
  CHECK(normalization_histogram(two, spec, 0, s2).total_pairs == 0);

  const std::vector<EventRecord> one_shot{ev1d(0, 0.0), ev1d(0, 1.0)};
  rng::Stream s3(7);
  CHECK_THROWS_AS(normalization_histogram(one_shot, spec, 10, s3), DomainError);
}

TEST_CASE("normalize_g2: ratios, invalid bins, errors") {
  const HistogramSpec spec = spec1d(1.0, 4);
  PairHistogram num;
  num.spec = spec;
  num.counts = {100, 200, 0, 100};
  num.total_pairs = 400;
  PairHistogram den = num;
  den.kind = PairHistogram::Kind::Mixed;

  SUBCASE("identical histograms give a flat unit curve") {
    const auto curve = normalize_g2(num, den);
    for (std::size_t b = 0; b < 2; ++b) {
      CHECK(curve.valid[b]);
      CHECK(curve.g2[b] == doctest::Approx(1.0));
      CHECK(curve.sigma[b] > 0.0);
    }
    CHECK_FALSE(curve.valid[2]); // empty denominator bin: invalid, not infinite
    CHECK(std::isfinite(curve.g2[2]));
  }
  SUBCASE("a doubled bin reads exactly two") {
    PairHistogram num2 = num;
    num2.counts = {200, 200, 0, 100};
    num2.total_pairs = 500;
    den.counts = {100, 200, 0, 100};
    den.total_pairs = 400;
    const auto curve = normalize_g2(num2, den);
    // totals normalization: (200/500)/(100/400) = 1.6
    CHECK(curve.g2[0] == doctest::Approx(1.6));
    CHECK(curve.g2[1] == doctest::Approx(0.8));
  }
  SUBCASE("bin mismatch throws") {
    PairHistogram other = den;
    other.spec = spec1d(0.5, 4);
    other.counts.assign(4, 1);
    CHECK_THROWS_AS(normalize_g2(num, other), DomainError);
  }
}

TEST_CASE("average_horizontal: brute-force marginal") {
  HistogramSpec spec;
  spec.axes = {AxisRole::X, AxisRole::Y, AxisRole::Z};
  spec.width = {0.5, 0.5, 0.5};
  spec.bins = {6, 6, 6};

  SUBCASE("single occupied 3-D bin lands in the matching vertical bin") {
    std::vector<EventRecord> events{ev3d(0, 0.0, 0.0, 0.0), ev3d(0, 0.4, 0.1, 1.0)};
    const auto h3 = pair_histogram(events, spec);
    const auto h1 = average_horizontal(h3, 10.0);
    CHECK(h1.counts[2] == 1); // dz = 1.0 -> bin 2
    CHECK(std::accumulate(h1.counts.begin(), h1.counts.end(), 0LL) == 1);
  }
  SUBCASE("isotropic events: unrestricted marginal equals direct 1-D histogram") {
    rng::Stream gen(41);
    std::vector<EventRecord> events;
    for (int shot = 0; shot < 50; ++shot)
      for (int k = 0; k < 8; ++k)
        events.push_back(ev3d(shot, gen.uniform(-1, 1), gen.uniform(-1, 1), gen.uniform(-1, 1)));
    const auto h3 = pair_histogram(events, spec);
    const auto h1 = average_horizontal(h3, 1e9);

    HistogramSpec zspec;
    zspec.axes = {AxisRole::Z};
    zspec.width = {0.5};
    zspec.bins = {6};
    const auto direct = pair_histogram(events, zspec);
    // Out-of-range x/y separations cannot occur here (extent < bins*width),
    // so the marginal reproduces the direct histogram bin by bin.
    CHECK(h1.counts == direct.counts);
  }
  SUBCASE("radius cap keeps only tight horizontal pairs") {
    std::vector<EventRecord> events{ev3d(0, 0.0, 0.0, 0.0), ev3d(0, 2.4, 0.0, 0.5),
                                    ev3d(0, 0.1, 0.0, 0.5)};
    const auto h3 = pair_histogram(events, spec);
    const auto tight = average_horizontal(h3, 0.6);
    // pair (0,2): dx bin 0 -> kept; pair (0,1): dx bin 5 -> dropped;
    // pair (1,2): dx bin 5 -> dropped.
    CHECK(tight.counts[1] == 1);
    CHECK(std::accumulate(tight.counts.begin(), tight.counts.end(), 0LL) == 1);
  }
  SUBCASE("cap below one bin is an error; 1-D input is an error") {
    std::vector<EventRecord> events{ev3d(0, 0, 0, 0), ev3d(0, 1, 1, 1)};
    const auto h3 = pair_histogram(events, spec);
    CHECK_THROWS_AS(average_horizontal(h3, 0.4), DomainError);
    const auto h1 = average_horizontal(h3, 1.0);
    CHECK_THROWS_AS(average_horizontal(h1, 1.0), DomainError);
  }
}

TEST_CASE("fit_correlation: recovery, noise, flat input") {
  auto make_curve = [](double c, double l, double noise, rng::Stream* gen) {
    G2Curve curve;
    for (int b = 0; b < 30; ++b) {
      const double d = b * 2e-5;
      curve.center.push_back(d);
      double y = 1.0 + c * std::exp(-d * d / (l * l));
      if (gen) y += noise * gen->gaussian();
      curve.g2.push_back(y);
      curve.sigma.push_back(std::max(noise, 1e-6));
      curve.valid.push_back(1);
    }
    return curve;
  };

  SUBCASE("exact curve recovered to 1e-6 relative") {
    const auto fit = fit_correlation(make_curve(1.0, 2e-4, 0.0, nullptr));
    CHECK(fit.contrast == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(fit.length == doctest::Approx(2e-4).epsilon(1e-6));
  }
  SUBCASE("negative contrast recovered (fermion dip)") {
    const auto fit = fit_correlation(make_curve(-0.9, 1.5e-4, 0.0, nullptr));
    CHECK(fit.contrast == doctest::Approx(-0.9).epsilon(1e-6));
    CHECK(fit.length == doctest::Approx(1.5e-4).epsilon(1e-6));
  }
  SUBCASE("one percent noise keeps parameters within five percent") {
    rng::Stream gen(55);
    const auto fit = fit_correlation(make_curve(1.0, 2e-4, 0.01, &gen));
    CHECK(fit.contrast == doctest::Approx(1.0).epsilon(0.05));
    CHECK(fit.length == doctest::Approx(2e-4).epsilon(0.05));
    CHECK(fit.sigma_contrast > 0.0);
    CHECK(fit.sigma_contrast < 0.05);
  }
  SUBCASE("flat curve: contrast compatible with zero") {
    rng::Stream gen(56);
    const auto fit = fit_correlation(make_curve(0.0, 1e-4, 0.01, &gen));
    CHECK(std::abs(fit.contrast) < 3.0 * fit.sigma_contrast);
  }
  SUBCASE("too few valid bins") {
    auto curve = make_curve(1.0, 2e-4, 0.0, nullptr);
    for (std::size_t b = 4; b < curve.valid.size(); ++b) curve.valid[b] = 0;
    CHECK_THROWS_AS(fit_correlation(curve), FitError);
  }
}

TEST_CASE("counting_statistics: calibration and cell-count inversion") {
  SUBCASE("iid Poisson counts: variance = mean within its standard error") {
    const long long shots = 30000;
    std::vector<EventRecord> events;
    rng::Stream gen(61);
    for (long long s = 0; s < shots; ++s) {
      const long long k = gen.poisson(5.0);
      for (long long i = 0; i < k; ++i) events.push_back(ev1d(s, 0.0));
    }
    Subvolume sub;
    sub.roles = {AxisRole::X};
    sub.range = {{-1.0, 1.0}};
    const auto cs = counting_statistics(events, shots, sub);
    CHECK(cs.mean == doctest::Approx(5.0).epsilon(0.02));
    CHECK(std::abs(cs.variance - cs.mean) < 3.0 * cs.diff_standard_error);
    CHECK(cs.flag == CountingStats::Flag::Undefined); // on the Poisson boundary
  }
  SUBCASE("k coherence cells: inferred g_cells near k") {
    const long long shots = 30000;
    const int k_cells = 10;
    const double mean = 20.0;
    std::vector<EventRecord> events;
    rng::Stream gen(62);
    for (long long s = 0; s < shots; ++s) {
      double rate = 0.0;
      for (int c = 0; c < k_cells; ++c)
        rate += -std::log(1.0 - gen.uniform()); // Exp(1) intensity per cell
      const long long n = gen.poisson(mean / k_cells * rate);
      for (long long i = 0; i < n; ++i) events.push_back(ev1d(s, 0.0));
    }
    Subvolume sub;
    sub.roles = {AxisRole::X};
    sub.range = {{-1.0, 1.0}};
    const auto cs = counting_statistics(events, shots, sub);
    CHECK(cs.flag == CountingStats::Flag::BosonLike);
    CHECK(cs.g_inferred == doctest::Approx(k_cells).epsilon(0.2));
  }
  SUBCASE("fermionic side of the inversion") {
    // Sub-Poisson synthetic counts: binomial thinning of a fixed number.
    const long long shots = 20000;
    std::vector<EventRecord> events;
    rng::Stream gen(63);
    const int trials = 12;
    const double p = 0.4;
    for (long long s = 0; s < shots; ++s) {
      int n = 0;
      for (int t = 0; t < trials; ++t) n += gen.bernoulli(p) ? 1 : 0;
      for (int i = 0; i < n; ++i) events.push_back(ev1d(s, 0.0));
    }
    Subvolume sub;
    sub.roles = {AxisRole::X};
    sub.range = {{-1.0, 1.0}};
    const auto cs = counting_statistics(events, shots, sub);
    CHECK(cs.flag == CountingStats::Flag::FermionLike);
    // binomial: var = mean (1-p) -> g = mean / p = trials
    CHECK(cs.g_inferred == doctest::Approx(trials).epsilon(0.1));
  }
  SUBCASE("needs two shots") {
    Subvolume sub;
    sub.roles = {AxisRole::X};
    sub.range = {{-1.0, 1.0}};
    CHECK_THROWS_AS(counting_statistics({}, 1, sub), DomainError);
  }
}

TEST_CASE("parallel pair histogram matches the serial reference") {
  const HistogramSpec spec = spec1d(0.2, 16);
  rng::Stream gen(81);
  std::vector<EventRecord> events;
  for (int shot = 0; shot < 200; ++shot) {
    const long long k = gen.poisson(8.0);
    for (long long i = 0; i < k; ++i) events.push_back(ev1d(shot, gen.uniform(-2.0, 2.0)));
  }
  const auto serial = pair_histogram(events, spec);
  const auto parallel = pair_histogram_parallel(events, spec);
  CHECK(serial.counts == parallel.counts);
  CHECK(serial.total_pairs == parallel.total_pairs);
  CHECK(serial.shot_count == parallel.shot_count);
}

TEST_CASE("histogram merge is order-independent") {
  const HistogramSpec spec = spec1d(0.25, 12);
  rng::Stream gen(71);
  std::vector<PairHistogram> parts;
  for (int p = 0; p < 12; ++p) {
    std::vector<EventRecord> events;
    for (int k = 0; k < 10; ++k) events.push_back(ev1d(p, gen.uniform(-1.5, 1.5)));
    parts.push_back(pair_histogram(events, spec));
  }
  PairHistogram forward = parts[0];
  for (std::size_t p = 1; p < parts.size(); ++p) forward.merge(parts[p]);
  PairHistogram backward = parts.back();
  for (std::size_t p = parts.size() - 1; p-- > 0;) backward.merge(parts[p]);
  CHECK(forward.counts == backward.counts);
  CHECK(forward.total_pairs == backward.total_pairs);

  PairHistogram incompatible = parts[0];
  incompatible.spec = spec1d(0.5, 12);
  incompatible.counts.assign(12, 0);
  CHECK_THROWS_AS(forward.merge(incompatible), DomainError);
}
