#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

#include "hbt/dpp.hpp"
#include "hbt/estimators.hpp"

using namespace hbt;

namespace {

SourceModel fermion_source(double mean) {
  SourceModel src;
  src.statistics = Statistics::Fermion;
  src.source_rms = 1e-3;
  src.wavelength = 5e-7;
  src.mean_count = mean;
  return src;
}

Geometry line_geometry(double extent, int cells) {
  Geometry g;
  g.mode = Geometry::Mode::Optical;
  g.distance = 1.0;
  g.grid.axes = {{extent, cells}};
  return g;
}

} // namespace

TEST_CASE("single-cell kernel at unit occupancy is clamped, not rejected") {
  const Geometry geo = line_geometry(1e-4, 1);
  const auto K = build_thermal_kernel(fermion_source(1.0), geo, std::vector<double>{1e-3});
  REQUIRE(K.eigenvalues.size() == 1);
  CHECK(K.eigenvalues(0) == doctest::Approx(1.0 - 1e-9).epsilon(1e-12));
  CHECK(K.applied_rescale > 0.0);
  CHECK(K.applied_rescale < 1e-8);

  long long hits = 0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    rng::Stream s = rng::Stream::for_shot(3, i, rng::Stage::Events);
    hits += static_cast<long long>(sample_fermion_cells(K, s).size());
  }
  CHECK(hits == n); // miss probability 1e-9
}

TEST_CASE("kernel build guards") {
  // Unresolved grid: cell width >= l/2.
  const Geometry coarse = line_geometry(6e-4, 3); // cell 2e-4
  CHECK_THROWS_AS(build_thermal_kernel(fermion_source(0.5), coarse, std::vector<double>{3e-4}), DomainError);

  // Occupancy beyond the phase-space capacity: eigenvalues would pass 1.
  const Geometry geo = line_geometry(2e-3, 10);
  CHECK_THROWS_AS(build_thermal_kernel(fermion_source(8.0), geo, std::vector<double>{1e-3}), DomainError);

  CHECK_THROWS_AS(build_thermal_kernel(fermion_source(0.5), geo, std::vector<double>{0.0}), DomainError);
  CHECK_THROWS_AS(build_thermal_kernel(fermion_source(0.5), geo, std::vector<double>{1e-3, 1e-3}), DomainError);
}

TEST_CASE("six-cell kernel: inclusion frequencies match principal minors") {
  // Brute-force oracle: P(i in S) = K_ii, P({i,j} in S) = K_ii K_jj - K_ij^2.
  const double l = 3e-4;
  const Geometry geo = line_geometry(6e-4, 6); // cell l/3
  const auto K = build_thermal_kernel(fermion_source(0.8), geo, std::vector<double>{l});
  CHECK(K.eigenvalues.maxCoeff() < 1.0);
  CHECK(K.eigenvalues.minCoeff() >= 0.0);
  CHECK(K.kernel.trace() == doctest::Approx(0.8).epsilon(1e-12));

  const int n_samples = 50000;
  long long singles[6] = {};
  long long pairs[6][6] = {};
  double count_sum = 0.0, count_sum2 = 0.0;
  for (int s = 0; s < n_samples; ++s) {
    rng::Stream stream = rng::Stream::for_shot(17, s, rng::Stage::Events);
    const auto cells = sample_fermion_cells(K, stream);
    const std::set<long long> uniq(cells.begin(), cells.end());
    REQUIRE(uniq.size() == cells.size()); // a sample is a subset of cells
    count_sum += static_cast<double>(cells.size());
    count_sum2 += static_cast<double>(cells.size()) * static_cast<double>(cells.size());
    for (long long c : cells) ++singles[c];
    for (long long a : cells)
      for (long long b : cells)
        if (a < b) ++pairs[a][b];
  }

  for (int i = 0; i < 6; ++i) {
    const double p = K.kernel(i, i);
    const double emp = static_cast<double>(singles[i]) / n_samples;
    const double sigma = std::sqrt(p * (1.0 - p) / n_samples);
    CHECK(std::abs(emp - p) < 3.0 * sigma);
  }
  for (int i = 0; i < 6; ++i) {
    for (int j = i + 1; j < 6; ++j) {
      const double p = K.kernel(i, i) * K.kernel(j, j) - K.kernel(i, j) * K.kernel(i, j);
      const double emp = static_cast<double>(pairs[i][j]) / n_samples;
      const double sigma = std::sqrt(p * (1.0 - p) / n_samples);
      CHECK(std::abs(emp - p) < 3.0 * sigma);
    }
  }

  // First-moment identity: mean count = trace(K); variance = tr K - tr K^2.
  const double mean = count_sum / n_samples;
  const double var = count_sum2 / n_samples - mean * mean;
  const double var_exact = K.kernel.trace() - (K.kernel * K.kernel).trace();
  CHECK(std::abs(mean - K.kernel.trace()) < 3.0 * std::sqrt(var_exact / n_samples));
  CHECK(var == doctest::Approx(var_exact).epsilon(0.05));
}

TEST_CASE("projection kernel: count equals rank, cells never repeat") {
  ThermalKernel K;
  K.grid.axes = {{4e-4, 4}};
  K.correlation_length = {1e-4};
  K.density.assign(4, 1.0);
  K.kernel = Eigen::MatrixXd::Zero(4, 4);
  K.kernel(0, 0) = 1.0;
  K.kernel(1, 1) = 1.0;
  K.eigenvalues = Eigen::Vector4d(0.0, 0.0, 1.0, 1.0);
  K.eigenvectors = Eigen::MatrixXd::Zero(4, 4);
  K.eigenvectors(2, 0) = 1.0; // null modes
  K.eigenvectors(3, 1) = 1.0;
  K.eigenvectors(0, 2) = 1.0; // occupied modes
  K.eigenvectors(1, 3) = 1.0;

  for (int s = 0; s < 500; ++s) {
    rng::Stream stream = rng::Stream::for_shot(23, s, rng::Stage::Events);
    const auto cells = sample_fermion_cells(K, stream);
    REQUIRE(cells.size() == 2);
    const std::set<long long> uniq(cells.begin(), cells.end());
    CHECK(uniq == std::set<long long>{0, 1});
  }
}

TEST_CASE("zero kernel always yields the vacuum") {
  ThermalKernel K;
  K.grid.axes = {{4e-4, 4}};
  K.correlation_length = {1e-4};
  K.density.assign(4, 0.0);
  K.kernel = Eigen::MatrixXd::Zero(4, 4);
  K.eigenvalues = Eigen::Vector4d::Zero();
  K.eigenvectors = Eigen::MatrixXd::Identity(4, 4);
  for (int s = 0; s < 100; ++s) {
    rng::Stream stream(s);
    CHECK(sample_fermion_cells(K, stream).empty());
  }
}

TEST_CASE("kernel validation rejects corrupt inputs") {
  const Geometry geo = line_geometry(2e-3, 10);
  auto K = build_thermal_kernel(fermion_source(1.0), geo, std::vector<double>{1e-3});

  auto bad_eig = K;
  bad_eig.eigenvalues(0) = 1.5;
  rng::Stream s1(1);
  CHECK_THROWS_AS(sample_fermion_cells(bad_eig, s1), KernelError);

  auto bad_sym = K;
  bad_sym.kernel(0, 1) += 1e-3;
  rng::Stream s2(1);
  CHECK_THROWS_AS(sample_fermion_cells(bad_sym, s2), KernelError);

  auto bad_neg = K;
  bad_neg.eigenvalues(0) = -1e-3;
  rng::Stream s3(1);
  CHECK_THROWS_AS(sample_fermion_cells(bad_neg, s3), KernelError);
}

TEST_CASE("fermion events: antibunching dip in g2") {
  const double l = 7.957747154594767e-05;
  const Geometry geo = line_geometry(30.0 * l, 150);
  const SourceModel src = fermion_source(8.0);
  const auto K = build_thermal_kernel(src, geo, std::vector<double>{l});
  CHECK(K.eigenvalues.maxCoeff() < 0.75);

  std::vector<EventRecord> events;
  const int shots = 2000;
  for (int shot = 0; shot < shots; ++shot) {
    rng::Stream s = rng::Stream::for_shot(29, shot, rng::Stage::Events);
    auto ev = sample_fermion_events(K, geo, s, shot);
    events.insert(events.end(), ev.begin(), ev.end());
  }
  HistogramSpec spec;
  spec.axes = {AxisRole::X};
  spec.width = {l / 5.0};
  spec.bins = {40};
  const PairHistogram num = pair_histogram(events, spec);
  rng::Stream mix(31);
  const PairHistogram den =
      normalization_histogram(events, spec, 12 * num.total_pairs, mix);
  const auto curve = normalize_g2(num, den);
  CHECK(curve.g2[0] < 0.15);
  double far = 0.0;
  int nfar = 0;
  for (std::size_t b = 0; b < curve.g2.size(); ++b)
    if (curve.center[b] > 4.0 * l) {
      far += curve.g2[b];
      ++nfar;
    }
  CHECK(far / nfar == doctest::Approx(1.0).epsilon(0.05));

  // Events carry jitter: coordinates are not all at cell centers.
  int off_center = 0;
  for (const auto& ev : events) {
    const double w = geo.grid.cell_width(0);
    const double frac = std::abs(std::remainder(ev.x - 0.5 * w, w)) / w;
    if (frac > 0.05) ++off_center;
  }
  CHECK(off_center > static_cast<int>(events.size()) / 2);
}
