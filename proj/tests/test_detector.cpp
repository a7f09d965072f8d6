#include <doctest.h>

#include <cmath>
#include <vector>

#include "hbt/detector.hpp"

using namespace hbt;

namespace {

std::vector<EventRecord> one_event(double x, double y, double t) {
  EventRecord ev;
  ev.x = x;
  ev.y = y;
  ev.t = t;
  return {ev};
}

// Independent route to the per-axis contrast reduction: the closed-form
// value of (1/d^2) int_[0,d]^2 exp(-(u-v)^2/l^2) du dv.
double peak_erf(double l, double d) {
  const double r = d / l;
  return std::sqrt(M_PI) / r * std::erf(r) + (std::exp(-r * r) - 1.0) / (r * r);
}

} // namespace

TEST_CASE("detect: aperture, efficiency, quantization") {
  DetectorModel model; // 8.5 cm plate, 500 um pixels, 1 ns timing

  rng::Stream s(1);
  CHECK(detect(one_event(0.05, 0.0, 0.0), model, s).empty()); // radius > 0.0425

  rng::Stream s2(2);
  const auto kept = detect(one_event(1.2349e-3, 0.0, 0.0), model, s2);
  REQUIRE(kept.size() == 1);
  CHECK(kept[0].x == doctest::Approx(1.25e-3).epsilon(1e-12));

  DetectorModel blind = model;
  blind.efficiency = 0.0;
  rng::Stream s3(3);
  std::vector<EventRecord> many(100);
  CHECK(detect(many, blind, s3).empty());

  DetectorModel bad = model;
  bad.efficiency = 1.5;
  rng::Stream s4(4);
  CHECK_THROWS_AS(detect(many, bad, s4), DomainError);
}

TEST_CASE("detect: idempotent on quantized events, bounded displacement") {
  DetectorModel model;
  model.efficiency = 1.0;
  rng::Stream gen(9);
  std::vector<EventRecord> events(5000);
  for (auto& ev : events) {
    // inside the aperture so input/output indices stay aligned
    ev.x = gen.uniform(-0.029, 0.029);
    ev.y = gen.uniform(-0.029, 0.029);
    ev.t = gen.uniform(0.0, 1e-6);
  }
  rng::Stream s1(10);
  const auto once = detect(events, model, s1);
  REQUIRE(once.size() == events.size());
  for (std::size_t i = 0; i < once.size(); ++i) {
    // never moved by more than half a pitch on any axis
    const auto& before = events[i];
    CHECK(std::abs(once[i].x - before.x) <= 0.5 * model.spatial_resolution);
    CHECK(std::abs(once[i].y - before.y) <= 0.5 * model.spatial_resolution);
    CHECK(std::abs(once[i].t - before.t) <= 0.5 * model.time_resolution);
  }
  rng::Stream s2(11);
  const auto twice = detect(once, model, s2);
  REQUIRE(twice.size() == once.size());
  for (std::size_t i = 0; i < once.size(); ++i) {
    CHECK(twice[i].x == once[i].x);
    CHECK(twice[i].y == once[i].y);
    CHECK(twice[i].t == once[i].t);
  }
}

TEST_CASE("detect: survivor fraction = efficiency x in-aperture fraction") {
  DetectorModel model;
  model.efficiency = 0.65;
  rng::Stream gen(21);
  const int n = 20000;
  std::vector<EventRecord> events(n);
  int inside = 0;
  for (auto& ev : events) {
    ev.x = gen.uniform(-0.05, 0.05);
    ev.y = gen.uniform(-0.05, 0.05);
    if (std::hypot(ev.x, ev.y) <= 0.5 * model.diameter) ++inside;
  }
  rng::Stream s(22);
  const auto kept = detect(events, model, s);
  const double expected = model.efficiency * static_cast<double>(inside);
  const double sigma = std::sqrt(expected * (1.0 - model.efficiency));
  CHECK(std::abs(static_cast<double>(kept.size()) - expected) < 3.0 * sigma);
}

TEST_CASE("effective_contrast: limits and the convolution oracle") {
  // Resolution far below the correlation length: no reduction.
  {
    const std::vector<double> l{1e-4};
    const std::vector<double> d{1e-8};
    CHECK(effective_contrast(l, d) == doctest::Approx(1.0).epsilon(1e-4));
  }
  // One axis at d = l, the others ideal; oracle within 1%.
  {
    const std::vector<double> l{1e-4, 1e-4, 1e-4};
    const std::vector<double> d{1e-4, 0.0, 0.0};
    const double expected = 1.0 / peak_erf(1e-4, 1e-4);
    CHECK(effective_contrast(l, d) == doctest::Approx(expected).epsilon(0.01));
  }
  // Wide-pixel regime.
  for (double ratio : {0.3, 2.0, 6.849}) {
    const std::vector<double> l{1e-4};
    const std::vector<double> d{ratio * 1e-4};
    CHECK(effective_contrast(l, d) == doctest::Approx(1.0 / peak_erf(1e-4, ratio * 1e-4))
                                          .epsilon(0.01));
  }
  // Factor never drops below one.
  for (double ratio : {0.01, 0.5, 1.0, 4.0, 20.0}) {
    const std::vector<double> l{2e-4};
    const std::vector<double> d{ratio * 2e-4};
    CHECK(effective_contrast(l, d) >= 1.0);
  }
  CHECK_THROWS_AS(effective_contrast(std::vector<double>{-1e-4}, std::vector<double>{1e-4}),
                  DomainError);
  CHECK_THROWS_AS(effective_contrast(std::vector<double>{1e-4}, std::vector<double>{}),
                  DomainError);
}

TEST_CASE("effective_contrast: plate-scale preset lands near 15") {
  // 500 um pixels on both transverse axes with ~73 um correlation lengths,
  // 1 ns timing against a millimeter-scale vertical correlation length.
  DetectorModel model; // defaults: 5e-4 m, 1e-9 s
  const std::vector<double> lengths{7.3e-5, 7.3e-5, 5e-4};
  const std::vector<AxisRole> roles{AxisRole::X, AxisRole::Y, AxisRole::Z};
  const double factor = effective_contrast(lengths, model, 3.13, roles);
  CHECK(factor > 10.0);
  CHECK(factor < 25.0);
}

TEST_CASE("effective_contrast: role mapping uses v for the time axis") {
  DetectorModel model;
  model.spatial_resolution = 1e-12; // spatial axes ideal
  model.time_resolution = 1e-9;
  const double v = 3.0;
  const std::vector<double> lengths{1e-4, 3e-9};
  const std::vector<AxisRole> roles{AxisRole::X, AxisRole::Z};
  const std::vector<double> widths{1e-12, v * 1e-9};
  CHECK(effective_contrast(lengths, model, v, roles) ==
        doctest::Approx(effective_contrast(lengths, widths)).epsilon(1e-9));
  CHECK_THROWS_AS(effective_contrast(lengths, model, 0.0, roles), DomainError);
}
