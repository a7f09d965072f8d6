// Throughput comparison of the synthesis routes (direct trigonometric sum
// vs factored transform) and of the serial vs OpenMP shot drivers.

#include <omp.h>

#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <string>

#include "hbt/chaotic_field.hpp"
#include "hbt/estimators.hpp"
#include "hbt/pipeline.hpp"

using namespace hbt;

namespace {

constexpr double kOpticalLengthBench = 7.957747154594767e-05;

RunConfig bench_config(long long shots, int cells, int emitters) {
  RunConfig cfg;
  cfg.source.statistics = Statistics::ChaoticBoson;
  cfg.source.source_rms = 1e-3;
  cfg.source.wavelength = 5e-7;
  cfg.source.mean_count = 20.0;
  cfg.geometry.mode = Geometry::Mode::Optical;
  cfg.geometry.distance = 1.0;
  cfg.geometry.grid.axes = {{120.0 * kOpticalLengthBench, cells}};
  cfg.seed = 71;
  cfg.shots = shots;
  cfg.emitters = emitters;
  return cfg;
}

} // namespace

int main(int argc, char** argv) {
  long long shots = 800;
  int cells = 720;
  int emitters = 1024;
  for (int i = 1; i + 1 < argc; i += 2) {
    const std::string key = argv[i];
    const long long value = std::atoll(argv[i + 1]);
    if (key == "--shots") shots = value;
    else if (key == "--cells") cells = static_cast<int>(value);
    else if (key == "--emitters") emitters = static_cast<int>(value);
    else {
      std::fprintf(stderr, "usage: hbtsim-bench [--shots N] [--cells N] [--emitters N]\n");
      return 1;
    }
  }
  const RunConfig cfg = bench_config(shots, cells, emitters);
  std::printf("shots %lld, cells %d, emitters %d, omp max threads %d\n", shots, cells,
              emitters, omp_get_max_threads());

  // Synthesis routes on one ensemble, repeated.
  auto stream = rng::Stream::for_shot(cfg.seed, 0, rng::Stage::Ensemble);
  const auto ensemble = draw_ensemble(cfg.source, cfg.emitters, 1, stream);
  const int reps = 20;
  double t0 = omp_get_wtime();
  FieldRealization direct;
  for (int r = 0; r < reps; ++r)
    direct = synthesize_field(ensemble, cfg.geometry, *cfg.source.wavelength, 0,
                              SynthesisRoute::Direct);
  const double t_direct = (omp_get_wtime() - t0) / reps;
  t0 = omp_get_wtime();
  FieldRealization transform;
  for (int r = 0; r < reps; ++r)
    transform = synthesize_field(ensemble, cfg.geometry, *cfg.source.wavelength, 0,
                                 SynthesisRoute::Transform);
  const double t_transform = (omp_get_wtime() - t0) / reps;
  double max_rel = 0.0;
  for (std::size_t i = 0; i < direct.amplitude.size(); ++i)
    max_rel = std::max(max_rel, std::abs(direct.amplitude[i] - transform.amplitude[i]) /
                                    std::abs(direct.amplitude[i]));
  std::printf("synthesis direct    %10.4f ms/shot\n", 1e3 * t_direct);
  std::printf("synthesis transform %10.4f ms/shot   speedup %.1fx   max rel dev %.2e\n",
              1e3 * t_transform, t_direct / t_transform, max_rel);

  // Shot drivers.
  t0 = omp_get_wtime();
  const SimulationResult serial = simulate_events(cfg, ExecutionPolicy::Serial);
  const double t_serial = omp_get_wtime() - t0;
  t0 = omp_get_wtime();
  const SimulationResult parallel = simulate_events(cfg, ExecutionPolicy::Parallel);
  const double t_parallel = omp_get_wtime() - t0;
  bool identical = serial.per_shot.size() == parallel.per_shot.size();
  for (std::size_t s = 0; identical && s < serial.per_shot.size(); ++s) {
    identical = serial.per_shot[s].size() == parallel.per_shot[s].size();
    for (std::size_t i = 0; identical && i < serial.per_shot[s].size(); ++i) {
      const auto &a = serial.per_shot[s][i], &b = parallel.per_shot[s][i];
      identical = a.t == b.t && a.x == b.x && a.y == b.y;
    }
  }
  std::printf("pipeline serial     %10.3f s  (%lld events)\n", t_serial,
              serial.total_events());
  std::printf("pipeline openmp     %10.3f s   speedup %.2fx   events %s\n", t_parallel,
              t_serial / t_parallel, identical ? "identical" : "DIFFER");

  // Pair-histogram kernels on the simulated events.
  const auto events = serial.flatten();
  HistogramSpec spec;
  spec.axes = {AxisRole::X};
  spec.width = {kOpticalLengthBench / 5.0};
  spec.bins = {100};
  const int hist_reps = 30;
  t0 = omp_get_wtime();
  PairHistogram hs;
  for (int r = 0; r < hist_reps; ++r) hs = pair_histogram(events, spec);
  const double t_hist_serial = (omp_get_wtime() - t0) / hist_reps;
  t0 = omp_get_wtime();
  PairHistogram hp;
  for (int r = 0; r < hist_reps; ++r) hp = pair_histogram_parallel(events, spec);
  const double t_hist_parallel = (omp_get_wtime() - t0) / hist_reps;
  const bool hist_same = hs.counts == hp.counts && hs.total_pairs == hp.total_pairs;
  std::printf("histogram serial    %10.4f ms\n", 1e3 * t_hist_serial);
  std::printf("histogram openmp    %10.4f ms   speedup %.2fx   counts %s\n",
              1e3 * t_hist_parallel, t_hist_serial / t_hist_parallel,
              hist_same ? "identical" : "DIFFER");
  return identical && hist_same ? 0 : 1;
}
