#include "hbt/pipeline.hpp"

#include <omp.h>

#include <cmath>
#include <filesystem>
#include <limits>

#include "hbt/chaotic_field.hpp"
#include "hbt/detector.hpp"
#include "hbt/dpp.hpp"
#include "hbt/io.hpp"
#include "hbt/sampling.hpp"

namespace hbt {

std::vector<EventRecord> SimulationResult::flatten() const {
  std::vector<EventRecord> all;
  all.reserve(static_cast<std::size_t>(total_events()));
  for (const auto& shot : per_shot) all.insert(all.end(), shot.begin(), shot.end());
  return all;
}

long long SimulationResult::total_events() const {
  long long n = 0;
  for (const auto& shot : per_shot) n += static_cast<long long>(shot.size());
  return n;
}

namespace {

// One shot of the configured source. Shared is the eigendecomposed fermion
// kernel (read-only across workers).
std::vector<EventRecord> run_shot(const RunConfig& cfg, const ThermalKernel* kernel,
                                  long long shot) {
  const std::uint64_t master = cfg.seed;
  std::vector<EventRecord> events;
  switch (cfg.source.statistics) {
    case Statistics::ChaoticBoson: {
      auto ens_stream = rng::Stream::for_shot(master, shot, rng::Stage::Ensemble);
      const auto ensemble =
          draw_ensemble(cfg.source, cfg.emitters, cfg.geometry.dims(), ens_stream);
      const double lambda = cfg.geometry.effective_wavelength(cfg.source, cfg.constants);
      const auto field = synthesize_field(ensemble, cfg.geometry, lambda,
                                          static_cast<std::uint64_t>(shot),
                                          SynthesisRoute::Transform, cfg.constants);
      auto ev_stream = rng::Stream::for_shot(master, shot, rng::Stage::Events);
      events = sample_boson_events(field, cfg.geometry, cfg.source.mean_count, ev_stream,
                                   cfg.constants);
      break;
    }
    case Statistics::Coherent: {
      auto ev_stream = rng::Stream::for_shot(master, shot, rng::Stage::Events);
      events = sample_coherent_events(cfg.geometry, {}, cfg.source.mean_count, ev_stream,
                                      shot, cfg.constants);
      break;
    }
    case Statistics::Fermion: {
      auto ev_stream = rng::Stream::for_shot(master, shot, rng::Stage::Events);
      events = sample_fermion_events(*kernel, cfg.geometry, ev_stream, shot, cfg.constants);
      break;
    }
  }
  if (cfg.detector_enabled) {
    auto det_stream = rng::Stream::for_shot(master, shot, rng::Stage::Detector);
    events = detect(events, cfg.detector, det_stream);
  }
  for (auto& ev : events) ev.shot_id = shot;
  return events;
}

} // namespace

SimulationResult simulate_events(const RunConfig& cfg, ExecutionPolicy policy) {
  cfg.validate();
  SimulationResult result;
  result.quantized = cfg.detector_enabled;
  result.per_shot.resize(static_cast<std::size_t>(cfg.shots));

  // The fermion kernel is shot-independent: build and decompose it once.
  std::optional<ThermalKernel> kernel;
  if (cfg.source.statistics == Statistics::Fermion && cfg.shots > 0)
    kernel = build_thermal_kernel(cfg.source, cfg.geometry, cfg.constants);
  const ThermalKernel* kptr = kernel ? &*kernel : nullptr;

  if (policy == ExecutionPolicy::Serial) {
    for (long long shot = 0; shot < cfg.shots; ++shot)
      result.per_shot[static_cast<std::size_t>(shot)] = run_shot(cfg, kptr, shot);
    return result;
  }

  std::exception_ptr failure;
  const int nthreads = cfg.threads > 0 ? cfg.threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic) num_threads(nthreads)
  for (long long shot = 0; shot < cfg.shots; ++shot) {
    try {
      result.per_shot[static_cast<std::size_t>(shot)] = run_shot(cfg, kptr, shot);
    } catch (...) {
#pragma omp critical
      {
        if (!failure) failure = std::current_exception();
      }
    }
  }
  if (failure) std::rethrow_exception(failure);
  return result;
}

AnalysisOutput analyze_events(std::vector<EventRecord> events, long long n_shots,
                              const RunConfig& cfg) {
  cfg.validate();
  if (cfg.geometry.mode == Geometry::Mode::TimeOfFlight)
    events = time_of_flight_positions(std::move(events), cfg.geometry, cfg.constants);

  AnalysisOutput out;
  const double w = cfg.resolved_bin_width();
  const int nbins = std::max(2, static_cast<int>(std::floor(cfg.resolved_max_sep() / w)) + 1);
  if (cfg.geometry.dims() == 3) {
    out.spec.axes = {AxisRole::X, AxisRole::Y, AxisRole::Z};
    out.spec.width = {w, w, w};
    out.spec.bins = {nbins, nbins, nbins};
  } else {
    // 1-D correlation along the vertical axis when available, else x.
    const AxisRole axis =
        (cfg.geometry.mode == Geometry::Mode::TimeOfFlight) ? AxisRole::Z : AxisRole::X;
    out.spec.axes = {axis};
    out.spec.width = {w};
    out.spec.bins = {nbins};
  }

  PairHistogram num = pair_histogram_parallel(events, out.spec);
  const long long target =
      static_cast<long long>(std::llround(cfg.norm_pairs_factor * static_cast<double>(num.total_pairs)));
  auto mix_stream = rng::Stream::for_shot(cfg.seed, 0, rng::Stage::Mixing);
  PairHistogram den =
      num.total_pairs > 0
          ? normalization_histogram(events, out.spec, target, mix_stream)
          : PairHistogram{out.spec, PairHistogram::Kind::Mixed,
                          std::vector<long long>(num.counts.size(), 0), 0, num.shot_count};

  if (cfg.geometry.dims() == 3) {
    const double cap = cfg.resolved_radius_cap();
    num = average_horizontal(num, cap);
    den = average_horizontal(den, cap);
  }
  out.correlation.curve = normalize_g2(num, den);
  try {
    out.correlation.fit = fit_correlation(out.correlation.curve);
    out.correlation.has_fit = true;
  } catch (const FitError&) {
    out.correlation.has_fit = false;
  }

  if (n_shots >= 2) {
    out.counting = counting_statistics(events, n_shots, cfg.resolved_subvolume());
  }
  return out;
}

std::vector<PredictRow> predict_table(const RunConfig& cfg) {
  cfg.validate();
  std::vector<PredictRow> rows;
  const auto& src = cfg.source;
  const auto& geo = cfg.geometry;
  rows.push_back({"mean_count", src.mean_count, "expected detections per shot"});

  if (geo.mode == Geometry::Mode::TimeOfFlight) {
    const double v = geo.mean_speed(cfg.constants);
    rows.push_back({"mean_speed", v, "v = g_grav * t"});
    rows.push_back({"de_broglie_wavelength", de_broglie_wavelength(*src.mass, v, cfg.constants.h),
                    "h / (m v)"});
  }
  const double lambda = geo.effective_wavelength(src, cfg.constants);
  const double L = geo.effective_distance(cfg.constants);
  rows.push_back({"effective_wavelength", lambda, ""});
  rows.push_back({"effective_distance", L, ""});
  const double l = geo.predicted_correlation_length(src, cfg.constants);
  rows.push_back({"correlation_length", l, "lambda L / (2 pi s)"});

  rows.push_back({"variance_poisson",
                  einstein_variance(src.mean_count, std::numeric_limits<double>::infinity(),
                                    src.statistics),
                  "independent particles"});
  if (src.mean_count > 0.0)
    rows.push_back({"relative_shot_noise", std::sqrt(src.mean_count) / src.mean_count,
                    "sqrt(mean)/mean"});
  if (src.statistics != Statistics::Fermion || src.mean_count <= 1.0)
    rows.push_back({"variance_single_cell", einstein_variance(src.mean_count, 1.0, src.statistics),
                    "all particles in one phase-space cell"});

  if (cfg.subvolume) {
    // Coherence cells in the counting window: dx = window width,
    // dp = h / (2 pi l) from the speckle angular spread.
    std::vector<double> dx, dp;
    double volume_fraction = 1.0;
    for (int a = 0; a < geo.dims(); ++a) {
      const auto& r = (*cfg.subvolume)[a];
      dx.push_back(r.second - r.first);
      dp.push_back(cfg.constants.h / (2.0 * M_PI * l));
      volume_fraction *= (r.second - r.first) / geo.grid.axes[a].extent;
    }
    const auto cells = phase_space_cells(dx, dp, cfg.constants.h);
    rows.push_back({"g_cells_subvolume", cells.g_cells,
                    cells.subunity ? "below one cell; single-cell statistics apply" : ""});
    const double mean_sub = src.mean_count * volume_fraction;
    rows.push_back({"mean_count_subvolume", mean_sub, ""});
    rows.push_back({"variance_subvolume",
                    einstein_variance(mean_sub, std::max(cells.g_cells, 1.0), src.statistics),
                    "g clamped to >= 1"});
  }

  if (cfg.detector_enabled) {
    const auto roles = geo.axis_roles();
    const std::vector<double> lengths(static_cast<std::size_t>(geo.dims()), l);
    const double v =
        geo.mode == Geometry::Mode::TimeOfFlight ? geo.mean_speed(cfg.constants) : 0.0;
    rows.push_back({"effective_contrast_factor",
                    effective_contrast(lengths, cfg.detector, v, roles),
                    "contrast reduction from finite resolution"});
  }
  return rows;
}

Figure2Output run_figure2(const RunConfig& cfg, ExecutionPolicy policy,
                          const std::string& out_dir) {
  cfg.validate();
  std::filesystem::create_directories(out_dir);
  Figure2Output out;
  const Statistics traces[3] = {Statistics::ChaoticBoson, Statistics::Coherent,
                                Statistics::Fermion};
  // Shared binning so the three curves are directly comparable.
  const double w = cfg.resolved_bin_width();
  const double ms = cfg.resolved_max_sep();
  for (int k = 0; k < 3; ++k) {
    RunConfig trace = cfg;
    trace.source.statistics = traces[k];
    trace.bin_width = w;
    trace.max_sep = ms;
    if (traces[k] == Statistics::Fermion && cfg.fermion_mass) {
      if (!trace.source.mass)
        throw ConfigError("figure2.fermion_mass requires a matter-mode source");
      trace.source.mass = cfg.fermion_mass;
    }
    // Independent random streams per trace.
    trace.seed = rng::mix(cfg.seed, 1000 + static_cast<std::uint64_t>(k));
    const SimulationResult sim = simulate_events(trace, policy);
    const AnalysisOutput analysis =
        analyze_events(sim.flatten(), trace.shots, trace);
    const std::string path =
        out_dir + "/g2_" + to_string(traces[k]) + ".txt";
    write_g2(path, trace, analysis.correlation);
    out.files.push_back(path);
    out.results.push_back(analysis.correlation);
  }
  return out;
}

} // namespace hbt
