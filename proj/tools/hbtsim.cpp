// Pipeline runner: predict | simulate | analyze | figure2.
// Exit codes: 0 success, 1 config error, 2 physics-domain error, 3 I/O error,
// 4 success with warnings (e.g. analyzing an empty event list).

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "hbt/chaotic_field.hpp"
#include "hbt/io.hpp"
#include "hbt/pipeline.hpp"
#include "hbt/rng.hpp"
#include "hbt/sampling.hpp"

namespace {

struct CommonOpts {
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_set = false;
  long long shots = -1;
  int threads = -1;
};

hbt::RunConfig load_config(const CommonOpts& opts) {
  hbt::RunConfig cfg = hbt::RunConfig::parse_file(opts.config_path);
  if (opts.seed_set) cfg.seed = opts.seed;
  if (opts.shots >= 0) cfg.shots = opts.shots;
  if (opts.threads >= 0) cfg.threads = opts.threads;
  if (!opts.out_dir.empty()) cfg.out_dir = opts.out_dir;
  cfg.validate();
  return cfg;
}

void add_common(CLI::App* cmd, CommonOpts& opts, bool with_run_flags) {
  cmd->add_option("--config", opts.config_path, "configuration file")->required();
  cmd->add_option("--out", opts.out_dir, "output directory (overrides run.out)");
  if (with_run_flags) {
    cmd->add_option("--seed", opts.seed, "master seed (overrides run.seed)")
        ->each([&](const std::string&) { opts.seed_set = true; });
    cmd->add_option("--shots", opts.shots, "shot count (overrides run.shots)");
    cmd->add_option("--threads", opts.threads,
                    "worker threads; no effect on results (overrides run.threads)");
  }
}

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

int cmd_predict(const CommonOpts& opts) {
  const hbt::RunConfig cfg = load_config(opts);
  const auto rows = hbt::predict_table(cfg);
  std::filesystem::create_directories(cfg.out_dir);
  const std::string path = cfg.out_dir + "/predict.txt";
  std::ofstream out(path);
  if (!out) throw hbt::IoError("predict: cannot open " + path);
  out << "# hbtsim predict v1\n";
  for (const auto& line : cfg.physics_signature()) out << "# " << line << "\n";
  for (const auto& row : rows) {
    const std::string line =
        row.key + " = " + fmt(row.value) + (row.note.empty() ? "" : "   # " + row.note);
    out << line << "\n";
    std::cout << line << "\n";
  }
  if (!out) throw hbt::IoError("predict: write failed for " + path);
  return 0;
}

int cmd_simulate(const CommonOpts& opts, long long dump_fields) {
  const hbt::RunConfig cfg = load_config(opts);
  std::filesystem::create_directories(cfg.out_dir);
  const hbt::SimulationResult sim =
      hbt::simulate_events(cfg, hbt::ExecutionPolicy::Parallel);
  hbt::write_events(cfg.out_dir + "/events.txt", cfg, sim.per_shot, sim.quantized);
  std::cout << "wrote " << sim.total_events() << " events over " << cfg.shots
            << " shots to " << cfg.out_dir << "/events.txt\n";

  // Optional field dumps for the first few shots (chaotic sources only).
  if (dump_fields > 0 && cfg.source.statistics == hbt::Statistics::ChaoticBoson) {
    const double lambda = cfg.geometry.effective_wavelength(cfg.source, cfg.constants);
    for (long long shot = 0; shot < std::min(dump_fields, cfg.shots); ++shot) {
      auto stream = hbt::rng::Stream::for_shot(cfg.seed, shot, hbt::rng::Stage::Ensemble);
      const auto ens = hbt::draw_ensemble(cfg.source, cfg.emitters, cfg.geometry.dims(), stream);
      const auto field = hbt::synthesize_field(ens, cfg.geometry, lambda,
                                               static_cast<std::uint64_t>(shot),
                                               hbt::SynthesisRoute::Transform, cfg.constants);
      hbt::write_field(field, cfg.out_dir + "/field_" + std::to_string(shot) + ".txt");
    }
  }
  return 0;
}

int cmd_analyze(const CommonOpts& opts, const std::string& events_path) {
  const hbt::RunConfig cfg = load_config(opts);
  const hbt::EventFile file = hbt::read_events(events_path);

  // Provenance: the physics sections echoed in the event file must match
  // the supplied configuration.
  const auto expected = cfg.physics_signature();
  for (const auto& line : expected) {
    if (std::find(file.header.begin(), file.header.end(), line) == file.header.end())
      throw hbt::ConfigError("analyze: event file header does not match config ('" + line +
                             "' missing); was the file produced with this configuration?");
  }
  const long long n_shots = std::max<long long>(file.shots, 2);
  const hbt::AnalysisOutput out = hbt::analyze_events(file.events, n_shots, cfg);
  std::filesystem::create_directories(cfg.out_dir);
  hbt::write_g2(cfg.out_dir + "/g2.txt", cfg, out.correlation);
  if (out.counting) hbt::write_counting(cfg.out_dir + "/counting.txt", cfg, *out.counting);
  if (out.correlation.has_fit) {
    std::cout << "fit: contrast = " << fmt(out.correlation.fit.contrast)
              << " +- " << fmt(out.correlation.fit.sigma_contrast)
              << ", length = " << fmt(out.correlation.fit.length) << " +- "
              << fmt(out.correlation.fit.sigma_length) << "\n";
  }
  if (file.events.empty()) {
    std::cerr << "warning: empty event list; outputs written with no valid bins\n";
    return 4;
  }
  return 0;
}

int cmd_figure2(const CommonOpts& opts) {
  const hbt::RunConfig cfg = load_config(opts);
  const auto out = hbt::run_figure2(cfg, hbt::ExecutionPolicy::Parallel, cfg.out_dir);
  for (std::size_t k = 0; k < out.files.size(); ++k) {
    std::cout << out.files[k];
    if (out.results[k].has_fit)
      std::cout << "  contrast = " << fmt(out.results[k].fit.contrast)
                << "  length = " << fmt(out.results[k].fit.length);
    std::cout << "\n";
  }
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monte Carlo intensity-interferometry toolkit"};
  app.require_subcommand(1);

  CommonOpts predict_opts, simulate_opts, analyze_opts, figure2_opts;
  long long dump_fields = 0;
  std::string events_path;

  CLI::App* predict = app.add_subcommand("predict", "closed-form predictions, no sampling");
  add_common(predict, predict_opts, false);

  CLI::App* simulate = app.add_subcommand("simulate", "generate an event-list file");
  add_common(simulate, simulate_opts, true);
  simulate->add_option("--dump-fields", dump_fields,
                       "also write the first N speckle fields as grid files");

  CLI::App* analyze = app.add_subcommand("analyze", "event list -> g2 curve + counting stats");
  analyze->add_option("events", events_path, "event-list file")->required();
  add_common(analyze, analyze_opts, false);

  CLI::App* figure2 = app.add_subcommand("figure2",
                                         "three-trace scenario: boson, coherent, fermion");
  add_common(figure2, figure2_opts, true);

  try {
    app.parse(argc, argv);
    if (predict->parsed()) return cmd_predict(predict_opts);
    if (simulate->parsed()) return cmd_simulate(simulate_opts, dump_fields);
    if (analyze->parsed()) return cmd_analyze(analyze_opts, events_path);
    if (figure2->parsed()) return cmd_figure2(figure2_opts);
    return 1;
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  } catch (const hbt::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const hbt::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const hbt::DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
