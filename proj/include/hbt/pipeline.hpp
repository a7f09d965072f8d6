#pragma once
#include <optional>
#include <string>
#include <vector>

#include "hbt/config.hpp"
#include "hbt/estimators.hpp"
#include "hbt/types.hpp"

namespace hbt {

/// Serial is the reference implementation; Parallel distributes shots over
/// OpenMP threads. Both produce identical events: every shot is a pure
/// function of (seed, shot_id), and results are stored by shot index.
enum class ExecutionPolicy { Serial, Parallel };

struct SimulationResult {
  std::vector<std::vector<EventRecord>> per_shot;
  bool quantized = false;

  std::vector<EventRecord> flatten() const;
  long long total_events() const;
};

/// Run `cfg.shots` shots of the configured source through sampling and the
/// optional detector stage.
SimulationResult simulate_events(const RunConfig& cfg, ExecutionPolicy policy);

struct AnalysisOutput {
  CorrelationResult correlation;
  std::optional<CountingStats> counting;
  HistogramSpec spec;
};

/// Estimator pipeline: vertical positions (time-of-flight), same-shot pair
/// histogram, mixed-pair normalization, g2 with fit, counting statistics.
AnalysisOutput analyze_events(std::vector<EventRecord> events, long long n_shots,
                              const RunConfig& cfg);

/// Closed-form prediction table; consumes no randomness.
struct PredictRow {
  std::string key;
  double value;
  std::string note;
};

std::vector<PredictRow> predict_table(const RunConfig& cfg);

/// The three-trace scenario: chaotic-boson, coherent and fermion runs with
/// shared geometry, detector and binning, written as aligned g2 tables.
struct Figure2Output {
  std::vector<std::string> files; // boson, coherent, fermion
  std::vector<CorrelationResult> results;
};

Figure2Output run_figure2(const RunConfig& cfg, ExecutionPolicy policy,
                          const std::string& out_dir);

} // namespace hbt
