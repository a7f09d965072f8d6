#pragma once
#include <span>
#include <string>
#include <vector>

#include "hbt/config.hpp"
#include "hbt/estimators.hpp"
#include "hbt/types.hpp"

namespace hbt {

/// Event-list interchange file: '#' header lines echoing the configuration
/// plus "quantized" and "columns", then one event per line
/// "shot_id t x y [z]". Doubles are written with 17 significant digits so
/// files round-trip exactly.
void write_events(const std::string& path, const RunConfig& cfg,
                  std::span<const std::vector<EventRecord>> per_shot, bool quantized);

struct EventFile {
  std::vector<std::string> header; // raw "key = value" lines, in file order
  bool quantized = false;
  bool has_z = false;
  long long shots = 0;
  std::vector<EventRecord> events;
};

EventFile read_events(const std::string& path);

/// g2 table: header (config echo + fit results), then
/// "bin_center g2 sigma valid" rows.
void write_g2(const std::string& path, const RunConfig& cfg, const CorrelationResult& result);

/// Counting-statistics table: header plus one
/// "subvolume mean variance g_inferred flag" row.
void write_counting(const std::string& path, const RunConfig& cfg, const CountingStats& stats);

} // namespace hbt
