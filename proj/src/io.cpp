#include "hbt/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace hbt {

namespace {

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

} // namespace

void write_events(const std::string& path, const RunConfig& cfg,
                  std::span<const std::vector<EventRecord>> per_shot, bool quantized) {
  std::ofstream out(path);
  if (!out) throw IoError("write_events: cannot open " + path);
  bool any_z = false;
  for (const auto& shot : per_shot)
    for (const auto& ev : shot)
      if (ev.has_z) any_z = true;

  out << "# hbtsim events v1\n";
  for (const auto& line : cfg.echo()) out << "# " << line << "\n";
  out << "# quantized = " << (quantized ? "true" : "false") << "\n";
  out << "# columns = shot t x y" << (any_z ? " z" : "") << "\n";
  for (const auto& shot : per_shot) {
    for (const auto& ev : shot) {
      out << ev.shot_id << ' ' << fmt(ev.t) << ' ' << fmt(ev.x) << ' ' << fmt(ev.y);
      if (any_z) out << ' ' << fmt(ev.has_z ? ev.z : 0.0);
      out << '\n';
    }
  }
  if (!out) throw IoError("write_events: write failed for " + path);
}

EventFile read_events(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("read_events: cannot open " + path);
  EventFile file;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::string body = line.substr(1);
      const auto b = body.find_first_not_of(' ');
      if (b != std::string::npos) body = body.substr(b);
      if (body.rfind("hbtsim events", 0) == 0) continue;
      if (body.rfind("quantized = ", 0) == 0) {
        file.quantized = body.substr(12) == "true";
        continue;
      }
      if (body.rfind("columns = ", 0) == 0) {
        file.has_z = body.find(" z") != std::string::npos;
        continue;
      }
      if (body.rfind("run.shots = ", 0) == 0) file.shots = std::stoll(body.substr(12));
      file.header.push_back(body);
      continue;
    }
    std::istringstream ss(line);
    EventRecord ev;
    if (!(ss >> ev.shot_id >> ev.t >> ev.x >> ev.y))
      throw IoError("read_events: malformed event at " + path + ":" + std::to_string(line_no));
    if (file.has_z) {
      if (!(ss >> ev.z))
        throw IoError("read_events: missing z column at " + path + ":" + std::to_string(line_no));
      ev.has_z = true;
    }
    std::string rest;
    if (ss >> rest)
      throw IoError("read_events: trailing fields at " + path + ":" + std::to_string(line_no));
    file.events.push_back(ev);
  }
  return file;
}

void write_g2(const std::string& path, const RunConfig& cfg, const CorrelationResult& result) {
  std::ofstream out(path);
  if (!out) throw IoError("write_g2: cannot open " + path);
  out << "# hbtsim g2 v1\n";
  for (const auto& line : cfg.echo()) out << "# " << line << "\n";
  out << "# num_pairs = " << result.curve.num_pairs << "\n";
  out << "# den_pairs = " << result.curve.den_pairs << "\n";
  if (result.has_fit) {
    out << "# fit.model = 1 + c*exp(-d^2/l^2)\n";
    out << "# fit.contrast = " << fmt(result.fit.contrast) << "\n";
    out << "# fit.length = " << fmt(result.fit.length) << "\n";
    out << "# fit.sigma_contrast = " << fmt(result.fit.sigma_contrast) << "\n";
    out << "# fit.sigma_length = " << fmt(result.fit.sigma_length) << "\n";
    out << "# fit.chi2_per_dof = " << fmt(result.fit.chi2_per_dof) << "\n";
  } else {
    out << "# fit.status = unavailable\n";
  }
  out << "# columns = bin_center g2 sigma valid\n";
  for (std::size_t b = 0; b < result.curve.g2.size(); ++b) {
    out << fmt(result.curve.center[b]) << ' ' << fmt(result.curve.g2[b]) << ' '
        << fmt(result.curve.sigma[b]) << ' ' << int(result.curve.valid[b]) << '\n';
  }
  if (!out) throw IoError("write_g2: write failed for " + path);
}

void write_counting(const std::string& path, const RunConfig& cfg, const CountingStats& stats) {
  std::ofstream out(path);
  if (!out) throw IoError("write_counting: cannot open " + path);
  out << "# hbtsim counting v1\n";
  for (const auto& line : cfg.echo()) out << "# " << line << "\n";
  out << "# diff_standard_error = " << fmt(stats.diff_standard_error) << "\n";
  out << "# columns = subvolume mean variance g_inferred flag\n";
  std::string sv;
  for (std::size_t a = 0; a < stats.subvolume.range.size(); ++a) {
    if (a) sv += ",";
    sv += fmt(stats.subvolume.range[a].first) + ":" + fmt(stats.subvolume.range[a].second);
  }
  out << sv << ' ' << fmt(stats.mean) << ' ' << fmt(stats.variance) << ' '
      << fmt(stats.g_inferred) << ' ' << to_string(stats.flag) << '\n';
  if (!out) throw IoError("write_counting: write failed for " + path);
}

} // namespace hbt
