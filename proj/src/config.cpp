#include "hbt/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace hbt {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("config: cannot parse number for " + key + ": '" + v + "'");
  }
}

long long parse_int(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const long long x = std::stoll(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("config: cannot parse integer for " + key + ": '" + v + "'");
  }
}

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const std::uint64_t x = std::stoull(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("config: cannot parse seed for " + key + ": '" + v + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("config: cannot parse boolean for " + key + ": '" + v + "'");
}

Statistics parse_statistics(const std::string& v) {
  if (v == "chaotic_boson") return Statistics::ChaoticBoson;
  if (v == "coherent") return Statistics::Coherent;
  if (v == "fermion") return Statistics::Fermion;
  throw ConfigError("config: source.statistics must be chaotic_boson|coherent|fermion, got '" + v + "'");
}

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

int axis_of_role(const Geometry& g, char role_char) {
  const AxisRole want = role_char == 'x'   ? AxisRole::X
                        : role_char == 'y' ? AxisRole::Y
                                           : AxisRole::Z;
  const auto roles = g.axis_roles();
  for (std::size_t a = 0; a < roles.size(); ++a)
    if (roles[a] == want) return static_cast<int>(a);
  return -1;
}

char role_char(AxisRole r) {
  switch (r) {
    case AxisRole::X: return 'x';
    case AxisRole::Y: return 'y';
    case AxisRole::Z: return 'z';
  }
  return '?';
}

std::vector<std::pair<double, double>> parse_subvolume(const std::string& v) {
  std::vector<std::pair<double, double>> ranges;
  std::istringstream ss(v);
  std::string part;
  while (std::getline(ss, part, ',')) {
    part = trim(part);
    const auto colon = part.find(':');
    if (colon == std::string::npos)
      throw ConfigError("config: subvolume axis must look like lo:hi, got '" + part + "'");
    const double lo = parse_double("estimator.subvolume", trim(part.substr(0, colon)));
    const double hi = parse_double("estimator.subvolume", trim(part.substr(colon + 1)));
    if (!(lo < hi)) throw ConfigError("config: subvolume needs lo < hi per axis");
    ranges.emplace_back(lo, hi);
  }
  if (ranges.empty()) throw ConfigError("config: empty subvolume");
  return ranges;
}

} // namespace

RunConfig RunConfig::parse_string(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config: line " + std::to_string(line_no) + " is not 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw ConfigError("config: empty key or value at line " + std::to_string(line_no));
    if (kv.count(key)) throw ConfigError("config: duplicate key " + key);
    kv[key] = value;
  }

  RunConfig cfg;

  auto take = [&](const std::string& key) -> std::optional<std::string> {
    auto it = kv.find(key);
    if (it == kv.end()) return std::nullopt;
    std::string v = it->second;
    kv.erase(it);
    return v;
  };

  if (auto v = take("constants.h")) cfg.constants.h = parse_double("constants.h", *v);
  if (auto v = take("constants.g_grav")) cfg.constants.g_grav = parse_double("constants.g_grav", *v);

  if (auto v = take("source.statistics")) cfg.source.statistics = parse_statistics(*v);
  if (auto v = take("source.size")) cfg.source.source_rms = parse_double("source.size", *v);
  if (auto v = take("source.mass")) cfg.source.mass = parse_double("source.mass", *v);
  if (auto v = take("source.wavelength")) cfg.source.wavelength = parse_double("source.wavelength", *v);
  if (auto v = take("source.mean_count")) cfg.source.mean_count = parse_double("source.mean_count", *v);
  if (auto v = take("source.temperature_scale"))
    cfg.source.temperature_scale = parse_double("source.temperature_scale", *v);

  int dims = 1;
  if (auto v = take("geometry.dims")) dims = static_cast<int>(parse_int("geometry.dims", *v));
  if (dims < 1 || dims > 3) throw ConfigError("config: geometry.dims must be 1, 2 or 3");
  if (auto v = take("geometry.mode")) {
    if (*v == "optical") cfg.geometry.mode = Geometry::Mode::Optical;
    else if (*v == "time_of_flight") cfg.geometry.mode = Geometry::Mode::TimeOfFlight;
    else throw ConfigError("config: geometry.mode must be optical|time_of_flight, got '" + *v + "'");
  }
  if (auto v = take("geometry.distance")) cfg.geometry.distance = parse_double("geometry.distance", *v);
  if (auto v = take("geometry.fall_time")) cfg.geometry.fall_time = parse_double("geometry.fall_time", *v);
  if (auto v = take("geometry.fall_height")) cfg.geometry.fall_height = parse_double("geometry.fall_height", *v);

  cfg.geometry.grid.axes.assign(dims, GridAxis{});
  if (auto v = take("geometry.extent")) {
    const double e = parse_double("geometry.extent", *v);
    for (auto& ax : cfg.geometry.grid.axes) ax.extent = e;
  }
  if (auto v = take("geometry.cells")) {
    const int c = static_cast<int>(parse_int("geometry.cells", *v));
    for (auto& ax : cfg.geometry.grid.axes) ax.cells = c;
  }
  for (const char rc : {'x', 'y', 'z'}) {
    const std::string ek = std::string("geometry.extent_") + rc;
    const std::string ck = std::string("geometry.cells_") + rc;
    if (auto v = take(ek)) {
      const int a = axis_of_role(cfg.geometry, rc);
      if (a < 0) throw ConfigError("config: " + ek + " names an axis absent at dims=" + std::to_string(dims));
      cfg.geometry.grid.axes[a].extent = parse_double(ek, *v);
    }
    if (auto v = take(ck)) {
      const int a = axis_of_role(cfg.geometry, rc);
      if (a < 0) throw ConfigError("config: " + ck + " names an axis absent at dims=" + std::to_string(dims));
      cfg.geometry.grid.axes[a].cells = static_cast<int>(parse_int(ck, *v));
    }
  }

  if (auto v = take("detector.enabled")) cfg.detector_enabled = parse_bool("detector.enabled", *v);
  if (auto v = take("detector.diameter")) cfg.detector.diameter = parse_double("detector.diameter", *v);
  if (auto v = take("detector.spatial_resolution"))
    cfg.detector.spatial_resolution = parse_double("detector.spatial_resolution", *v);
  if (auto v = take("detector.time_resolution"))
    cfg.detector.time_resolution = parse_double("detector.time_resolution", *v);
  if (auto v = take("detector.efficiency")) cfg.detector.efficiency = parse_double("detector.efficiency", *v);

  if (auto v = take("estimator.bin_width")) cfg.bin_width = parse_double("estimator.bin_width", *v);
  if (auto v = take("estimator.max_sep")) cfg.max_sep = parse_double("estimator.max_sep", *v);
  if (auto v = take("estimator.norm_pairs_factor"))
    cfg.norm_pairs_factor = parse_double("estimator.norm_pairs_factor", *v);
  if (auto v = take("estimator.radius_cap")) cfg.radius_cap = parse_double("estimator.radius_cap", *v);
  if (auto v = take("estimator.subvolume")) cfg.subvolume = parse_subvolume(*v);

  if (auto v = take("run.seed")) cfg.seed = parse_u64("run.seed", *v);
  if (auto v = take("run.shots")) cfg.shots = parse_int("run.shots", *v);
  if (auto v = take("run.emitters")) cfg.emitters = static_cast<int>(parse_int("run.emitters", *v));
  if (auto v = take("run.threads")) cfg.threads = static_cast<int>(parse_int("run.threads", *v));
  if (auto v = take("run.out")) cfg.out_dir = *v;

  if (auto v = take("figure2.fermion_mass")) cfg.fermion_mass = parse_double("figure2.fermion_mass", *v);

  if (!kv.empty()) {
    std::string msg = "config: unknown key(s):";
    for (const auto& [k, v] : kv) msg += " " + k;
    throw ConfigError(msg);
  }
  return cfg;
}

RunConfig RunConfig::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("config: cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_string(ss.str());
}

void RunConfig::validate() const {
  constants.validate();
  source.validate();
  geometry.validate();
  if (detector_enabled) detector.validate();
  if (geometry.mode == Geometry::Mode::Optical && source.mass)
    throw ConfigError("config: optical geometry expects source.wavelength, not mass");
  if (geometry.mode == Geometry::Mode::TimeOfFlight && source.wavelength)
    throw ConfigError("config: time-of-flight geometry expects source.mass, not wavelength");
  if (bin_width < 0.0 || max_sep < 0.0 || radius_cap < 0.0)
    throw ConfigError("config: estimator lengths must be >= 0");
  if (!(norm_pairs_factor > 0.0))
    throw ConfigError("config: estimator.norm_pairs_factor must be > 0");
  if (shots < 0) throw ConfigError("config: run.shots must be >= 0");
  if (emitters < 1) throw ConfigError("config: run.emitters must be >= 1");
  if (threads < 0) throw ConfigError("config: run.threads must be >= 0");
  if (subvolume && static_cast<int>(subvolume->size()) != geometry.dims())
    throw ConfigError("config: estimator.subvolume needs one lo:hi range per grid axis");
  if (fermion_mass && !(*fermion_mass > 0.0))
    throw ConfigError("config: figure2.fermion_mass must be > 0");
}

double RunConfig::resolved_bin_width() const {
  if (bin_width > 0.0) return bin_width;
  return geometry.predicted_correlation_length(source, constants) / 5.0;
}

double RunConfig::resolved_max_sep() const {
  if (max_sep > 0.0) return max_sep;
  return 20.0 * geometry.predicted_correlation_length(source, constants);
}

double RunConfig::resolved_radius_cap() const {
  if (radius_cap > 0.0) return radius_cap;
  return resolved_bin_width();
}

Subvolume RunConfig::resolved_subvolume() const {
  Subvolume sv;
  sv.roles = geometry.axis_roles();
  if (subvolume) {
    sv.range = *subvolume;
  } else {
    // Default: everything. Quantization can push coordinates slightly past
    // the grid edge, so the window is twice the extent.
    for (int a = 0; a < geometry.dims(); ++a) {
      const double e = geometry.grid.axes[a].extent;
      sv.range.emplace_back(-e, e);
    }
  }
  return sv;
}

std::vector<std::string> RunConfig::physics_signature() const {
  std::vector<std::string> out;
  out.push_back("constants.h = " + fmt(constants.h));
  out.push_back("constants.g_grav = " + fmt(constants.g_grav));
  out.push_back(std::string("source.statistics = ") + to_string(source.statistics));
  out.push_back("source.size = " + fmt(source.source_rms));
  if (source.mass) out.push_back("source.mass = " + fmt(*source.mass));
  if (source.wavelength) out.push_back("source.wavelength = " + fmt(*source.wavelength));
  out.push_back("source.mean_count = " + fmt(source.mean_count));
  if (source.temperature_scale)
    out.push_back("source.temperature_scale = " + fmt(*source.temperature_scale));
  out.push_back(std::string("geometry.mode = ") +
                (geometry.mode == Geometry::Mode::Optical ? "optical" : "time_of_flight"));
  out.push_back("geometry.dims = " + std::to_string(geometry.dims()));
  if (geometry.mode == Geometry::Mode::Optical) {
    out.push_back("geometry.distance = " + fmt(geometry.distance));
  } else {
    out.push_back("geometry.fall_time = " + fmt(geometry.fall_time));
    out.push_back("geometry.fall_height = " + fmt(geometry.fall_height));
  }
  const auto roles = geometry.axis_roles();
  for (int a = 0; a < geometry.dims(); ++a) {
    const std::string suffix(1, role_char(roles[a]));
    out.push_back("geometry.extent_" + suffix + " = " + fmt(geometry.grid.axes[a].extent));
    out.push_back("geometry.cells_" + suffix + " = " + std::to_string(geometry.grid.axes[a].cells));
  }
  out.push_back(std::string("detector.enabled = ") + (detector_enabled ? "true" : "false"));
  if (detector_enabled) {
    out.push_back("detector.diameter = " + fmt(detector.diameter));
    out.push_back("detector.spatial_resolution = " + fmt(detector.spatial_resolution));
    out.push_back("detector.time_resolution = " + fmt(detector.time_resolution));
    out.push_back("detector.efficiency = " + fmt(detector.efficiency));
  }
  return out;
}

std::vector<std::string> RunConfig::echo() const {
  std::vector<std::string> out = physics_signature();
  out.push_back("estimator.bin_width = " + fmt(resolved_bin_width()));
  out.push_back("estimator.max_sep = " + fmt(resolved_max_sep()));
  out.push_back("estimator.norm_pairs_factor = " + fmt(norm_pairs_factor));
  if (geometry.dims() == 3) out.push_back("estimator.radius_cap = " + fmt(resolved_radius_cap()));
  if (subvolume) {
    std::string s = "estimator.subvolume = ";
    for (std::size_t a = 0; a < subvolume->size(); ++a) {
      if (a) s += ",";
      s += fmt((*subvolume)[a].first) + ":" + fmt((*subvolume)[a].second);
    }
    out.push_back(s);
  }
  out.push_back("run.seed = " + std::to_string(seed));
  out.push_back("run.shots = " + std::to_string(shots));
  out.push_back("run.emitters = " + std::to_string(emitters));
  return out;
}

} // namespace hbt
