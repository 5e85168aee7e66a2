#include "taxi_rhc/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

namespace rhc::config {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> parts;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ',')) parts.push_back(trim(item));
  return parts;
}

template <typename T>
T parse_as(const std::string& key, const std::string& text) {
  T value{};
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || text.empty())
    throw ConfigError(key, "cannot parse '" + text + "'");
  if constexpr (std::is_floating_point_v<T>) {
    if (!std::isfinite(value)) throw ConfigError(key, "value must be finite");
  }
  return value;
}

template <typename T>
std::vector<T> parse_list(const std::string& key, const std::string& text) {
  std::vector<T> values;
  for (const auto& part : split_list(text)) values.push_back(parse_as<T>(key, part));
  if (values.empty()) throw ConfigError(key, "list must not be empty");
  return values;
}

template <typename T>
std::string show(T value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

template <typename T>
std::string show_list(const std::vector<T>& values) {
  std::string s;
  for (std::size_t i = 0; i < values.size(); ++i) s += (i ? "," : "") + show(values[i]);
  return s;
}

struct Key {
  std::string name;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

template <typename T>
Key number_key(std::string name, T RunConfig::*field) {
  return {name,
          [name, field](RunConfig& c, const std::string& v) { c.*field = parse_as<T>(name, v); },
          [field](const RunConfig& c) { return show(c.*field); }};
}

template <typename T>
Key list_key(std::string name, std::vector<T> RunConfig::*field) {
  return {name,
          [name, field](RunConfig& c, const std::string& v) {
            c.*field = parse_list<T>(name, v);
          },
          [field](const RunConfig& c) { return show_list(c.*field); }};
}

Key path_key(std::string name, std::filesystem::path RunConfig::*field) {
  return {name, [field](RunConfig& c, const std::string& v) { c.*field = v; },
          [field](const RunConfig& c) { return (c.*field).string(); }};
}

const std::vector<Key>& keys() {
  static const std::vector<Key> table = [] {
    std::vector<Key> k;
    k.push_back(number_key("grid.min_lat", &RunConfig::min_lat));
    k.push_back(number_key("grid.max_lat", &RunConfig::max_lat));
    k.push_back(number_key("grid.min_lon", &RunConfig::min_lon));
    k.push_back(number_key("grid.max_lon", &RunConfig::max_lon));
    k.push_back(number_key("grid.rows", &RunConfig::rows));
    k.push_back(number_key("grid.cols", &RunConfig::cols));
    k.push_back(number_key("clock.t1", &RunConfig::t1));
    k.push_back(number_key("clock.t2", &RunConfig::t2));
    k.push_back(number_key("clock.utc_offset_seconds", &RunConfig::utc_offset_seconds));
    k.push_back(number_key("dispatch.slot", &RunConfig::dispatch_slot));
    k.push_back(number_key("rhc.horizon", &RunConfig::horizon));
    k.push_back(list_key("rhc.beta", &RunConfig::beta));
    k.push_back(list_key("rhc.alpha", &RunConfig::alpha));
    k.push_back({"rhc.mode",
                 [](RunConfig& c, const std::string& v) {
                   try {
                     c.mode = engine::parse_mode(v);
                   } catch (const std::invalid_argument& e) {
                     throw ConfigError("rhc.mode", e.what());
                   }
                 },
                 [](const RunConfig& c) { return engine::to_string(c.mode); }});
    k.push_back(number_key("lp.feasibility_tol", &RunConfig::feasibility_tol));
    k.push_back(number_key("lp.optimality_tol", &RunConfig::optimality_tol));
    k.push_back(number_key("lp.max_iters", &RunConfig::max_iters));
    k.push_back(number_key("demand.bootstrap", &RunConfig::bootstrap));
    k.push_back(number_key("demand.interval_multiplier", &RunConfig::interval_multiplier));
    k.push_back({"demand.days",
                 [](RunConfig& c, const std::string& v) {
                   try {
                     c.days = demand::parse_day_filter(v);
                   } catch (const std::invalid_argument& e) {
                     throw ConfigError("demand.days", e.what());
                   }
                 },
                 [](const RunConfig& c) { return demand::to_string(c.days); }});
    k.push_back(number_key("demand.history_days", &RunConfig::history_days));
    k.push_back(number_key("demand.history_bootstrap", &RunConfig::history_bootstrap));
    k.push_back(number_key("fleet.size", &RunConfig::fleet_size));
    k.push_back(number_key("fleet.miles_per_degree", &RunConfig::miles_per_degree));
    k.push_back({"scenario.source",
                 [](RunConfig& c, const std::string& v) {
                   if (v != "synthetic" && v != "trace")
                     throw ConfigError("scenario.source",
                                       "must be synthetic or trace, got '" + v + "'");
                   c.scenario_source = v;
                 },
                 [](const RunConfig& c) { return c.scenario_source; }});
    k.push_back(number_key("scenario.total_rate", &RunConfig::total_rate));
    k.push_back(list_key("scenario.hot_regions", &RunConfig::hot_regions));
    k.push_back(number_key("scenario.hot_share", &RunConfig::hot_share));
    k.push_back(number_key("scenario.days", &RunConfig::scenario_days));
    k.push_back(number_key("scenario.trip_ticks", &RunConfig::trip_ticks));
    k.push_back(number_key("report.baseline_beta", &RunConfig::report_baseline_beta));
    k.push_back(number_key("seed", &RunConfig::seed));
    k.push_back(path_key("trace.dir", &RunConfig::trace_dir));
    k.push_back(path_key("model.path", &RunConfig::model_path));
    k.push_back(path_key("fleet.snapshot", &RunConfig::fleet_path));
    k.push_back(path_key("out", &RunConfig::out));
    return k;
  }();
  return table;
}

const Key& find_key(const std::string& name) {
  for (const auto& k : keys())
    if (k.name == name) return k;
  throw ConfigError(name, "unknown key");
}

void require(bool ok, const std::string& key, const std::string& message) {
  if (!ok) throw ConfigError(key, message);
}

}  // namespace

const std::vector<std::string>& known_keys() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& k : keys()) v.push_back(k.name);
    return v;
  }();
  return names;
}

std::string resolve_alias(const std::string& name) {
  static const std::map<std::string, std::string> aliases = {
      {"beta", "rhc.beta"},   {"alpha", "rhc.alpha"}, {"T", "rhc.horizon"},
      {"mode", "rhc.mode"},   {"t1", "clock.t1"},     {"t2", "clock.t2"},
      {"fleet", "fleet.size"}, {"rate", "scenario.total_rate"}};
  auto it = aliases.find(name);
  if (it != aliases.end()) return it->second;
  find_key(name);
  return name;
}

void RunConfig::set(const std::string& key, const std::string& value) {
  find_key(key).set(*this, trim(value));
}

void RunConfig::validate() const {
  require(rows >= 1, "grid.rows", "must be >= 1");
  require(cols >= 1, "grid.cols", "must be >= 1");
  require(min_lat < max_lat, "grid.max_lat", "must exceed grid.min_lat");
  require(min_lon < max_lon, "grid.max_lon", "must exceed grid.min_lon");
  try {
    grid();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("grid", e.what());
  }
  require(t1 >= 1 && 1440 % t1 == 0, "clock.t1", "must divide 1440");
  require(t2 >= 1 && t1 % t2 == 0, "clock.t2", "must divide clock.t1 = " + show(t1));
  require(dispatch_slot >= 1 && dispatch_slot <= 1440 / t2, "dispatch.slot",
          "must lie in 1.." + show(1440 / t2));
  require(horizon >= 1, "rhc.horizon", "must be >= 1");
  for (double b : beta) require(b >= 0.0, "rhc.beta", "entries must be >= 0");
  for (double a : alpha) require(a > 0.0, "rhc.alpha", "entries must be > 0");
  require(feasibility_tol > 0.0, "lp.feasibility_tol", "must be > 0");
  require(optimality_tol > 0.0, "lp.optimality_tol", "must be > 0");
  require(max_iters > 0, "lp.max_iters", "must be > 0");
  require(bootstrap >= 1, "demand.bootstrap", "must be >= 1");
  require(interval_multiplier >= 0.0, "demand.interval_multiplier", "must be >= 0");
  require(history_days >= 1, "demand.history_days", "must be >= 1");
  require(history_bootstrap >= 1, "demand.history_bootstrap", "must be >= 1");
  require(fleet_size >= 1, "fleet.size", "must be >= 1");
  require(miles_per_degree > 0.0, "fleet.miles_per_degree", "must be > 0");
  require(total_rate >= 0.0, "scenario.total_rate", "must be >= 0");
  require(hot_share >= 0.0 && hot_share <= 1.0, "scenario.hot_share", "must lie in [0, 1]");
  for (auto r : hot_regions)
    require(r >= 1 && r <= static_cast<std::size_t>(rows) * cols, "scenario.hot_regions",
            "region " + show(r) + " outside 1.." + show(rows * cols));
  require(scenario_days >= 1, "scenario.days", "must be >= 1");
  require(trip_ticks >= 1, "scenario.trip_ticks", "must be >= 1");
  require(report_baseline_beta >= 0.0, "report.baseline_beta", "must be >= 0");
  try {
    engine().validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("rhc", e.what());
  }
}

geo::RegionGrid RunConfig::grid() const {
  return geo::RegionGrid(min_lat, max_lat, min_lon, max_lon, rows, cols);
}

engine::RhcConfig RunConfig::engine() const {
  engine::RhcConfig c;
  c.t1 = t1;
  c.t2 = t2;
  c.horizon = horizon;
  c.beta = beta;
  c.alpha = alpha;
  c.mode = mode;
  c.solver.feasibility_tol = feasibility_tol;
  c.solver.optimality_tol = optimality_tol;
  c.solver.max_iters = max_iters;
  return c;
}

demand::EstimateOptions RunConfig::estimate_options() const {
  demand::EstimateOptions o;
  o.request_slot_minutes = t1;
  o.mobility_slot_minutes = t2;
  o.bootstrap_samples = bootstrap;
  o.interval_multiplier = interval_multiplier;
  return o;
}

trace::DayClock RunConfig::clock() const {
  trace::DayClock c;
  c.utc_offset_seconds = utc_offset_seconds;
  return c;
}

void RunConfig::write(std::ostream& out, bool with_out) const {
  for (const auto& k : keys())
    if (with_out || k.name != "out") out << k.name << " = " << k.get(*this) << '\n';
}

void apply(RunConfig& cfg, std::istream& in, const std::string& source) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = source + ":" + std::to_string(line_no);
    if (eq == std::string::npos)
      throw ConfigError(where, "expected 'key = value', got '" + line + "'");
    const std::string key = trim(line.substr(0, eq));
    try {
      cfg.set(key, line.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError(e.key(), std::string(e.what()).substr(e.key().size() + 2) + " (" +
                                     where + ")");
    }
  }
}

RunConfig load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot read " + path.string());
  RunConfig cfg;
  apply(cfg, in, path.string());
  return cfg;
}

}  // namespace rhc::config
