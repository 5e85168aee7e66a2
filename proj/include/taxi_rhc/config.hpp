#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "taxi_rhc/demand.hpp"
#include "taxi_rhc/geo.hpp"
#include "taxi_rhc/rhc.hpp"
#include "taxi_rhc/trace.hpp"

namespace rhc::config {

/// Invalid or unknown configuration value; `key()` is the dotted key path.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, const std::string& message)
      : std::runtime_error(key + ": " + message), key_(std::move(key)) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

/// Everything a command needs. Files are flat `key = value` lines; `#` starts
/// a comment. Lists are comma separated. Regions in lists are 1-based.
struct RunConfig {
  // grid
  double min_lat = 37.70, max_lat = 37.80;
  double min_lon = -122.50, max_lon = -122.40;
  int rows = 3, cols = 3;

  // clocks and horizon
  int t1 = 60;
  int t2 = 60;
  std::int64_t utc_offset_seconds = 0;
  int dispatch_slot = 1;  // h2 used by the one-shot dispatch
  std::size_t horizon = 2;
  std::vector<double> beta{0.5};
  std::vector<double> alpha{0.1};  // degrees
  engine::Mode mode = engine::Mode::kNominal;

  double feasibility_tol = 1e-9;
  double optimality_tol = 1e-9;
  long max_iters = 200000;

  // demand estimation
  int bootstrap = 1000;
  double interval_multiplier = 1.0;
  demand::DayFilter days = demand::DayFilter::kAll;
  int history_days = 18;
  int history_bootstrap = 200;

  // fleet
  std::size_t fleet_size = 30;
  double miles_per_degree = geo::kMilesPerDegree;

  // simulation scenario
  std::string scenario_source = "synthetic";  // synthetic | trace
  double total_rate = 20.0;                   // requests per hour, whole city
  std::vector<std::size_t> hot_regions{3, 7};
  double hot_share = 0.8;
  int scenario_days = 1;
  int trip_ticks = 1;

  double report_baseline_beta = 10.0;

  std::uint64_t seed = 1;
  std::filesystem::path trace_dir;
  std::filesystem::path model_path;
  std::filesystem::path fleet_path;
  std::filesystem::path out = "out";

  /// Sets one key from its text form; throws ConfigError naming the key.
  void set(const std::string& key, const std::string& value);

  /// Cross-key checks and the module invariants, reported by key path.
  void validate() const;

  geo::RegionGrid grid() const;
  engine::RhcConfig engine() const;
  demand::EstimateOptions estimate_options() const;
  trace::DayClock clock() const;

  /// Canonical `key = value` dump, one key per line in a fixed order; reading
  /// it back yields the same configuration. Run directories leave `out` out so
  /// identical runs produce identical dumps wherever they are written.
  void write(std::ostream& out, bool with_out = true) const;
};

/// Every key `set` accepts, in dump order.
const std::vector<std::string>& known_keys();

/// Short names accepted by sweeps (`beta`, `T`, `t2`, ...) mapped to key paths;
/// full key paths pass through unchanged.
std::string resolve_alias(const std::string& name);

/// Applies `key = value` lines from a stream. `source` prefixes error messages.
void apply(RunConfig& cfg, std::istream& in, const std::string& source);

RunConfig load(const std::filesystem::path& path);

}  // namespace rhc::config
