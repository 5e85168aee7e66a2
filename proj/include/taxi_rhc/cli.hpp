#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "taxi_rhc/config.hpp"
#include "taxi_rhc/geo.hpp"

namespace rhc::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kDataError = 2, kInfeasible = 3 };

/// Bad input file contents or a missing input.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parses `args` (without the program name), runs the command and maps
/// failures to exit codes. Messages go to `err`, tables to `out`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Fleet snapshot: `taxi_id,lat,lon,occupied` rows after a versioned header.
/// Row order fixes each taxi's row in the station table.
struct FleetFile {
  std::vector<std::string> ids;
  std::vector<geo::GeoPoint> positions;
  std::vector<bool> occupied;
};
FleetFile read_fleet(std::istream& in, const geo::RegionGrid& grid, const std::string& source);
void write_fleet(std::ostream& out, const FleetFile& fleet, const geo::RegionGrid& grid);

/// s/d error + beta * idle distance.
double total_cost(double mismatch_error, double idle_distance, double beta);

/// One metrics file reduced to its means.
struct MetricsSummary {
  std::string source;
  std::string arm;
  double beta = 0.0;       // as recorded in the file
  double cost_beta = 0.0;  // weight used for the total cost
  std::size_t slots = 0;
  std::size_t counted = 0;
  double mismatch_error = 0.0;  // mean over counted slots
  double idle_distance = 0.0;   // mean idle miles per slot
  double cost = 0.0;
};

/// Baseline and replay arms are costed with `baseline_beta`, dispatch arms
/// with their own beta.
MetricsSummary summarize_metrics(std::istream& in, const std::string& source,
                                 double baseline_beta);

/// Means over files sharing (arm, beta), in order of first appearance.
std::vector<MetricsSummary> group_summaries(const std::vector<MetricsSummary>& files);

void write_report(std::ostream& out, const std::vector<MetricsSummary>& rows);
void write_report_csv(std::ostream& out, const std::vector<MetricsSummary>& rows);

int cmd_estimate(const config::RunConfig& cfg, std::ostream& out);
int cmd_dispatch(const config::RunConfig& cfg, std::ostream& out, std::ostream& err);
/// `sweep` is `key=v1,v2,...` or empty.
int cmd_simulate(const config::RunConfig& cfg, const std::string& sweep, std::ostream& out);
int cmd_report(const std::vector<std::filesystem::path>& inputs, const config::RunConfig& cfg,
               const std::filesystem::path* out_dir, std::ostream& out);

}  // namespace rhc::cli
