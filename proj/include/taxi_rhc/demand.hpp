#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "taxi_rhc/matrix.hpp"
#include "taxi_rhc/trace.hpp"

namespace rhc::demand {

using Vector = std::vector<double>;

struct BootstrapResult {
  Vector mean;
  std::vector<Vector> samples;
};

/// Resamples `daily` d times with replacement, B times, averaging each draw.
/// Sample b uses its own seed derived from (seed, b), so the result does not
/// depend on evaluation order.
BootstrapResult bootstrap_mean(std::span<const Vector> daily, int samples,
                               std::uint64_t seed);

/// Biased (1/B) per-coordinate variance of the bootstrap estimates.
Vector bootstrap_variance(std::span<const Vector> samples);

/// [max(mean - k*sd, 0), mean + k*sd] with sd = sqrt(variance).
std::pair<Vector, Vector> demand_interval(const Vector& mean, const Vector& variance,
                                          double multiplier = 1.0);

/// Row-normalizes trajectory counts; all-zero rows become self-loops.
Matrix estimate_mobility(const Matrix& counts);

/// dp / sum(dp), or uniform when there were no drop-offs.
Vector dropoff_probability(const Vector& dropoffs);

/// Bootstrapped demand model. Slot arguments are 1-based; slot h is stored at h-1.
struct DemandModel {
  static constexpr int kFormatVersion = 1;

  int request_slot_minutes = 60;   // t1
  int mobility_slot_minutes = 60;  // t2
  std::size_t num_regions = 0;
  int bootstrap_samples = 1000;
  std::uint64_t seed = 0;
  double interval_multiplier = 1.0;
  std::size_t num_days = 0;
  std::string day_filter = "all";

  std::vector<Vector> request_mean;
  std::vector<Vector> request_variance;
  std::vector<Vector> request_lower;
  std::vector<Vector> request_upper;
  std::vector<Vector> dropoff_mean;
  std::vector<Matrix> mobility;

  int num_request_slots() const { return 1440 / request_slot_minutes; }
  int num_mobility_slots() const { return 1440 / mobility_slot_minutes; }

  const Vector& mean(int h1) const { return request_mean.at(wrap(h1, num_request_slots())); }
  const Vector& lower(int h1) const { return request_lower.at(wrap(h1, num_request_slots())); }
  const Vector& upper(int h1) const { return request_upper.at(wrap(h1, num_request_slots())); }
  const Vector& dropoffs(int h1) const {
    return dropoff_mean.at(wrap(h1, num_request_slots()));
  }
  const Matrix& transition(int h2) const {
    return mobility.at(wrap(h2, num_mobility_slots()));
  }

  /// Throws std::invalid_argument naming the first violated invariant.
  void validate() const;

  static std::size_t wrap(int slot, int count) {
    const int z = ((slot - 1) % count + count) % count;
    return static_cast<std::size_t>(z);
  }
};

struct EstimateOptions {
  int request_slot_minutes = 60;
  int mobility_slot_minutes = 60;
  int bootstrap_samples = 1000;
  std::uint64_t seed = 0;
  double interval_multiplier = 1.0;
};

/// Builds the model from per-day pickup/dropoff counts and trajectory counts.
DemandModel build_model(const trace::SlotCounts& counts,
                        const trace::TransitionCounts& transitions,
                        const EstimateOptions& options);

enum class DayFilter { kAll, kWeekday, kWeekend };

DayFilter parse_day_filter(const std::string& text);
std::string to_string(DayFilter f);

/// Full pipeline: events, counts, bootstrap. Days outside `filter` are dropped
/// before resampling.
DemandModel estimate_from_trace(const trace::FleetTrace& trace, const geo::RegionGrid& grid,
                                const EstimateOptions& options,
                                const trace::DayClock& clock = {},
                                DayFilter filter = DayFilter::kAll);

/// Versioned JSON document.
void save_model(std::ostream& out, const DemandModel& model);
DemandModel load_model(std::istream& in);

}  // namespace rhc::demand
