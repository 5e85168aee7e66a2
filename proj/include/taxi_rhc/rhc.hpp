#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "taxi_rhc/demand.hpp"
#include "taxi_rhc/dispatch.hpp"
#include "taxi_rhc/geo.hpp"
#include "taxi_rhc/lp.hpp"

namespace rhc::engine {

using Vector = std::vector<double>;

enum class Mode { kNominal, kRobust };
Mode parse_mode(const std::string& text);
std::string to_string(Mode m);

struct RhcConfig {
  int t1 = 60;  // demand-model slot, minutes
  int t2 = 60;  // dispatch period, minutes
  std::size_t horizon = 2;
  // Per-step schedules; shorter vectors repeat their last entry.
  Vector beta{2.0};
  Vector alpha{0.2};  // degrees
  Mode mode = Mode::kNominal;
  lp::Options solver;

  int steps_per_slot() const { return t1 / t2; }  // H
  int steps_per_day() const { return 1440 / t2; }
  double beta_at(std::size_t k) const;
  double alpha_at(std::size_t k) const;
  void validate() const;
};

struct VacantTaxi {
  std::size_t id = 0;  // row of the station table
  geo::GeoPoint position;
};

/// Sensor refresh handed to each step.
struct FleetSnapshot {
  std::vector<VacantTaxi> vacant;
  std::vector<geo::GeoPoint> occupied;
};

/// Clock and working demand. h1 and h2 are 1-based slot indices within the
/// day; h2 counts t2 periods.
struct RhcState {
  int h1 = 1;
  int h2 = 1;
  long step = 0;
  bool primed = false;  // false until the first slot refresh
  Vector residual;      // r: current-slot requests not yet covered
  Vector deduction;     // r_o plus orders issued so far in this slot
  FleetSnapshot fleet;

  /// State positioned at t2 period `h2` of the day.
  static RhcState starting_at(int h2, const RhcConfig& cfg);
};

/// ceil(pd_j * n_o) per region.
Vector occupied_service_capability(const Vector& pd, std::size_t occupied);

/// max(r_hat - r_o, 0).
Vector deduct_demand(const Vector& r_hat, const Vector& r_o);

/// Demand of horizon step k (1-based): r/H while the step ends inside the
/// current slot, otherwise r_hat of the slot containing it, divided by H.
Vector schedule_demand(std::size_t k, int h1, int h2, const Vector& r,
                       const demand::DemandModel& model, const RhcConfig& cfg);

/// Interval counterpart; the current-slot case subtracts `deduction` from
/// both ends. The total is the midpoint total.
dispatch::IntervalDemand schedule_demand_interval(std::size_t k, int h1, int h2,
                                                  const Vector& deduction,
                                                  const demand::DemandModel& model,
                                                  const RhcConfig& cfg);

/// Mobility matrix of horizon period k (1-based, k < T), looked up by the
/// minute at which that period starts.
const Matrix& mobility_for(std::size_t k, int h2, const demand::DemandModel& model,
                           const RhcConfig& cfg);

struct Order {
  std::size_t taxi = 0;
  std::size_t from_region = 0;
  std::size_t to_region = 0;
  geo::GeoPoint target;
};

struct StepResult {
  long step = 0;
  int h1 = 1, h2 = 1;  // clock the step ran at
  std::vector<Order> orders;
  lp::Status status = lp::Status::kOptimal;
  bool fallback = false;  // orders are stay-in-place because the solve failed
  std::string note;
  double alpha_slack = 0.0;
  dispatch::ObjectiveBreakdown objective;
};

/// Sensor refresh plus the slot-boundary demand update (first call always
/// refreshes): r_o from the occupied count, r = max(r_hat - r_o, 0).
void refresh(RhcState& state, const FleetSnapshot& snapshot, const demand::DemandModel& model,
             const RhcConfig& cfg);

/// Builds the instance the engine would solve for the given state; exposed
/// for tests and the one-shot command.
dispatch::DispatchInstance build_instance(const RhcState& state, const demand::DemandModel& model,
                                          const RhcConfig& cfg,
                                          const geo::StationTable& stations);

/// One receding-horizon iteration: refresh at slot boundaries, solve, round,
/// emit one order per vacant taxi, charge orders against the slot demand and
/// advance the clock.
StepResult rhc_step(RhcState& state, const FleetSnapshot& snapshot,
                    const demand::DemandModel& model, const RhcConfig& cfg,
                    const geo::StationTable& stations, const geo::RegionGrid& grid);

/// `step,taxi_id,from_region,to_region,target_lat,target_lon`, regions 1-based.
/// Taxi ids come from `names` when given, else the station-table row.
void write_orders_header(std::ostream& out);
void write_orders(std::ostream& out, const StepResult& result,
                  const std::vector<std::string>* names = nullptr);

}  // namespace rhc::engine
