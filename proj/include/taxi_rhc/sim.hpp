#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "taxi_rhc/demand.hpp"
#include "taxi_rhc/geo.hpp"
#include "taxi_rhc/matrix.hpp"
#include "taxi_rhc/rhc.hpp"
#include "taxi_rhc/trace.hpp"

namespace rhc::sim {

using Vector = std::vector<double>;

struct Request {
  std::size_t id = 0;
  std::int64_t time = 0;  // seconds since the start of day 0
  std::size_t origin_region = 0;
  geo::GeoPoint origin;
  std::size_t dest_region = 0;
  geo::GeoPoint destination;
};

/// Synthetic demand description. Rates are expected requests per region per
/// rate slot; destinations hold one row-stochastic matrix per slot, or a
/// single matrix used for every slot.
struct ScenarioSpec {
  geo::RegionGrid grid{0.0, 1.0, 0.0, 1.0, 1, 1};
  std::size_t fleet_size = 30;
  int rate_slot_minutes = 60;
  std::vector<Vector> rates;
  std::vector<Matrix> destinations;
  int days = 1;
  int trip_ticks = 1;
  std::uint64_t seed = 0;

  void validate() const;
  const Matrix& destination_matrix(std::size_t slot_index) const;
};

struct SimScenario {
  ScenarioSpec spec;
  std::vector<Request> requests;  // ascending by (time, id)
  std::vector<geo::GeoPoint> initial_positions;
};

/// Poisson arrivals per (day, slot, region) at the configured rate, uniform
/// times within the slot and uniform points within the cells. The fleet is
/// parked round-robin over the regions. Deterministic in `spec.seed`.
SimScenario synthesize_scenario(const ScenarioSpec& spec);

/// Same total rate everywhere except `hot_regions`, which share `hot_share`
/// of it; uniform destinations.
ScenarioSpec skewed_spec(const geo::RegionGrid& grid, std::size_t fleet_size,
                         double total_rate, const std::vector<std::size_t>& hot_regions,
                         double hot_share, std::uint64_t seed);

/// Rates and destinations taken from an estimated model (counterfactual runs
/// on trace-derived demand).
ScenarioSpec spec_from_model(const demand::DemandModel& model, const geo::RegionGrid& grid,
                             std::size_t fleet_size, std::uint64_t seed);

struct HistoryOptions {
  int history_days = 18;
  int bootstrap_samples = 200;
  double interval_multiplier = 1.0;
  std::uint64_t seed = 0;
};

/// Demand model bootstrapped from `history_days` of freshly sampled history
/// of the same spec (independent seed), at the engine's slot lengths.
demand::DemandModel model_from_scenario(const ScenarioSpec& spec, const engine::RhcConfig& cfg,
                                        const HistoryOptions& options);

struct TickMetrics {
  bool counted = false;  // false when there were no vacant taxis or no open requests
  double mismatch_error = 0.0;
  double idle_miles = 0.0;
  std::size_t vacant = 0;
  std::size_t occupied = 0;
  std::size_t open_requests = 0;
  Vector supply_share;  // vacant taxis per region after orders, / N
  Vector demand_share;  // open requests per region, / R
};

struct SimMetrics {
  std::string arm;
  int tick_minutes = 60;
  std::vector<TickMetrics> ticks;
  Vector hourly_idle_miles = Vector(24, 0.0);  // by hour of day, summed over days
  std::size_t requests_total = 0;
  std::size_t requests_served = 0;
  double occupied_miles = 0.0;

  double total_idle_miles() const;
  double mean_mismatch_error() const;  // over counted ticks
  std::size_t counted_ticks() const;
};

struct TaxiLedger {
  double idle_miles = 0.0;
  double occupied_miles = 0.0;
  double total_miles = 0.0;
};

struct SimRun {
  SimMetrics metrics;
  std::vector<engine::StepResult> steps;  // dispatch arm only
  std::vector<TaxiLedger> taxis;
};

/// Dispatch arm: one rhc_step per tick of cfg.t2 minutes, then travel and
/// nearest-request matching. Requests expire at the end of their t1 slot.
SimRun run_dispatch_sim(const SimScenario& scenario, const demand::DemandModel& model,
                        const engine::RhcConfig& cfg, const geo::StationTable& stations,
                        double miles_per_degree = geo::kMilesPerDegree);

/// No-dispatch arm on the same scenario: vacant taxis only take the nearest
/// open request in their own region.
SimRun run_baseline(const SimScenario& scenario, int tick_minutes, int slot_minutes,
                    double miles_per_degree = geo::kMilesPerDegree);

/// GPS-style trace of the baseline arm: every vacant taxi reports at each
/// tick start and at each pickup; a trip ends at the next report. Taxi ids
/// are taxi_000, taxi_001, ...; timestamps are `epoch` + simulation seconds.
trace::FleetTrace record_baseline_trace(const SimScenario& scenario, int tick_minutes,
                                        int slot_minutes, std::int64_t epoch);

/// Metrics straight from recorded trajectories: vacant supply at each tick
/// start against pickups during the tick, and vacant mileage binned by the
/// tick its segment starts in.
SimMetrics replay_baseline(const trace::FleetTrace& fleet, const geo::RegionGrid& grid,
                           int tick_minutes, const trace::DayClock& clock = {},
                           double miles_per_degree = geo::kMilesPerDegree);

/// Percent change of `a` relative to `b`; negative means `a` is lower.
struct Comparison {
  double idle_a = 0.0, idle_b = 0.0;
  double mismatch_a = 0.0, mismatch_b = 0.0;
  double idle_change_pct = 0.0;
  double mismatch_change_pct = 0.0;
};
Comparison compare_metrics(const SimMetrics& a, const SimMetrics& b);

double percent_change(double a, double b);

/// `slot,mismatch_error,idle_miles` after a versioned header; uncounted ticks
/// leave the mismatch field empty. `beta` is recorded in the header.
void write_metrics_csv(std::ostream& out, const SimMetrics& m, double beta);
void write_hourly_csv(std::ostream& out, const SimMetrics& m);
void write_summary_header(std::ostream& out);
void write_summary_row(std::ostream& out, const SimMetrics& m, double beta);
/// `region,supply_share,demand_share,ratio` for one tick (1-based).
void write_region_ratios_csv(std::ostream& out, const SimMetrics& m, std::size_t tick);
void write_comparison(std::ostream& out, const Comparison& c);
void write_comparison_csv(std::ostream& out, const Comparison& c);

}  // namespace rhc::sim
