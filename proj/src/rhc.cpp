#include "taxi_rhc/rhc.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace rhc::engine {

namespace {

double schedule_at(const Vector& v, std::size_t k) {
  return v.empty() ? 0.0 : v[std::min(k, v.size() - 1)];
}

Vector scaled(const Vector& v, double factor) {
  Vector out(v);
  for (double& x : out) x *= factor;
  return out;
}

// Horizon step k ends inside the current t1 slot.
bool in_current_slot(std::size_t k, int h1, int h2, const RhcConfig& cfg) {
  return static_cast<long>(k + h2 - 1) * cfg.t2 <= static_cast<long>(h1) * cfg.t1;
}

int future_slot(std::size_t k, int h2, const RhcConfig& cfg) {
  const long minutes = static_cast<long>(k + h2 - 1) * cfg.t2;
  return static_cast<int>((minutes + cfg.t1 - 1) / cfg.t1);
}

int slot_of_period(int h2, const RhcConfig& cfg) { return (h2 - 1) * cfg.t2 / cfg.t1 + 1; }

void advance(RhcState& state, const RhcConfig& cfg) {
  state.h2 = state.h2 % cfg.steps_per_day() + 1;
  state.h1 = slot_of_period(state.h2, cfg);
  ++state.step;
}

}  // namespace

Mode parse_mode(const std::string& text) {
  if (text == "nominal") return Mode::kNominal;
  if (text == "robust") return Mode::kRobust;
  throw std::invalid_argument("mode must be nominal or robust, got '" + text + "'");
}

std::string to_string(Mode m) { return m == Mode::kRobust ? "robust" : "nominal"; }

double RhcConfig::beta_at(std::size_t k) const { return schedule_at(beta, k); }
double RhcConfig::alpha_at(std::size_t k) const { return schedule_at(alpha, k); }

void RhcConfig::validate() const {
  trace::check_slot_minutes(t1);
  if (t2 < 1 || t1 % t2 != 0)
    throw std::invalid_argument("t2 = " + std::to_string(t2) + " must divide t1 = " +
                                std::to_string(t1));
  if (horizon < 1) throw std::invalid_argument("horizon T must be >= 1");
  if (beta.empty() || alpha.empty())
    throw std::invalid_argument("beta and alpha schedules must be non-empty");
  for (double b : beta)
    if (!std::isfinite(b) || b < 0.0) throw std::invalid_argument("beta must be >= 0");
  for (double a : alpha)
    if (!std::isfinite(a) || a <= 0.0) throw std::invalid_argument("alpha must be > 0");
}

RhcState RhcState::starting_at(int h2, const RhcConfig& cfg) {
  cfg.validate();
  if (h2 < 1 || h2 > cfg.steps_per_day())
    throw std::out_of_range("h2 outside 1.." + std::to_string(cfg.steps_per_day()));
  RhcState s;
  s.h2 = h2;
  s.h1 = slot_of_period(h2, cfg);
  return s;
}

Vector occupied_service_capability(const Vector& pd, std::size_t occupied) {
  Vector out(pd.size());
  for (std::size_t j = 0; j < pd.size(); ++j)
    out[j] = std::ceil(pd[j] * static_cast<double>(occupied));
  return out;
}

Vector deduct_demand(const Vector& r_hat, const Vector& r_o) {
  if (r_hat.size() != r_o.size()) throw std::invalid_argument("deduct_demand: length mismatch");
  Vector out(r_hat.size());
  for (std::size_t j = 0; j < r_hat.size(); ++j) out[j] = std::max(r_hat[j] - r_o[j], 0.0);
  return out;
}

Vector schedule_demand(std::size_t k, int h1, int h2, const Vector& r,
                       const demand::DemandModel& model, const RhcConfig& cfg) {
  const double inv_h = 1.0 / cfg.steps_per_slot();
  if (in_current_slot(k, h1, h2, cfg)) return scaled(r, inv_h);
  return scaled(model.mean(future_slot(k, h2, cfg)), inv_h);
}

dispatch::IntervalDemand schedule_demand_interval(std::size_t k, int h1, int h2,
                                                  const Vector& deduction,
                                                  const demand::DemandModel& model,
                                                  const RhcConfig& cfg) {
  const double inv_h = 1.0 / cfg.steps_per_slot();
  dispatch::IntervalDemand box;
  if (in_current_slot(k, h1, h2, cfg)) {
    box.lower = scaled(deduct_demand(model.lower(h1), deduction), inv_h);
    box.upper = scaled(deduct_demand(model.upper(h1), deduction), inv_h);
  } else {
    const int slot = future_slot(k, h2, cfg);
    box.lower = scaled(model.lower(slot), inv_h);
    box.upper = scaled(model.upper(slot), inv_h);
  }
  for (std::size_t j = 0; j < box.lower.size(); ++j)
    box.total += 0.5 * (box.lower[j] + box.upper[j]);
  return box;
}

const Matrix& mobility_for(std::size_t k, int h2, const demand::DemandModel& model,
                           const RhcConfig& cfg) {
  const long minute = static_cast<long>(h2 + k - 2) * cfg.t2;
  return model.transition(static_cast<int>(minute / model.mobility_slot_minutes) + 1);
}

dispatch::DispatchInstance build_instance(const RhcState& state, const demand::DemandModel& model,
                                          const RhcConfig& cfg,
                                          const geo::StationTable& stations) {
  const auto& vacant = state.fleet.vacant;
  const std::size_t n = model.num_regions;
  dispatch::DispatchInstance in;
  in.stations = geo::StationTable(vacant.size(), n);
  for (std::size_t i = 0; i < vacant.size(); ++i) {
    in.positions.push_back(vacant[i].position);
    if (vacant[i].id >= stations.num_taxis())
      throw std::out_of_range("taxi " + std::to_string(vacant[i].id) + " has no stations");
    for (std::size_t j = 0; j < n; ++j) in.stations.station(i, j) = stations.station(vacant[i].id, j);
  }
  for (std::size_t k = 1; k <= cfg.horizon; ++k) {
    if (cfg.mode == Mode::kRobust)
      in.intervals.push_back(
          schedule_demand_interval(k, state.h1, state.h2, state.deduction, model, cfg));
    else
      in.demand.push_back(schedule_demand(k, state.h1, state.h2, state.residual, model, cfg));
    if (k < cfg.horizon) in.mobility.push_back(mobility_for(k, state.h2, model, cfg));
    in.alpha.emplace_back(vacant.size(), cfg.alpha_at(k - 1));
    in.beta.push_back(cfg.beta_at(k - 1));
  }
  return in;
}

void refresh(RhcState& state, const FleetSnapshot& snapshot, const demand::DemandModel& model,
             const RhcConfig& cfg) {
  state.fleet = snapshot;
  const bool boundary = (static_cast<long>(state.h2 - 1) * cfg.t2) % cfg.t1 == 0;
  if (!state.primed || boundary) {
    const Vector pd = demand::dropoff_probability(model.dropoffs(state.h1));
    state.deduction = occupied_service_capability(pd, snapshot.occupied.size());
    state.residual = deduct_demand(model.mean(state.h1), state.deduction);
    state.primed = true;
  }
}

StepResult rhc_step(RhcState& state, const FleetSnapshot& snapshot,
                    const demand::DemandModel& model, const RhcConfig& cfg,
                    const geo::StationTable& stations, const geo::RegionGrid& grid) {
  if (model.request_slot_minutes != cfg.t1)
    throw std::invalid_argument("demand model slot length " +
                                std::to_string(model.request_slot_minutes) +
                                " differs from t1 = " + std::to_string(cfg.t1));
  if (model.num_regions != grid.size() || stations.num_regions() != grid.size())
    throw std::invalid_argument("model, stations and grid disagree on the region count");

  refresh(state, snapshot, model, cfg);
  StepResult result;
  result.step = state.step;
  result.h1 = state.h1;
  result.h2 = state.h2;

  const auto& vacant = snapshot.vacant;
  if (vacant.empty()) {
    advance(state, cfg);
    return result;
  }

  // (3) solve
  dispatch::DispatchPlan plan;
  try {
    plan = dispatch::solve_dispatch(build_instance(state, model, cfg, stations), cfg.solver);
    if (plan.status != lp::Status::kOptimal) {
      result.fallback = true;
      result.note = "solver status " + lp::to_string(plan.status);
    }
  } catch (const dispatch::InfeasibleInstance& e) {
    plan.status = lp::Status::kInfeasible;
    result.fallback = true;
    result.note = e.what();
  }
  result.status = plan.status;

  // (4) orders
  std::vector<double> committed(model.num_regions, 0.0);
  for (std::size_t i = 0; i < vacant.size(); ++i) {
    Order o;
    o.taxi = vacant[i].id;
    o.from_region = grid.assign_region(vacant[i].position);
    if (result.fallback) {
      o.to_region = o.from_region;
      o.target = vacant[i].position;
    } else {
      o.to_region = plan.regions[i];
      o.target = stations.station(o.taxi, o.to_region);
    }
    committed[o.to_region] += 1.0;
    result.orders.push_back(o);
  }
  if (!result.fallback) {
    result.alpha_slack = plan.alpha_slack;
    result.objective = plan.objective;
  }
  for (std::size_t j = 0; j < committed.size(); ++j) {
    state.residual[j] = std::max(state.residual[j] - committed[j], 0.0);
    state.deduction[j] += committed[j];
  }
  advance(state, cfg);
  return result;
}

void write_orders_header(std::ostream& out) {
  out << "# taxi-rhc orders v1\n";
  out << "step,taxi_id,from_region,to_region,target_lat,target_lon\n";
}

void write_orders(std::ostream& out, const StepResult& result,
                  const std::vector<std::string>* names) {
  const auto old = out.precision(10);
  for (const auto& o : result.orders) {
    out << result.step << ',';
    if (names)
      out << names->at(o.taxi);
    else
      out << o.taxi;
    out << ',' << o.from_region + 1 << ',' << o.to_region + 1 << ',' << o.target.lat << ','
        << o.target.lon << '\n';
  }
  out.precision(old);
}

}  // namespace rhc::engine
