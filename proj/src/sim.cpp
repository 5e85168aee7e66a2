#include "taxi_rhc/sim.hpp"

#include <algorithm>
#include <iomanip>
#include <cmath>
#include <functional>
#include <limits>
#include <ostream>
#include <random>
#include <stdexcept>

#include "taxi_rhc/seed.hpp"

namespace rhc::sim {

namespace {

constexpr std::int64_t kDay = 86400;

std::size_t draw_index(std::span<const double> weights, double u) {
  double total = 0.0;
  for (double w : weights) total += w;
  double acc = 0.0;
  for (std::size_t j = 0; j < weights.size(); ++j) {
    acc += weights[j] / total;
    if (u < acc) return j;
  }
  return weights.size() - 1;
}

void check_stochastic(const Matrix& m, std::size_t n, const char* what) {
  if (m.rows() != n || m.cols() != n) throw std::invalid_argument(std::string(what) + ": shape");
  for (std::size_t a = 0; a < n; ++a) {
    double s = 0.0;
    for (double v : m.row(a)) {
      if (!(v >= 0.0)) throw std::invalid_argument(std::string(what) + ": negative entry");
      s += v;
    }
    if (std::abs(s - 1.0) > 1e-9) throw std::invalid_argument(std::string(what) + ": row sum != 1");
  }
}

using Policy =
    std::function<std::vector<engine::Order>(long tick, const engine::FleetSnapshot& snapshot)>;
using Recorder = std::function<void(std::size_t taxi, std::int64_t time, const geo::GeoPoint& p,
                                    bool occupied)>;

// Shared tick loop of both synthetic arms.
SimRun simulate(const SimScenario& scenario, int tick_minutes, int slot_minutes,
                double miles_per_degree, const Policy& policy, const std::string& arm,
                const Recorder& record = nullptr) {
  const auto& spec = scenario.spec;
  const auto& grid = spec.grid;
  const std::size_t n = grid.size();
  const std::size_t fleet = spec.fleet_size;
  if (tick_minutes < 1 || 1440 % tick_minutes != 0)
    throw std::invalid_argument("tick length must divide a day");
  const std::int64_t tick_len = std::int64_t{tick_minutes} * 60;
  const std::int64_t slot_len = std::int64_t{slot_minutes} * 60;
  const long ticks = static_cast<long>(spec.days) * (1440 / tick_minutes);

  SimRun run;
  run.metrics.arm = arm;
  run.metrics.tick_minutes = tick_minutes;
  run.metrics.requests_total = scenario.requests.size();
  run.taxis.assign(fleet, {});
  std::vector<geo::GeoPoint> pos = scenario.initial_positions;
  std::vector<long> busy_until(fleet, 0);
  std::vector<const Request*> open;
  std::size_t next = 0;

  auto miles = [&](const geo::GeoPoint& a, const geo::GeoPoint& b) {
    return geo::deg_to_miles(geo::manhattan_deg(a, b), miles_per_degree);
  };

  for (long tick = 0; tick < ticks; ++tick) {
    const std::int64_t start = tick * tick_len, end = start + tick_len;
    std::erase_if(open, [&](const Request* r) { return (r->time / slot_len + 1) * slot_len <= start; });
    while (next < scenario.requests.size() && scenario.requests[next].time < end)
      open.push_back(&scenario.requests[next++]);

    engine::FleetSnapshot snap;
    for (std::size_t i = 0; i < fleet; ++i) {
      if (busy_until[i] <= tick) {
        snap.vacant.push_back({i, pos[i]});
        if (record) record(i, start, pos[i], false);
      } else
        snap.occupied.push_back(pos[i]);
    }
    const auto orders = policy(tick, snap);
    if (orders.size() != snap.vacant.size())
      throw std::logic_error("policy must order every vacant taxi");

    TickMetrics tm;
    tm.vacant = snap.vacant.size();
    tm.occupied = snap.occupied.size();
    tm.open_requests = open.size();
    tm.supply_share.assign(n, 0.0);
    tm.demand_share.assign(n, 0.0);
    for (const auto& o : orders) tm.supply_share[o.to_region] += 1.0;
    for (const auto* r : open) tm.demand_share[r->origin_region] += 1.0;
    if (tm.vacant > 0)
      for (double& s : tm.supply_share) s /= static_cast<double>(tm.vacant);
    if (tm.open_requests > 0)
      for (double& s : tm.demand_share) s /= static_cast<double>(tm.open_requests);
    tm.counted = tm.vacant > 0 && tm.open_requests > 0;
    if (tm.counted)
      for (std::size_t j = 0; j < n; ++j)
        tm.mismatch_error += std::abs(tm.supply_share[j] - tm.demand_share[j]);

    for (const auto& o : orders) {
      auto& ledger = run.taxis[o.taxi];
      const double leg = miles(pos[o.taxi], o.target);
      tm.idle_miles += leg;
      ledger.idle_miles += leg;
      ledger.total_miles += leg;
      pos[o.taxi] = o.target;

      auto best = open.end();
      double best_d = std::numeric_limits<double>::infinity();
      for (auto it = open.begin(); it != open.end(); ++it) {
        if ((*it)->origin_region != o.to_region) continue;
        const double d = geo::manhattan_deg(pos[o.taxi], (*it)->origin);
        if (d < best_d || (d == best_d && (*it)->id < (*best)->id)) {
          best_d = d;
          best = it;
        }
      }
      if (best == open.end()) continue;
      const Request* r = *best;
      open.erase(best);
      const double approach = miles(pos[o.taxi], r->origin);
      const double trip = miles(r->origin, r->destination);
      tm.idle_miles += approach;
      ledger.idle_miles += approach;
      ledger.occupied_miles += trip;
      ledger.total_miles += approach;
      ledger.total_miles += trip;
      run.metrics.occupied_miles += trip;
      if (record) record(o.taxi, std::max(start + 1, r->time), r->origin, true);
      pos[o.taxi] = r->destination;
      busy_until[o.taxi] = tick + spec.trip_ticks;
      ++run.metrics.requests_served;
    }
    run.metrics.hourly_idle_miles[static_cast<std::size_t>((start % kDay) / 3600)] += tm.idle_miles;
    run.metrics.ticks.push_back(std::move(tm));
  }
  return run;
}

}  // namespace

void ScenarioSpec::validate() const {
  trace::check_slot_minutes(rate_slot_minutes);
  const std::size_t n = grid.size();
  const auto slots = static_cast<std::size_t>(1440 / rate_slot_minutes);
  if (rates.size() != slots && rates.size() != 1)
    throw std::invalid_argument("rates: need one vector per slot (" + std::to_string(slots) +
                                ") or a single vector");
  for (const auto& r : rates) {
    if (r.size() != n) throw std::invalid_argument("rates: one entry per region required");
    for (double v : r)
      if (!std::isfinite(v) || v < 0.0) throw std::invalid_argument("rates must be >= 0");
  }
  if (destinations.size() != slots && destinations.size() != 1)
    throw std::invalid_argument("destinations: need one matrix per slot or a single matrix");
  for (const auto& m : destinations) check_stochastic(m, n, "destinations");
  if (fleet_size == 0) throw std::invalid_argument("fleet size must be >= 1");
  if (days < 1) throw std::invalid_argument("days must be >= 1");
  if (trip_ticks < 1) throw std::invalid_argument("trip_ticks must be >= 1");
}

const Matrix& ScenarioSpec::destination_matrix(std::size_t slot_index) const {
  return destinations.size() == 1 ? destinations[0] : destinations.at(slot_index);
}

SimScenario synthesize_scenario(const ScenarioSpec& spec) {
  spec.validate();
  SimScenario sc;
  sc.spec = spec;
  const auto& grid = spec.grid;
  const std::size_t n = grid.size();
  const auto slots = static_cast<std::size_t>(1440 / spec.rate_slot_minutes);
  const std::int64_t len = std::int64_t{spec.rate_slot_minutes} * 60;

  std::mt19937_64 rng(derive_seed(spec.seed, "requests"));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  // Arrival seconds stay strictly inside the slot so every slot rule agrees.
  std::uniform_int_distribution<std::int64_t> offset(1, std::max<std::int64_t>(len - 1, 1));
  for (int day = 0; day < spec.days; ++day) {
    for (std::size_t h = 0; h < slots; ++h) {
      const auto& rate = spec.rates.size() == 1 ? spec.rates[0] : spec.rates[h];
      const Matrix& dest = spec.destination_matrix(h);
      for (std::size_t j = 0; j < n; ++j) {
        if (rate[j] <= 0.0) continue;
        const int count = std::poisson_distribution<int>(rate[j])(rng);
        for (int c = 0; c < count; ++c) {
          Request r;
          r.time = day * kDay + static_cast<std::int64_t>(h) * len + offset(rng);
          r.origin_region = j;
          r.origin = geo::point_in_cell(grid, j, unit(rng), unit(rng));
          r.dest_region = draw_index(dest.row(j), unit(rng));
          r.destination = geo::point_in_cell(grid, r.dest_region, unit(rng), unit(rng));
          sc.requests.push_back(r);
        }
      }
    }
  }
  std::stable_sort(sc.requests.begin(), sc.requests.end(),
                   [](const Request& a, const Request& b) { return a.time < b.time; });
  for (std::size_t k = 0; k < sc.requests.size(); ++k) sc.requests[k].id = k;

  std::mt19937_64 fleet_rng(derive_seed(spec.seed, "fleet"));
  for (std::size_t i = 0; i < spec.fleet_size; ++i)
    sc.initial_positions.push_back(geo::point_in_cell(grid, i % n, unit(fleet_rng), unit(fleet_rng)));
  return sc;
}

ScenarioSpec skewed_spec(const geo::RegionGrid& grid, std::size_t fleet_size, double total_rate,
                         const std::vector<std::size_t>& hot_regions, double hot_share,
                         std::uint64_t seed) {
  const std::size_t n = grid.size();
  if (hot_share < 0.0 || hot_share > 1.0) throw std::invalid_argument("hot share outside [0,1]");
  for (std::size_t h : hot_regions)
    if (h >= n) throw std::out_of_range("hot region outside the grid");
  Vector rate(n, 0.0);
  const std::size_t cold = n - hot_regions.size();
  for (std::size_t j = 0; j < n; ++j) {
    const bool hot = std::find(hot_regions.begin(), hot_regions.end(), j) != hot_regions.end();
    if (hot)
      rate[j] = total_rate * hot_share / static_cast<double>(hot_regions.size());
    else if (cold > 0)
      rate[j] = total_rate * (hot_regions.empty() ? 1.0 : 1.0 - hot_share) / static_cast<double>(cold);
  }
  ScenarioSpec spec;
  spec.grid = grid;
  spec.fleet_size = fleet_size;
  spec.rates = {rate};
  spec.destinations = {Matrix(n, n, 1.0 / static_cast<double>(n))};
  spec.seed = seed;
  return spec;
}

ScenarioSpec spec_from_model(const demand::DemandModel& model, const geo::RegionGrid& grid,
                             std::size_t fleet_size, std::uint64_t seed) {
  if (model.num_regions != grid.size())
    throw std::invalid_argument("model has " + std::to_string(model.num_regions) +
                                " regions, grid has " + std::to_string(grid.size()));
  ScenarioSpec spec;
  spec.grid = grid;
  spec.fleet_size = fleet_size;
  spec.rate_slot_minutes = model.request_slot_minutes;
  spec.rates = model.request_mean;
  // Trip destinations follow the mobility matrix at the start of each slot.
  for (int h = 1; h <= model.num_request_slots(); ++h) {
    const int minute = (h - 1) * model.request_slot_minutes;
    spec.destinations.push_back(model.transition(minute / model.mobility_slot_minutes + 1));
  }
  spec.seed = seed;
  return spec;
}

demand::DemandModel model_from_scenario(const ScenarioSpec& spec, const engine::RhcConfig& cfg,
                                        const HistoryOptions& options) {
  if (options.history_days < 1) throw std::invalid_argument("history needs at least one day");
  ScenarioSpec past = spec;
  past.days = options.history_days;
  past.seed = derive_seed(options.seed, "history");
  const SimScenario history = synthesize_scenario(past);
  const std::size_t n = spec.grid.size();

  std::vector<trace::Event> events;
  events.reserve(2 * history.requests.size());
  for (const auto& r : history.requests) {
    events.push_back({trace::EventKind::kPickup, r.origin_region, r.time, r.origin});
    events.push_back({trace::EventKind::kDropoff, r.dest_region, r.time, r.destination});
  }
  std::vector<std::int64_t> days(static_cast<std::size_t>(options.history_days));
  for (std::size_t d = 0; d < days.size(); ++d) days[d] = static_cast<std::int64_t>(d);
  const trace::DayClock clock;
  const auto counts = trace::aggregate_counts(events, cfg.t1, n, clock, days);

  // Trip matrices binned at the request slot length: short mobility slots
  // would leave most rows empty over a few weeks of history.
  trace::TransitionCounts trans;
  trans.slot_minutes = cfg.t1;
  trans.num_regions = n;
  for (std::int64_t d : days)
    trans.days.push_back({d, std::vector<Matrix>(static_cast<std::size_t>(trans.num_slots()), Matrix(n, n))});
  for (const auto& r : history.requests) {
    auto& day = trans.days[static_cast<std::size_t>(clock.day_index(r.time))];
    day.per_slot[static_cast<std::size_t>(clock.slot(r.time, cfg.t1)) - 1](r.origin_region, r.dest_region) += 1.0;
  }

  demand::EstimateOptions opts;
  opts.request_slot_minutes = cfg.t1;
  opts.mobility_slot_minutes = cfg.t1;
  opts.bootstrap_samples = options.bootstrap_samples;
  opts.seed = derive_seed(options.seed, "model");
  opts.interval_multiplier = options.interval_multiplier;
  return demand::build_model(counts, trans, opts);
}

double SimMetrics::total_idle_miles() const {
  double s = 0.0;
  for (const auto& t : ticks) s += t.idle_miles;
  return s;
}

std::size_t SimMetrics::counted_ticks() const {
  return static_cast<std::size_t>(
      std::count_if(ticks.begin(), ticks.end(), [](const TickMetrics& t) { return t.counted; }));
}

double SimMetrics::mean_mismatch_error() const {
  double s = 0.0;
  std::size_t c = 0;
  for (const auto& t : ticks)
    if (t.counted) {
      s += t.mismatch_error;
      ++c;
    }
  return c ? s / static_cast<double>(c) : 0.0;
}

SimRun run_dispatch_sim(const SimScenario& scenario, const demand::DemandModel& model,
                        const engine::RhcConfig& cfg, const geo::StationTable& stations,
                        double miles_per_degree) {
  cfg.validate();
  if (stations.num_taxis() != scenario.spec.fleet_size)
    throw std::invalid_argument("station table does not cover the fleet");
  auto state = engine::RhcState::starting_at(1, cfg);
  std::vector<engine::StepResult> steps;
  const Policy policy = [&](long, const engine::FleetSnapshot& snap) {
    steps.push_back(engine::rhc_step(state, snap, model, cfg, stations, scenario.spec.grid));
    return steps.back().orders;
  };
  SimRun run = simulate(scenario, cfg.t2, cfg.t1, miles_per_degree, policy, "dispatch");
  run.steps = std::move(steps);
  return run;
}

SimRun run_baseline(const SimScenario& scenario, int tick_minutes, int slot_minutes,
                    double miles_per_degree) {
  const auto& grid = scenario.spec.grid;
  const Policy policy = [&](long, const engine::FleetSnapshot& snap) {
    std::vector<engine::Order> orders;
    for (const auto& v : snap.vacant) {
      const std::size_t region = grid.assign_region(v.position);
      orders.push_back({v.id, region, region, v.position});
    }
    return orders;
  };
  return simulate(scenario, tick_minutes, slot_minutes, miles_per_degree, policy, "baseline");
}

trace::FleetTrace record_baseline_trace(const SimScenario& scenario, int tick_minutes,
                                        int slot_minutes, std::int64_t epoch) {
  trace::FleetTrace fleet;
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < scenario.spec.fleet_size; ++i) {
    std::string id = std::to_string(i);
    ids.push_back("taxi_" + std::string(id.size() < 3 ? 3 - id.size() : 0, '0') + id);
    fleet[ids.back()];
  }
  const auto& grid = scenario.spec.grid;
  const Policy policy = [&](long, const engine::FleetSnapshot& snap) {
    std::vector<engine::Order> orders;
    for (const auto& v : snap.vacant) {
      const std::size_t region = grid.assign_region(v.position);
      orders.push_back({v.id, region, region, v.position});
    }
    return orders;
  };
  const Recorder record = [&](std::size_t taxi, std::int64_t time, const geo::GeoPoint& p,
                              bool occupied) {
    fleet[ids[taxi]].push_back({ids[taxi], p, occupied, epoch + time});
  };
  simulate(scenario, tick_minutes, slot_minutes, geo::kMilesPerDegree, policy, "baseline", record);
  return fleet;
}

SimMetrics replay_baseline(const trace::FleetTrace& fleet, const geo::RegionGrid& grid,
                           int tick_minutes, const trace::DayClock& clock,
                           double miles_per_degree) {
  if (tick_minutes < 1 || 1440 % tick_minutes != 0)
    throw std::invalid_argument("tick length must divide a day");
  SimMetrics m;
  m.arm = "replay";
  m.tick_minutes = tick_minutes;
  std::int64_t first = std::numeric_limits<std::int64_t>::max();
  std::int64_t last = std::numeric_limits<std::int64_t>::min();
  for (const auto& [id, records] : fleet)
    if (!records.empty()) {
      first = std::min(first, records.front().timestamp);
      last = std::max(last, records.back().timestamp);
    }
  if (first > last) return m;

  const std::size_t n = grid.size();
  const std::int64_t tick_len = std::int64_t{tick_minutes} * 60;
  const std::int64_t t0 = first - clock.second_of_day(first);
  const auto ticks = static_cast<std::size_t>((last - t0) / tick_len + 1);
  m.ticks.resize(ticks);
  for (auto& t : m.ticks) {
    t.supply_share.assign(n, 0.0);
    t.demand_share.assign(n, 0.0);
  }
  auto tick_of = [&](std::int64_t ts) { return static_cast<std::size_t>((ts - t0) / tick_len); };

  for (const auto& [id, records] : fleet) {
    for (std::size_t k = 1; k < records.size(); ++k) {
      const double d = geo::deg_to_miles(geo::manhattan_deg(records[k - 1].point, records[k].point),
                                         miles_per_degree);
      if (records[k - 1].occupied)
        m.occupied_miles += d;
      else
        m.ticks[tick_of(records[k - 1].timestamp)].idle_miles += d;
    }
    for (const auto& e : trace::detect_events(records, grid))
      if (e.kind == trace::EventKind::kPickup) {
        m.ticks[tick_of(e.timestamp)].demand_share[e.region] += 1.0;
        ++m.requests_total;
      }
    // Vacant supply at each tick start: the latest record at or before it.
    std::size_t p = 0;
    for (std::size_t t = 0; t < ticks; ++t) {
      const std::int64_t start = t0 + static_cast<std::int64_t>(t) * tick_len;
      while (p < records.size() && records[p].timestamp <= start) ++p;
      if (p == 0 || records[p - 1].occupied) continue;
      m.ticks[t].supply_share[grid.assign_region(records[p - 1].point)] += 1.0;
    }
  }
  m.requests_served = m.requests_total;
  for (std::size_t t = 0; t < ticks; ++t) {
    auto& tm = m.ticks[t];
    for (double v : tm.supply_share) tm.vacant += static_cast<std::size_t>(v);
    for (double v : tm.demand_share) tm.open_requests += static_cast<std::size_t>(v);
    if (tm.vacant > 0)
      for (double& s : tm.supply_share) s /= static_cast<double>(tm.vacant);
    if (tm.open_requests > 0)
      for (double& s : tm.demand_share) s /= static_cast<double>(tm.open_requests);
    tm.counted = tm.vacant > 0 && tm.open_requests > 0;
    if (tm.counted)
      for (std::size_t j = 0; j < n; ++j)
        tm.mismatch_error += std::abs(tm.supply_share[j] - tm.demand_share[j]);
    const std::int64_t start = t0 + static_cast<std::int64_t>(t) * tick_len;
    m.hourly_idle_miles[static_cast<std::size_t>(clock.second_of_day(start) / 3600)] += tm.idle_miles;
  }
  return m;
}

double percent_change(double a, double b) {
  if (b == 0.0) return a == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return (a - b) / b * 100.0;
}

Comparison compare_metrics(const SimMetrics& a, const SimMetrics& b) {
  if (a.ticks.size() != b.ticks.size() || a.tick_minutes != b.tick_minutes)
    throw std::invalid_argument("cannot compare runs with different slot structure (" +
                                std::to_string(a.ticks.size()) + " vs " +
                                std::to_string(b.ticks.size()) + " slots)");
  Comparison c;
  c.idle_a = a.total_idle_miles();
  c.idle_b = b.total_idle_miles();
  c.mismatch_a = a.mean_mismatch_error();
  c.mismatch_b = b.mean_mismatch_error();
  c.idle_change_pct = percent_change(c.idle_a, c.idle_b);
  c.mismatch_change_pct = percent_change(c.mismatch_a, c.mismatch_b);
  return c;
}

void write_metrics_csv(std::ostream& out, const SimMetrics& m, double beta) {
  const auto old = out.precision(10);
  out << "# taxi-rhc metrics v1 arm=" << m.arm << " tick_minutes=" << m.tick_minutes
      << " beta=" << beta << '\n';
  out << "slot,mismatch_error,idle_miles\n";
  for (std::size_t t = 0; t < m.ticks.size(); ++t) {
    out << t + 1 << ',';
    if (m.ticks[t].counted) out << m.ticks[t].mismatch_error;
    out << ',' << m.ticks[t].idle_miles << '\n';
  }
  out.precision(old);
}

void write_hourly_csv(std::ostream& out, const SimMetrics& m) {
  const auto old = out.precision(10);
  out << "# taxi-rhc hourly_idle v1 arm=" << m.arm << '\n';
  out << "hour,idle_miles\n";
  for (std::size_t h = 0; h < m.hourly_idle_miles.size(); ++h)
    out << h << ',' << m.hourly_idle_miles[h] << '\n';
  out.precision(old);
}

void write_summary_header(std::ostream& out) {
  out << "# taxi-rhc summary v1\n";
  out << "arm,beta,slots,counted_slots,mean_mismatch_error,total_idle_miles,requests,served,"
         "occupied_miles\n";
}

void write_summary_row(std::ostream& out, const SimMetrics& m, double beta) {
  const auto old = out.precision(10);
  out << m.arm << ',' << beta << ',' << m.ticks.size() << ',' << m.counted_ticks() << ','
      << m.mean_mismatch_error() << ',' << m.total_idle_miles() << ',' << m.requests_total
      << ',' << m.requests_served << ',' << m.occupied_miles << '\n';
  out.precision(old);
}

void write_region_ratios_csv(std::ostream& out, const SimMetrics& m, std::size_t tick) {
  const auto& t = m.ticks.at(tick - 1);
  const auto old = out.precision(10);
  out << "# taxi-rhc region_ratios v1 arm=" << m.arm << " slot=" << tick << '\n';
  out << "region,supply_share,demand_share,ratio\n";
  for (std::size_t j = 0; j < t.supply_share.size(); ++j) {
    out << j + 1 << ',' << t.supply_share[j] << ',' << t.demand_share[j] << ',';
    const double vac = t.supply_share[j] * static_cast<double>(t.vacant);
    const double req = t.demand_share[j] * static_cast<double>(t.open_requests);
    if (req > 0.0) out << vac / req;
    out << '\n';
  }
  out.precision(old);
}

void write_comparison(std::ostream& out, const Comparison& c) {
  const auto old_flags = out.flags();
  const auto old = out.precision();
  out.setf(std::ios::fixed);
  out.precision(3);
  out << std::left << std::setw(12) << "" << std::right << std::setw(12) << "dispatch"
      << std::setw(12) << "baseline" << std::setw(11) << "change" << '\n';
  out << std::left << std::setw(12) << "idle miles" << std::right << std::setw(12) << c.idle_a
      << std::setw(12) << c.idle_b << std::setw(10) << c.idle_change_pct << "%\n";
  out << std::left << std::setw(12) << "s/d error" << std::right << std::setw(12) << c.mismatch_a
      << std::setw(12) << c.mismatch_b << std::setw(10) << c.mismatch_change_pct << "%\n";
  out.flags(old_flags);
  out.precision(old);
}

void write_comparison_csv(std::ostream& out, const Comparison& c) {
  const auto old = out.precision(10);
  out << "# taxi-rhc comparison v1\n";
  out << "metric,dispatch,baseline,change_pct\n";
  out << "total_idle_miles," << c.idle_a << ',' << c.idle_b << ',' << c.idle_change_pct << '\n';
  out << "mean_mismatch_error," << c.mismatch_a << ',' << c.mismatch_b << ','
      << c.mismatch_change_pct << '\n';
  out.precision(old);
}

}  // namespace rhc::sim
