#include <doctest.h>

#include <cmath>
#include <sstream>

#include "support/model_fixtures.hpp"
#include "taxi_rhc/seed.hpp"
#include "taxi_rhc/sim.hpp"

using namespace rhc;
using namespace rhc::sim;

namespace {

const geo::RegionGrid kGrid(37.70, 37.80, -122.50, -122.40, 3, 3);

ScenarioSpec quiet_spec(std::size_t fleet) {
  ScenarioSpec spec;
  spec.grid = kGrid;
  spec.fleet_size = fleet;
  spec.rates = {Vector(9, 0.0)};
  spec.destinations = {Matrix::identity(9)};
  spec.seed = 1;
  return spec;
}

}  // namespace

TEST_CASE("zero rate produces no requests") {
  CHECK(synthesize_scenario(quiet_spec(4)).requests.empty());
}

TEST_CASE("arrival counts match the rates") {
  auto spec = quiet_spec(1);
  spec.rate_slot_minutes = 1;
  spec.days = 7;  // 10080 slots
  const Vector lambda{0.5, 2.0, 0.0, 1.0, 0.1, 0.0, 0.0, 0.0, 3.0};
  spec.rates = {lambda};
  spec.destinations = {Matrix(9, 9, 1.0 / 9.0)};
  const auto sc = synthesize_scenario(spec);
  Vector count(9, 0.0);
  for (const auto& r : sc.requests) count[r.origin_region] += 1.0;
  const double slots = 10080.0;
  for (std::size_t j = 0; j < 9; ++j) {
    const double mean = count[j] / slots;
    const double sigma = std::sqrt(lambda[j] / slots);
    CHECK(std::abs(mean - lambda[j]) <= 3.0 * sigma + 1e-12);
  }
}

TEST_CASE("scenario synthesis is deterministic") {
  const auto spec = skewed_spec(kGrid, 10, 15.0, {0, 4}, 0.8, 42);
  const auto a = synthesize_scenario(spec), b = synthesize_scenario(spec);
  REQUIRE(a.requests.size() == b.requests.size());
  for (std::size_t k = 0; k < a.requests.size(); ++k) {
    CHECK(a.requests[k].time == b.requests[k].time);
    CHECK(a.requests[k].origin == b.requests[k].origin);
    CHECK(a.requests[k].destination == b.requests[k].destination);
  }
  CHECK(a.initial_positions == b.initial_positions);
}

TEST_CASE("skewed spec concentrates demand") {
  const auto spec = skewed_spec(kGrid, 30, 20.0, {2, 6}, 0.8, 1);
  CHECK(spec.rates[0][2] == doctest::Approx(8.0));
  CHECK(spec.rates[0][6] == doctest::Approx(8.0));
  CHECK(spec.rates[0][0] == doctest::Approx(4.0 / 7.0));
}

TEST_CASE("no demand: only the first legs cost anything") {
  auto sc = synthesize_scenario(quiet_spec(5));
  const auto stations = geo::generate_stations(kGrid, 5, 3);
  engine::RhcConfig cfg;
  cfg.beta = {1.0};
  const auto model = testing::constant_model(Vector(9, 0.0));
  const auto run = run_dispatch_sim(sc, model, cfg, stations);
  CHECK(run.metrics.ticks[0].idle_miles > 0.0);
  for (std::size_t t = 1; t < run.metrics.ticks.size(); ++t)
    CHECK(run.metrics.ticks[t].idle_miles == doctest::Approx(0.0));
  CHECK(run.metrics.counted_ticks() == 0);

  // A fleet already parked at its stations never moves.
  for (std::size_t i = 0; i < 5; ++i)
    sc.initial_positions[i] = stations.station(i, kGrid.assign_region(sc.initial_positions[i]));
  CHECK(run_dispatch_sim(sc, model, cfg, stations).metrics.total_idle_miles() == 0.0);
}

TEST_CASE("one taxi, one request at its station") {
  auto spec = quiet_spec(1);
  SimScenario sc;
  sc.spec = spec;
  const auto stations = geo::generate_stations(kGrid, 1, 9);
  sc.initial_positions = {stations.station(0, 4)};
  Request r;
  r.time = 100;
  r.origin_region = 4;
  r.origin = stations.station(0, 4);
  r.dest_region = 4;
  r.destination = stations.station(0, 4);
  sc.requests = {r};
  Vector mean(9, 0.0);
  mean[4] = 1.0;
  engine::RhcConfig cfg;
  const auto run = run_dispatch_sim(sc, testing::constant_model(mean), cfg, stations);
  CHECK(run.metrics.total_idle_miles() == doctest::Approx(0.0));
  CHECK(run.metrics.requests_served == 1);
  CHECK(run.metrics.ticks[0].mismatch_error == doctest::Approx(0.0));
}

TEST_CASE("dispatch beats the baseline on skewed demand") {
  const auto spec = skewed_spec(kGrid, 30, 20.0, {2, 6}, 0.8, 7);
  const auto sc = synthesize_scenario(spec);
  engine::RhcConfig cfg;
  cfg.beta = {0.5};
  const auto model = model_from_scenario(spec, cfg, {18, 50, 1.0, 7});
  const auto stations = geo::generate_stations(kGrid, 30, derive_seed(7, "stations"));
  const auto disp = run_dispatch_sim(sc, model, cfg, stations);
  const auto base = run_baseline(sc, cfg.t2, cfg.t1);
  CHECK(base.metrics.mean_mismatch_error() > 0.0);
  CHECK(disp.metrics.mean_mismatch_error() < base.metrics.mean_mismatch_error());
  CHECK(disp.steps.size() == 24);

  SUBCASE("fleet is conserved and mileage adds up") {
    for (const auto* run : {&disp, &base}) {
      for (const auto& t : run->metrics.ticks) CHECK(t.vacant + t.occupied == 30);
      double idle = 0.0;
      for (const auto& l : run->taxis) {
        CHECK(l.idle_miles + l.occupied_miles == doctest::Approx(l.total_miles).epsilon(1e-12));
        idle += l.idle_miles;
      }
      CHECK(idle == doctest::Approx(run->metrics.total_idle_miles()));
      double hourly = 0.0;
      for (double h : run->metrics.hourly_idle_miles) hourly += h;
      CHECK(hourly == doctest::Approx(idle));
      for (const auto& t : run->metrics.ticks) {
        CHECK(t.mismatch_error >= 0.0);
        CHECK(t.mismatch_error <= 2.0 + 1e-12);
      }
    }
  }
}

TEST_CASE("history model tracks the scenario rates") {
  const auto spec = skewed_spec(kGrid, 30, 20.0, {2, 6}, 0.8, 3);
  engine::RhcConfig cfg;
  const auto model = model_from_scenario(spec, cfg, {18, 50, 1.0, 3});
  model.validate();
  CHECK(model.num_days == 18);
  double total = 0.0;
  for (int h = 1; h <= 24; ++h)
    for (double v : model.mean(h)) total += v;
  CHECK(total / 24.0 == doctest::Approx(20.0).epsilon(0.05));
}

TEST_CASE("replay of a recorded baseline reproduces its metrics") {
  const auto spec = skewed_spec(kGrid, 12, 10.0, {0}, 0.7, 5);
  const auto sc = synthesize_scenario(spec);
  const std::int64_t epoch = 1'700'000'000 - 1'700'000'000 % 86400;
  const auto fleet = record_baseline_trace(sc, 60, 60, epoch);
  const auto base = run_baseline(sc, 60, 60);
  const auto replay = replay_baseline(fleet, kGrid, 60);

  double vacant_miles = 0.0;
  for (const auto& [id, records] : fleet)
    vacant_miles += trace::trace_mileage(records, trace::MileageFilter::kVacant);
  CHECK(replay.total_idle_miles() == doctest::Approx(vacant_miles));
  CHECK(replay.total_idle_miles() == doctest::Approx(base.metrics.total_idle_miles()));
  CHECK(replay.requests_total == base.metrics.requests_served);
}

TEST_CASE("replay of a parked fleet is all zeros") {
  trace::FleetTrace fleet;
  for (int i = 0; i < 3; ++i)
    for (int k = 0; k < 5; ++k)
      fleet["cab" + std::to_string(i)].push_back(
          {"cab" + std::to_string(i), kGrid.center(i), false, 86400 + 600 * k});
  const auto m = replay_baseline(fleet, kGrid, 60);
  CHECK(m.total_idle_miles() == 0.0);
  CHECK(m.mean_mismatch_error() == 0.0);
  CHECK(m.requests_total == 0);
}

TEST_CASE("comparison arithmetic") {
  const auto spec = skewed_spec(kGrid, 6, 5.0, {1}, 0.9, 2);
  const auto base = run_baseline(synthesize_scenario(spec), 60, 60).metrics;
  const auto same = compare_metrics(base, base);
  CHECK(same.idle_change_pct == 0.0);
  CHECK(same.mismatch_change_pct == 0.0);
  CHECK(percent_change(2.056, 4.519) == doctest::Approx(-54.5).epsilon(1e-3));
  SimMetrics shorter = base;
  shorter.ticks.pop_back();
  CHECK_THROWS_AS(compare_metrics(shorter, base), std::invalid_argument);
}

TEST_CASE("metrics CSV layout") {
  SimMetrics m;
  m.arm = "baseline";
  m.ticks.resize(2);
  m.ticks[0].counted = true;
  m.ticks[0].mismatch_error = 0.25;
  m.ticks[0].idle_miles = 1.5;
  std::ostringstream out;
  write_metrics_csv(out, m, 10.0);
  CHECK(out.str() ==
        "# taxi-rhc metrics v1 arm=baseline tick_minutes=60 beta=10\n"
        "slot,mismatch_error,idle_miles\n1,0.25,1.5\n2,,0\n");
}
