#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "taxi_rhc/trace.hpp"

using namespace rhc;
using namespace rhc::trace;

namespace {

const geo::RegionGrid kGrid(0.0, 3.0, 0.0, 3.0, 3, 3);  // unit cells, regions 0..8

std::vector<TraceRecord> make_records(const std::vector<int>& occupancy, std::int64_t t0 = 0,
                                      std::int64_t dt = 60) {
  std::vector<TraceRecord> out;
  for (std::size_t k = 0; k < occupancy.size(); ++k)
    out.push_back({"cab", {0.5, 0.5 + 0.1 * static_cast<double>(k)}, occupancy[k] == 1,
                   t0 + dt * static_cast<std::int64_t>(k)});
  return out;
}

}  // namespace

TEST_CASE("parse_trace reads one record") {
  std::istringstream in("37.75 -122.39 1 1211018404\n");
  const auto recs = parse_trace(in, "abc");
  REQUIRE(recs.size() == 1);
  CHECK(recs[0].occupied);
  CHECK(recs[0].point.lat == doctest::Approx(37.75));
  CHECK(recs[0].point.lon == doctest::Approx(-122.39));
  CHECK(recs[0].timestamp == 1211018404);
  CHECK(recs[0].taxi_id == "abc");
}

TEST_CASE("parse_trace rejects bad occupancy with the line number") {
  std::istringstream in("37.75 -122.39 0 1211018400\n\n37.75 -122.39 2 1211018404\n");
  try {
    parse_trace(in, "abc");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }
  std::istringstream short_line("37.75 -122.39 1\n");
  CHECK_THROWS_AS(parse_trace(short_line, "x"), ParseError);
  std::istringstream bad_time("37.75 -122.39 1 12.5\n");
  CHECK_THROWS_AS(parse_trace(bad_time, "x"), ParseError);
}

TEST_CASE("parse_trace sorts and keeps the last duplicate") {
  std::istringstream in("1 1 0 10\n2 2 0 5\n3 3 1 10\n");
  const auto recs = parse_trace(in, "t");
  REQUIRE(recs.size() == 2);
  CHECK(recs[0].timestamp == 5);
  CHECK(recs[1].timestamp == 10);
  CHECK(recs[1].point.lat == 3.0);
  CHECK(recs[1].occupied);
  std::istringstream empty("");
  CHECK(parse_trace(empty, "t").empty());
}

TEST_CASE("detect_events follows occupancy transitions") {
  auto ev = detect_events(make_records({0, 0, 1, 1, 0}), kGrid);
  REQUIRE(ev.size() == 2);
  CHECK(ev[0].kind == EventKind::kPickup);
  CHECK(ev[0].timestamp == 120);
  CHECK(ev[1].kind == EventKind::kDropoff);
  CHECK(ev[1].timestamp == 240);
  CHECK(detect_events(make_records({0, 0, 0}), kGrid).empty());
  ev = detect_events(make_records({1, 0, 1}), kGrid);
  REQUIRE(ev.size() == 2);
  CHECK(ev[0].kind == EventKind::kDropoff);
  CHECK(ev[1].kind == EventKind::kPickup);
}

TEST_CASE("aggregate_counts slot rule") {
  const DayClock clock;
  CHECK(clock.slot(17 * 3600 + 30 * 60, 60) == 18);
  CHECK(clock.slot(0, 60) == 1);
  CHECK(clock.slot(17 * 3600, 60) == 17);
  CHECK(clock.slot(86399, 60) == 24);

  const std::int64_t t = 2 * 86400 + 17 * 3600 + 30 * 60;
  const std::vector<Event> events{{EventKind::kPickup, 2, t, {}}};
  const auto counts = aggregate_counts(events, 60, 9, clock);
  CHECK(counts.num_slots() == 24);
  REQUIRE(counts.days.size() == 1);
  CHECK(counts.days[0].day == 2);
  CHECK(counts.days[0].pickups(17, 2) == 1.0);
  double total = 0.0;
  for (double v : counts.days[0].pickups.data()) total += v;
  CHECK(total == 1.0);

  const auto none = aggregate_counts({}, 60, 9, clock, {0, 1});
  CHECK(none.days.size() == 2);
  for (const auto& d : none.days)
    for (double v : d.pickups.data()) CHECK(v == 0.0);
  CHECK_THROWS(aggregate_counts({}, 7, 9, clock));
}

TEST_CASE("day clock handles offsets and weekdays") {
  const DayClock pacific{-7 * 3600};
  CHECK(pacific.day_index(5 * 3600) == -1);
  CHECK(pacific.second_of_day(5 * 3600) == 22 * 3600);
  const DayClock utc;
  CHECK(utc.weekday(0) == 4);  // Thursday
  CHECK(utc.is_weekend(2));
  CHECK_FALSE(utc.is_weekend(4));
}

TEST_CASE("count_transitions") {
  const DayClock clock;
  // trip from region 1 (lat 0.5, lon 1.5) to region 4 (lat 1.5, lon 1.5), starting 17:10
  const std::int64_t start = 17 * 3600 + 10 * 60;
  FleetTrace fleet;
  fleet["a"] = {{"a", {0.5, 0.5}, false, start - 60},
                {"a", {0.5, 1.5}, true, start},
                {"a", {1.5, 1.5}, false, start + 600}};
  // same-region trip and an open trip
  fleet["b"] = {{"b", {2.5, 2.5}, false, 100},
                {"b", {1.5, 1.5}, true, 200},
                {"b", {1.6, 1.6}, false, 300},
                {"b", {1.6, 1.6}, true, 400}};
  const auto tc = count_transitions(fleet, 60, kGrid, clock);
  CHECK(tc.num_slots() == 24);
  const auto at18 = tc.total(18);
  CHECK(at18(1, 4) == 1.0);
  const auto at1 = tc.total(1);
  CHECK(at1(4, 4) == 1.0);
  double total = 0.0;
  for (int h = 1; h <= 24; ++h)
    for (const Matrix m = tc.total(h); double v : m.data()) total += v;
  CHECK(total == 2.0);  // the open trip is discarded
}

TEST_CASE("trace_mileage") {
  std::vector<TraceRecord> recs{{"a", {0, 0}, false, 0}, {"a", {0.1, 0}, false, 60}};
  CHECK(trace_mileage(recs, MileageFilter::kAll) == doctest::Approx(7.0));
  CHECK(trace_mileage({recs[0]}, MileageFilter::kAll) == 0.0);
  std::vector<TraceRecord> mixed{
      {"a", {0, 0}, false, 0}, {"a", {0.1, 0}, true, 60}, {"a", {0.1, 0.1}, false, 120}};
  CHECK(trace_mileage(mixed, MileageFilter::kVacant) == doctest::Approx(7.0));
  CHECK(trace_mileage(mixed, MileageFilter::kOccupied) == doctest::Approx(7.0));
}

TEST_CASE("trace invariants on random traces") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> coord(0.0, 3.0);
  std::bernoulli_distribution flip(0.3);
  const DayClock clock;
  for (int trial = 0; trial < 50; ++trial) {
    FleetTrace fleet;
    std::size_t pickups = 0;
    for (int taxi = 0; taxi < 4; ++taxi) {
      std::vector<TraceRecord> recs;
      bool occ = flip(rng);
      for (int k = 0; k < 40; ++k) {
        if (flip(rng)) occ = !occ;
        recs.push_back({"t", {coord(rng), coord(rng)}, occ, 1000 + 97 * k});
      }
      std::size_t p = 0, d = 0;
      for (const auto& e : detect_events(recs, kGrid)) (e.kind == EventKind::kPickup ? p : d)++;
      CHECK(std::max(p, d) - std::min(p, d) <= 1);
      pickups += p;
      const double all = trace_mileage(recs, MileageFilter::kAll);
      const double split = trace_mileage(recs, MileageFilter::kVacant) +
                           trace_mileage(recs, MileageFilter::kOccupied);
      CHECK(all == doctest::Approx(split).epsilon(1e-12));
      fleet[std::to_string(taxi)] = recs;
    }
    const auto tc = count_transitions(fleet, 30, kGrid, clock);
    double total = 0.0;
    for (int h = 1; h <= tc.num_slots(); ++h)
      for (const Matrix m = tc.total(h); double v : m.data()) total += v;
    CHECK(total <= static_cast<double>(pickups));
  }
}

TEST_CASE("load_trace_dir and csv layout") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "taxi_rhc_trace_test";
  fs::remove_all(dir);
  fs::create_directories(dir);
  {
    std::ofstream f(dir / "new_cab");
    write_trace(f, make_records({0, 1, 0}));
  }
  const auto fleet = load_trace_dir(dir);
  REQUIRE(fleet.count("new_cab") == 1);
  CHECK(fleet.at("new_cab").size() == 3);
  CHECK(fleet.at("new_cab")[0].timestamp == 0);
  CHECK_THROWS(load_trace_dir(dir / "missing"));

  const DayClock clock;
  std::vector<Event> events = detect_events(fleet.at("new_cab"), kGrid);
  std::ostringstream csv;
  write_slot_counts_csv(csv, aggregate_counts(events, 720, 9, clock));
  std::istringstream lines(csv.str());
  std::string header, columns, first;
  std::getline(lines, header);
  std::getline(lines, columns);
  std::getline(lines, first);
  CHECK(header.rfind("# taxi-rhc slot_counts v1", 0) == 0);
  CHECK(columns == "slot,region,pickups,dropoffs");
  CHECK(first == "1,1,1,1");
  fs::remove_all(dir);
}
