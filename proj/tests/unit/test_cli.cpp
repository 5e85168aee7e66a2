#include <doctest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "support/model_fixtures.hpp"
#include "support/temp_dir.hpp"
#include "taxi_rhc/cli.hpp"
#include "taxi_rhc/config.hpp"
#include "taxi_rhc/sim.hpp"

using namespace rhc;
using rhc::testing::slurp;
using rhc::testing::spit;
using rhc::testing::TempDir;

namespace {

const geo::RegionGrid kGrid(37.70, 37.80, -122.50, -122.40, 3, 3);

struct Outcome {
  int code;
  std::string out, err;
};

Outcome invoke(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

// 2024-01-01 00:00 UTC, a Monday.
constexpr std::int64_t kMonday = 1704067200;

void write_traces(const std::filesystem::path& dir, int days) {
  auto spec = sim::skewed_spec(kGrid, 12, 20.0, {2, 6}, 0.8, 11);
  spec.days = days;
  const auto fleet = sim::record_baseline_trace(sim::synthesize_scenario(spec), 60, 60, kMonday);
  std::filesystem::create_directories(dir);
  for (const auto& [id, records] : fleet) {
    std::ofstream f(dir / id);
    trace::write_trace(f, records);
  }
}

std::string fleet_text(std::size_t regions_attr = 9) {
  return "# taxi-rhc fleet v1 regions=" + std::to_string(regions_attr) +
         "\n"
         "taxi_id,lat,lon,occupied\n"
         "a,37.71,-122.49,0\n"
         "b,37.712,-122.488,0\n"
         "c,37.715,-122.492,0\n"
         "d,37.79,-122.41,0\n"
         "e,37.75,-122.45,1\n";
}

void write_model(const std::filesystem::path& p) {
  auto m = rhc::testing::constant_model({0, 0, 6, 0, 0, 0, 2, 0, 0});
  std::ofstream f(p);
  demand::save_model(f, m);
}

std::vector<std::string> data_lines(const std::filesystem::path& p) {
  std::istringstream in(slurp(p));
  std::vector<std::string> lines;
  for (std::string l; std::getline(in, l);)
    if (!l.empty() && l[0] != '#') lines.push_back(l);
  return lines;
}

double column_sum(const std::filesystem::path& p, std::size_t col) {
  double sum = 0.0;
  const auto lines = data_lines(p);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    std::istringstream row(lines[i]);
    std::string field;
    for (std::size_t c = 0; c <= col; ++c) std::getline(row, field, ',');
    sum += std::stod(field);
  }
  return sum;
}

}  // namespace

TEST_CASE("config parsing, key paths and round trip") {
  config::RunConfig cfg;
  CHECK_NOTHROW(cfg.validate());

  std::istringstream in(
      "# comment\n"
      "grid.rows = 2   # trailing comment\n"
      "rhc.beta = 0, 2 ,10\n"
      "rhc.mode = robust\n"
      "seed = 42\n");
  config::apply(cfg, in, "test.cfg");
  CHECK(cfg.rows == 2);
  CHECK(cfg.beta == std::vector<double>{0, 2, 10});
  CHECK(cfg.mode == engine::Mode::kRobust);
  CHECK(cfg.seed == 42);

  std::ostringstream dump;
  cfg.write(dump);
  config::RunConfig back;
  std::istringstream again(dump.str());
  config::apply(back, again, "dump");
  std::ostringstream dump2;
  back.write(dump2);
  CHECK(dump.str() == dump2.str());

  try {
    std::istringstream bad("rhc.bta = 1\n");
    config::apply(cfg, bad, "x.cfg");
    FAIL("unknown key accepted");
  } catch (const config::ConfigError& e) {
    CHECK(e.key() == "rhc.bta");
    CHECK(std::string(e.what()).find("x.cfg:1") != std::string::npos);
  }
  CHECK_THROWS_AS(cfg.set("grid.rows", "three"), config::ConfigError);

  auto check_key = [](config::RunConfig c, const std::string& expected) {
    try {
      c.validate();
      FAIL("validation passed");
    } catch (const config::ConfigError& e) {
      CHECK(e.key() == expected);
    }
  };
  config::RunConfig c;
  c.t2 = 7;
  check_key(c, "clock.t2");
  c = {};
  c.beta = {-1.0};
  check_key(c, "rhc.beta");
  c = {};
  c.hot_regions = {10};
  check_key(c, "scenario.hot_regions");
  c = {};
  c.max_lat = c.min_lat;
  check_key(c, "grid.max_lat");

  CHECK(config::resolve_alias("T") == "rhc.horizon");
  CHECK(config::resolve_alias("t2") == "clock.t2");
  CHECK(config::resolve_alias("fleet.size") == "fleet.size");
  CHECK_THROWS_AS(config::resolve_alias("nope"), config::ConfigError);
}

TEST_CASE("usage errors exit 1") {
  CHECK(invoke({}).code == cli::kUsage);
  CHECK(invoke({"simulate", "--bogus"}).code == cli::kUsage);
  CHECK(invoke({"simulate", "--seed", "x"}).code == cli::kUsage);
  CHECK(invoke({"simulate", "--set", "grid.rows=0"}).code == cli::kUsage);
  CHECK(invoke({"simulate", "--sweep", "nokey=1"}).code == cli::kUsage);
  CHECK(invoke({"dispatch", "--config", "/nonexistent/cfg"}).code == cli::kUsage);
  const auto help = invoke({"--help"});
  CHECK(help.code == cli::kOk);
  CHECK(help.out.find("simulate") != std::string::npos);
}

TEST_CASE("flags win over the config file") {
  TempDir tmp("flags");
  spit(tmp / "run.cfg", "seed = 5\nrhc.beta = 3\nscenario.total_rate = 0\n");
  const auto r = invoke({"simulate", "--config", (tmp / "run.cfg").string(), "--seed", "7", "--out",
                      (tmp / "o").string()});
  REQUIRE(r.code == 0);
  const auto dump = slurp(tmp / "o" / "config.txt");
  CHECK(dump.find("seed = 7\n") != std::string::npos);
  CHECK(dump.find("rhc.beta = 3\n") != std::string::npos);
}

TEST_CASE("estimate: byte-identical reruns, day split, bootstrap of one") {
  TempDir tmp("estimate");
  write_traces(tmp / "trace", 7);
  const auto trace = (tmp / "trace").string();

  REQUIRE(invoke({"estimate", "--trace", trace, "--out", (tmp / "a").string()}).code == 0);
  const auto r = invoke({"estimate", "--trace", trace, "--out", (tmp / "b").string()});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("slot") != std::string::npos);
  for (const char* f : {"model.json", "slot_counts.csv", "transition_counts.csv"})
    CHECK(slurp(tmp / "a" / f) == slurp(tmp / "b" / f));

  REQUIRE(invoke({"estimate", "--trace", trace, "--days", "weekday", "--out", (tmp / "wd").string()})
              .code == 0);
  REQUIRE(invoke({"estimate", "--trace", trace, "--days", "weekend", "--out", (tmp / "we").string()})
              .code == 0);
  auto load = [](const std::filesystem::path& p) {
    std::ifstream in(p);
    return demand::load_model(in);
  };
  CHECK(load(tmp / "wd" / "model.json").num_days == 5);
  CHECK(load(tmp / "we" / "model.json").num_days == 2);

  REQUIRE(invoke({"estimate", "--trace", trace, "--set", "demand.bootstrap=1", "--out",
               (tmp / "b1").string()})
              .code == 0);
  const auto m1 = load(tmp / "b1" / "model.json");
  CHECK(m1.bootstrap_samples == 1);
  CHECK_NOTHROW(m1.validate());

  std::filesystem::create_directories(tmp / "empty");
  const auto empty = invoke({"estimate", "--trace", (tmp / "empty").string(), "--out",
                          (tmp / "x").string()});
  CHECK(empty.code == cli::kDataError);
  CHECK(empty.err.find("no files") != std::string::npos);
  CHECK(invoke({"estimate", "--trace", (tmp / "missing").string()}).code == cli::kDataError);

  spit(tmp / "trace" / "broken", "37.7 -122.4 2 100\n");
  CHECK(invoke({"estimate", "--trace", trace, "--out", (tmp / "y").string()}).code ==
        cli::kDataError);
}

TEST_CASE("dispatch: plan, robust degenerate, beta grid, failures") {
  TempDir tmp("dispatch");
  write_model(tmp / "model.json");
  spit(tmp / "fleet.csv", fleet_text());
  const std::vector<std::string> base{"dispatch", "--model", (tmp / "model.json").string(),
                                      "--fleet", (tmp / "fleet.csv").string()};
  auto with = [&](std::vector<std::string> extra) {
    auto args = base;
    args.insert(args.end(), extra.begin(), extra.end());
    return invoke(args);
  };

  const auto nominal = with({"--out", (tmp / "n").string(), "--beta", "0.1"});
  REQUIRE(nominal.code == 0);
  CHECK(nominal.out.find("J_E total") != std::string::npos);
  const auto plan = data_lines(tmp / "n" / "plan.csv");
  REQUIRE(plan.size() == 5);  // column line + 4 vacant taxis
  CHECK(plan[0] == "taxi_id,origin_region,dispatched_region,station_lat,station_lon,d1");

  // The fixture model has zero variance, so intervals collapse.
  REQUIRE(with({"--out", (tmp / "r").string(), "--beta", "0.1", "--mode", "robust"}).code == 0);
  CHECK(data_lines(tmp / "r" / "plan.csv") == plan);

  std::vector<double> mismatch;
  for (const char* b : {"0", "2", "10"}) {
    const auto dir = tmp / (std::string("b") + b);
    REQUIRE(with({"--out", dir.string(), "--beta", b}).code == 0);
    mismatch.push_back(column_sum(dir / "objective.csv", 2));
  }
  CHECK(mismatch[0] <= mismatch[1] + 1e-9);
  CHECK(mismatch[0] <= mismatch[2] + 1e-9);

  const auto missing = invoke({"dispatch", "--model", (tmp / "nope.json").string(), "--fleet",
                            (tmp / "fleet.csv").string(), "--out", (tmp / "m").string()});
  CHECK(missing.code == cli::kDataError);

  spit(tmp / "fleet4.csv", fleet_text(4));
  auto args = base;
  args[4] = (tmp / "fleet4.csv").string();
  const auto dims = invoke(args);
  CHECK(dims.code == cli::kDataError);
  CHECK(dims.err.find("4 regions") != std::string::npos);
  CHECK(dims.err.find("9 regions") != std::string::npos);

  const auto stuck = with({"--out", (tmp / "s").string(), "--set", "rhc.alpha=0.000001"});
  CHECK(stuck.code == cli::kInfeasible);
  CHECK(stuck.err.find("infeasible") != std::string::npos);
}

TEST_CASE("simulate: deterministic artifacts, sweeps, trace source") {
  TempDir tmp("simulate");
  const std::vector<std::string> files{"metrics_dispatch.csv", "metrics_baseline.csv",
                                       "hourly_dispatch.csv",  "hourly_baseline.csv",
                                       "orders.csv",           "summary.csv",
                                       "comparison.csv",       "model.json"};
  REQUIRE(invoke({"simulate", "--seed", "4", "--out", (tmp / "a").string()}).code == 0);
  REQUIRE(invoke({"simulate", "--seed", "4", "--out", (tmp / "b").string()}).code == 0);
  for (const auto& f : files) {
    CAPTURE(f);
    REQUIRE(std::filesystem::exists(tmp / "a" / f));
    CHECK(slurp(tmp / "a" / f) == slurp(tmp / "b" / f));
  }
  REQUIRE(invoke({"simulate", "--seed", "5", "--out", (tmp / "c").string()}).code == 0);
  CHECK(slurp(tmp / "a" / "orders.csv") != slurp(tmp / "c" / "orders.csv"));

  const auto sw = invoke({"simulate", "--sweep", "beta=0,10", "--out", (tmp / "sw").string()});
  REQUIRE(sw.code == 0);
  CHECK(std::filesystem::exists(tmp / "sw" / "beta=0" / "metrics_dispatch.csv"));
  CHECK(std::filesystem::exists(tmp / "sw" / "beta=10" / "metrics_dispatch.csv"));
  CHECK(data_lines(tmp / "sw" / "sweep.csv").size() == 5);
  CHECK(slurp(tmp / "sw" / "beta=0" / "metrics_dispatch.csv")
            .find("beta=0\n") != std::string::npos);

  REQUIRE(invoke({"simulate", "--sweep", "T=1,3", "--out", (tmp / "T").string()}).code == 0);
  CHECK(slurp(tmp / "T" / "T=3" / "config.txt").find("rhc.horizon = 3\n") != std::string::npos);

  write_traces(tmp / "trace", 2);
  REQUIRE(invoke({"simulate", "--trace", (tmp / "trace").string(), "--set", "fleet.size=12",
               "--out", (tmp / "tr").string()})
              .code == 0);
  CHECK(std::filesystem::exists(tmp / "tr" / "metrics_replay.csv"));
  CHECK(data_lines(tmp / "tr" / "summary.csv").size() == 4);
}

TEST_CASE("report: total cost, grouping and schema errors") {
  CHECK(cli::total_cost(2.049, 1.096, 10.0) == doctest::Approx(13.009).epsilon(1e-12));

  TempDir tmp("report");
  spit(tmp / "metrics_baseline.csv",
       "# taxi-rhc metrics v1 arm=baseline tick_minutes=60 beta=2\n"
       "slot,mismatch_error,idle_miles\n"
       "1,2.000,1.000\n"
       "2,2.098,1.192\n"
       "3,,1.096\n");
  const auto r = invoke({"report", (tmp / "metrics_baseline.csv").string(), "--out",
                      (tmp / "o").string()});
  REQUIRE(r.code == 0);
  std::ifstream in(tmp / "metrics_baseline.csv");
  const auto s = cli::summarize_metrics(in, "f", 10.0);
  CHECK(s.counted == 2);
  CHECK(s.mismatch_error == doctest::Approx(2.049));
  CHECK(s.idle_distance == doctest::Approx(1.096));
  CHECK(s.cost_beta == 10.0);
  CHECK(s.cost == doctest::Approx(13.009));
  CHECK(r.out.find("13.009") != std::string::npos);
  CHECK(slurp(tmp / "o" / "report.csv").find("baseline,2,1,3,2,") != std::string::npos);

  // Dispatch arms are costed with their own beta; equal (arm, beta) files average.
  spit(tmp / "d1.csv",
       "# taxi-rhc metrics v1 arm=dispatch tick_minutes=60 beta=2\n"
       "slot,mismatch_error,idle_miles\n1,1.0,1.0\n");
  spit(tmp / "d2.csv",
       "# taxi-rhc metrics v1 arm=dispatch tick_minutes=60 beta=2\n"
       "slot,mismatch_error,idle_miles\n1,2.0,3.0\n");
  std::vector<cli::MetricsSummary> files;
  for (const char* f : {"d1.csv", "d2.csv"}) {
    std::ifstream fin(tmp / f);
    files.push_back(cli::summarize_metrics(fin, f, 10.0));
  }
  const auto groups = cli::group_summaries(files);
  REQUIRE(groups.size() == 1);
  CHECK(groups[0].mismatch_error == doctest::Approx(1.5));
  CHECK(groups[0].idle_distance == doctest::Approx(2.0));
  CHECK(groups[0].cost == doctest::Approx(1.5 + 2 * 2.0));

  spit(tmp / "empty.csv",
       "# taxi-rhc metrics v1 arm=dispatch tick_minutes=60 beta=2\n"
       "slot,mismatch_error,idle_miles\n");
  CHECK(invoke({"report", (tmp / "empty.csv").string()}).code == cli::kDataError);
  spit(tmp / "other.csv", "# taxi-rhc summary v1\narm,beta\n");
  CHECK(invoke({"report", (tmp / "other.csv").string()}).code == cli::kDataError);
  spit(tmp / "cols.csv",
       "# taxi-rhc metrics v1 arm=dispatch tick_minutes=60 beta=2\nslot,error\n1,2\n");
  CHECK(invoke({"report", (tmp / "cols.csv").string()}).code == cli::kDataError);
  CHECK(invoke({"report"}).code == cli::kDataError);

  REQUIRE(invoke({"simulate", "--sweep", "beta=0,2", "--out", (tmp / "sw").string()}).code == 0);
  const auto dir = invoke({"report", (tmp / "sw").string()});
  REQUIRE(dir.code == 0);
  CHECK(dir.out.find("dispatch") != std::string::npos);
}
