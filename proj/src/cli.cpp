#include "taxi_rhc/cli.hpp"

#include <algorithm>
#include <charconv>
#include <exception>
#include <fstream>
#include <future>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "taxi_rhc/demand.hpp"
#include "taxi_rhc/dispatch.hpp"
#include "taxi_rhc/rhc.hpp"
#include "taxi_rhc/seed.hpp"
#include "taxi_rhc/sim.hpp"
#include "taxi_rhc/trace.hpp"

namespace rhc::cli {

namespace fs = std::filesystem;

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> parts;
  std::string item;
  std::istringstream in(line);
  while (std::getline(in, item, sep)) parts.push_back(item);
  if (!line.empty() && line.back() == sep) parts.emplace_back();
  return parts;
}

std::string strip_cr(std::string s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
  return s;
}

bool parse_double(const std::string& text, double& value) {
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  return ec == std::errc() && ptr == text.data() + text.size() && !text.empty();
}

/// `key=value` attributes on a versioned header line.
std::map<std::string, std::string> header_attributes(const std::string& line) {
  std::map<std::string, std::string> attrs;
  std::istringstream in(line);
  for (std::string tok; in >> tok;) {
    const auto eq = tok.find('=');
    if (eq != std::string::npos) attrs[tok.substr(0, eq)] = tok.substr(eq + 1);
  }
  return attrs;
}

std::string grid_text(const geo::RegionGrid& grid) {
  return std::to_string(grid.size()) + " regions (" + std::to_string(grid.rows()) + "x" +
         std::to_string(grid.cols()) + ")";
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot write " + path.string());
  return f;
}

demand::DemandModel read_model_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read demand model " + path.string());
  try {
    return demand::load_model(in);
  } catch (const std::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

void check_model(const demand::DemandModel& model, const config::RunConfig& cfg,
                 const std::string& source) {
  const auto grid = cfg.grid();
  if (model.num_regions != grid.size())
    throw DataError(source + " has " + std::to_string(model.num_regions) +
                    " regions but the configured grid has " + grid_text(grid));
  if (model.request_slot_minutes != cfg.t1)
    throw DataError(source + " uses t1 = " + std::to_string(model.request_slot_minutes) +
                    " minutes but clock.t1 = " + std::to_string(cfg.t1));
}

trace::FleetTrace read_trace_dir(const fs::path& dir) {
  if (dir.empty()) throw DataError("no trace directory given (trace.dir or --trace)");
  trace::FleetTrace fleet;
  try {
    fleet = trace::load_trace_dir(dir);
  } catch (const trace::ParseError&) {
    throw;
  } catch (const std::exception& e) {
    throw DataError(e.what());
  }
  if (fleet.empty()) throw DataError("trace directory " + dir.string() + " holds no files");
  return fleet;
}

void write_config_dump(const config::RunConfig& cfg, const fs::path& dir) {
  auto f = open_out(dir / "config.txt");
  f << "# taxi-rhc config v1\n";
  cfg.write(f, false);
}

}  // namespace

// ---------------------------------------------------------------- fleet file

FleetFile read_fleet(std::istream& in, const geo::RegionGrid& grid, const std::string& source) {
  std::string line;
  if (!std::getline(in, line) || strip_cr(line).rfind("# taxi-rhc fleet v1", 0) != 0)
    throw DataError(source + ": expected header '# taxi-rhc fleet v1'");
  const auto attrs = header_attributes(strip_cr(line));
  if (auto it = attrs.find("regions"); it != attrs.end()) {
    if (it->second != std::to_string(grid.size()))
      throw DataError(source + " was written for " + it->second +
                      " regions but the configured grid has " + grid_text(grid));
  }
  if (!std::getline(in, line) || strip_cr(line) != "taxi_id,lat,lon,occupied")
    throw DataError(source + ": expected column line 'taxi_id,lat,lon,occupied'");
  FleetFile fleet;
  std::size_t line_no = 2;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(line);
    if (line.empty()) continue;
    const auto f = split(line, ',');
    const std::string where = source + ":" + std::to_string(line_no);
    if (f.size() != 4) throw DataError(where + ": expected 4 fields");
    geo::GeoPoint p;
    if (!parse_double(f[1], p.lat) || !parse_double(f[2], p.lon))
      throw DataError(where + ": bad coordinate");
    if (p.lat < grid.min_lat() || p.lat > grid.max_lat() || p.lon < grid.min_lon() ||
        p.lon > grid.max_lon())
      throw DataError(where + ": taxi " + f[0] + " lies outside the configured grid box");
    if (f[3] != "0" && f[3] != "1") throw DataError(where + ": occupied must be 0 or 1");
    if (std::find(fleet.ids.begin(), fleet.ids.end(), f[0]) != fleet.ids.end())
      throw DataError(where + ": duplicate taxi id " + f[0]);
    fleet.ids.push_back(f[0]);
    fleet.positions.push_back(p);
    fleet.occupied.push_back(f[3] == "1");
  }
  if (fleet.ids.empty()) throw DataError(source + ": no taxis");
  return fleet;
}

void write_fleet(std::ostream& out, const FleetFile& fleet, const geo::RegionGrid& grid) {
  const auto old = out.precision(10);
  out << "# taxi-rhc fleet v1 regions=" << grid.size() << '\n';
  out << "taxi_id,lat,lon,occupied\n";
  for (std::size_t i = 0; i < fleet.ids.size(); ++i)
    out << fleet.ids[i] << ',' << fleet.positions[i].lat << ',' << fleet.positions[i].lon << ','
        << (fleet.occupied[i] ? 1 : 0) << '\n';
  out.precision(old);
}

// ------------------------------------------------------------------- report

double total_cost(double mismatch_error, double idle_distance, double beta) {
  return mismatch_error + beta * idle_distance;
}

MetricsSummary summarize_metrics(std::istream& in, const std::string& source,
                                 double baseline_beta) {
  std::string line;
  if (!std::getline(in, line) || strip_cr(line).rfind("# taxi-rhc metrics v1", 0) != 0)
    throw DataError(source + ": schema mismatch, expected header '# taxi-rhc metrics v1'");
  const auto attrs = header_attributes(strip_cr(line));
  MetricsSummary s;
  s.source = source;
  s.arm = attrs.count("arm") ? attrs.at("arm") : "";
  if (s.arm.empty()) throw DataError(source + ": header has no arm");
  if (!attrs.count("beta") || !parse_double(attrs.at("beta"), s.beta))
    throw DataError(source + ": header has no numeric beta");
  if (!std::getline(in, line) || strip_cr(line) != "slot,mismatch_error,idle_miles")
    throw DataError(source + ": schema mismatch, expected columns 'slot,mismatch_error,idle_miles'");

  double err_sum = 0.0, idle_sum = 0.0;
  std::size_t line_no = 2;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(line);
    if (line.empty()) continue;
    const auto f = split(line, ',');
    const std::string where = source + ":" + std::to_string(line_no);
    if (f.size() != 3) throw DataError(where + ": schema mismatch, expected 3 fields");
    double idle = 0.0;
    if (!parse_double(f[2], idle)) throw DataError(where + ": bad idle_miles");
    if (!f[1].empty()) {
      double e = 0.0;
      if (!parse_double(f[1], e)) throw DataError(where + ": bad mismatch_error");
      err_sum += e;
      ++s.counted;
    }
    idle_sum += idle;
    ++s.slots;
  }
  if (s.slots == 0) throw DataError(source + ": no metric rows");
  s.mismatch_error = s.counted ? err_sum / static_cast<double>(s.counted) : 0.0;
  s.idle_distance = idle_sum / static_cast<double>(s.slots);
  s.cost_beta = s.arm == "dispatch" ? s.beta : baseline_beta;
  s.cost = total_cost(s.mismatch_error, s.idle_distance, s.cost_beta);
  return s;
}

std::vector<MetricsSummary> group_summaries(const std::vector<MetricsSummary>& files) {
  std::vector<MetricsSummary> groups;
  std::vector<std::size_t> members;
  for (const auto& f : files) {
    auto it = std::find_if(groups.begin(), groups.end(), [&](const MetricsSummary& g) {
      return g.arm == f.arm && g.beta == f.beta;
    });
    if (it == groups.end()) {
      groups.push_back(f);
      groups.back().source = "1";
      members.push_back(1);
      continue;
    }
    const auto g = static_cast<std::size_t>(it - groups.begin());
    const double m = static_cast<double>(members[g]);
    it->mismatch_error = (it->mismatch_error * m + f.mismatch_error) / (m + 1.0);
    it->idle_distance = (it->idle_distance * m + f.idle_distance) / (m + 1.0);
    it->slots += f.slots;
    it->counted += f.counted;
    members[g] += 1;
    it->source = std::to_string(members[g]);
  }
  for (auto& g : groups) g.cost = total_cost(g.mismatch_error, g.idle_distance, g.cost_beta);
  return groups;
}

void write_report(std::ostream& out, const std::vector<MetricsSummary>& rows) {
  const auto flags = out.flags();
  const auto prec = out.precision();
  out << std::left << std::setw(10) << "arm" << std::right << std::setw(8) << "beta"
      << std::setw(7) << "files" << std::setw(12) << "s/d error" << std::setw(15)
      << "idle distance" << std::setw(12) << "total cost" << '\n';
  out.setf(std::ios::fixed);
  out.precision(3);
  for (const auto& r : rows)
    out << std::left << std::setw(10) << r.arm << std::right << std::setw(8) << r.beta
        << std::setw(7) << r.source << std::setw(12) << r.mismatch_error << std::setw(15)
        << r.idle_distance << std::setw(12) << r.cost << '\n';
  out.flags(flags);
  out.precision(prec);
}

void write_report_csv(std::ostream& out, const std::vector<MetricsSummary>& rows) {
  const auto old = out.precision(10);
  out << "# taxi-rhc report v1\n";
  out << "arm,beta,files,slots,counted_slots,sd_error,idle_distance,cost_beta,total_cost\n";
  for (const auto& r : rows)
    out << r.arm << ',' << r.beta << ',' << r.source << ',' << r.slots << ',' << r.counted << ','
        << r.mismatch_error << ',' << r.idle_distance << ',' << r.cost_beta << ',' << r.cost
        << '\n';
  out.precision(old);
}

int cmd_report(const std::vector<fs::path>& inputs, const config::RunConfig& cfg,
               const fs::path* out_dir, std::ostream& out) {
  if (inputs.empty()) throw DataError("report needs at least one metrics file");
  std::vector<fs::path> files;
  for (const auto& p : inputs) {
    if (fs::is_directory(p)) {
      std::vector<fs::path> found;
      for (const auto& e : fs::recursive_directory_iterator(p)) {
        const auto name = e.path().filename().string();
        if (e.is_regular_file() && name.rfind("metrics_", 0) == 0 &&
            e.path().extension() == ".csv")
          found.push_back(e.path());
      }
      std::sort(found.begin(), found.end());
      if (found.empty()) throw DataError("no metrics_*.csv files under " + p.string());
      files.insert(files.end(), found.begin(), found.end());
    } else {
      files.push_back(p);
    }
  }
  std::vector<MetricsSummary> summaries;
  for (const auto& f : files) {
    std::ifstream in(f);
    if (!in) throw DataError("cannot read metrics file " + f.string());
    summaries.push_back(summarize_metrics(in, f.string(), cfg.report_baseline_beta));
  }
  const auto rows = group_summaries(summaries);
  write_report(out, rows);
  if (out_dir) {
    fs::create_directories(*out_dir);
    auto f = open_out(*out_dir / "report.csv");
    write_report_csv(f, rows);
  }
  return kOk;
}

// ----------------------------------------------------------------- estimate

int cmd_estimate(const config::RunConfig& cfg, std::ostream& out) {
  const auto grid = cfg.grid();
  const auto fleet = read_trace_dir(cfg.trace_dir);
  auto options = cfg.estimate_options();
  options.seed = derive_seed(cfg.seed, "model");
  demand::DemandModel model;
  try {
    model = demand::estimate_from_trace(fleet, grid, options, cfg.clock(), cfg.days);
  } catch (const std::invalid_argument& e) {
    throw DataError(e.what());
  }

  fs::create_directories(cfg.out);
  {
    auto f = open_out(cfg.out / "model.json");
    demand::save_model(f, model);
  }
  // Raw counts behind the model, for inspection.
  const auto clock = cfg.clock();
  std::vector<trace::Event> events;
  for (const auto& [id, records] : fleet) {
    auto e = trace::detect_events(records, grid);
    events.insert(events.end(), e.begin(), e.end());
  }
  const auto days = trace::days_in_trace(fleet, clock);
  {
    auto f = open_out(cfg.out / "slot_counts.csv");
    trace::write_slot_counts_csv(f, trace::aggregate_counts(events, cfg.t1, grid.size(), clock, days));
  }
  {
    auto f = open_out(cfg.out / "transition_counts.csv");
    trace::write_transition_counts_csv(
        f, trace::count_transitions(fleet, cfg.t2, grid, clock, days));
  }
  write_config_dump(cfg, cfg.out);

  out << "model: " << model.num_days << " day(s) [" << demand::to_string(cfg.days) << "], "
      << model.num_regions << " regions, B = " << model.bootstrap_samples << '\n';
  const auto flags = out.flags();
  const auto prec = out.precision();
  out << std::setw(5) << "slot" << std::setw(12) << "requests" << std::setw(12) << "lower"
      << std::setw(12) << "upper" << '\n';
  out.setf(std::ios::fixed);
  out.precision(3);
  for (int h = 1; h <= model.num_request_slots(); ++h) {
    double m = 0.0, lo = 0.0, hi = 0.0;
    for (std::size_t j = 0; j < model.num_regions; ++j) {
      m += model.mean(h)[j];
      lo += model.lower(h)[j];
      hi += model.upper(h)[j];
    }
    out << std::setw(5) << h << std::setw(12) << m << std::setw(12) << lo << std::setw(12) << hi
        << '\n';
  }
  out.flags(flags);
  out.precision(prec);
  return kOk;
}

// ----------------------------------------------------------------- dispatch

int cmd_dispatch(const config::RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const auto grid = cfg.grid();
  const auto ecfg = cfg.engine();
  if (cfg.model_path.empty()) throw DataError("no demand model given (model.path or --model)");
  const auto model = read_model_file(cfg.model_path);
  check_model(model, cfg, cfg.model_path.string());
  if (cfg.fleet_path.empty()) throw DataError("no fleet snapshot given (fleet.snapshot or --fleet)");
  std::ifstream fin(cfg.fleet_path);
  if (!fin) throw DataError("cannot read fleet snapshot " + cfg.fleet_path.string());
  const auto fleet = read_fleet(fin, grid, cfg.fleet_path.string());

  const auto stations =
      geo::generate_stations(grid, fleet.ids.size(), derive_seed(cfg.seed, "stations"));
  engine::FleetSnapshot snapshot;
  for (std::size_t i = 0; i < fleet.ids.size(); ++i) {
    if (fleet.occupied[i])
      snapshot.occupied.push_back(fleet.positions[i]);
    else
      snapshot.vacant.push_back({i, fleet.positions[i]});
  }
  if (snapshot.vacant.empty()) throw DataError(cfg.fleet_path.string() + ": no vacant taxis");

  auto state = engine::RhcState::starting_at(cfg.dispatch_slot, ecfg);
  engine::refresh(state, snapshot, model, ecfg);
  const auto instance = engine::build_instance(state, model, ecfg, stations);

  dispatch::DispatchPlan plan;
  try {
    plan = dispatch::solve_dispatch(instance, ecfg.solver);
  } catch (const dispatch::InfeasibleInstance& e) {
    err << "infeasible: " << e.what() << " (taxi " << fleet.ids[snapshot.vacant[e.taxi()].id]
        << ")\n";
    return kInfeasible;
  }
  if (plan.status != lp::Status::kOptimal) {
    err << "dispatch LP not solved: " << lp::to_string(plan.status) << '\n';
    return kInfeasible;
  }

  fs::create_directories(cfg.out);
  {
    auto f = open_out(cfg.out / "plan.csv");
    f.precision(10);
    f << "# taxi-rhc plan v1 mode=" << engine::to_string(cfg.mode) << " slot=" << cfg.dispatch_slot
      << " regions=" << grid.size() << '\n';
    f << "taxi_id,origin_region,dispatched_region,station_lat,station_lon,d1\n";
    for (std::size_t i = 0; i < snapshot.vacant.size(); ++i) {
      const auto& v = snapshot.vacant[i];
      const auto& st = stations.station(v.id, plan.regions[i]);
      f << fleet.ids[v.id] << ',' << grid.assign_region(v.position) + 1 << ','
        << plan.regions[i] + 1 << ',' << st.lat << ',' << st.lon << ','
        << plan.first_step_distance[i] << '\n';
    }
  }
  {
    auto f = open_out(cfg.out / "objective.csv");
    f.precision(10);
    f << "# taxi-rhc objective v1 lp_objective=" << plan.lp_objective
      << " alpha_slack=" << plan.alpha_slack << '\n';
    f << "step,beta,mismatch,distance\n";
    for (std::size_t k = 0; k < plan.objective.mismatch.size(); ++k)
      f << k + 1 << ',' << instance.beta[k] << ',' << plan.objective.mismatch[k] << ','
        << plan.objective.distance[k] << '\n';
  }
  write_config_dump(cfg, cfg.out);

  const auto flags = out.flags();
  const auto prec = out.precision();
  out.setf(std::ios::fixed);
  out.precision(6);
  out << "status optimal, " << plan.iterations << " pivots, " << snapshot.vacant.size()
      << " vacant / " << snapshot.occupied.size() << " occupied\n";
  out << "step      beta     J_E          J_D\n";
  for (std::size_t k = 0; k < plan.objective.mismatch.size(); ++k)
    out << std::setw(4) << k + 1 << std::setw(10) << instance.beta[k] << std::setw(12)
        << plan.objective.mismatch[k] << std::setw(12) << plan.objective.distance[k] << '\n';
  out << "J_E total " << plan.objective.mismatch_total() << ", J_D total "
      << plan.objective.distance_total() << ", objective " << plan.objective.total << '\n';
  out << "rounded first step: alpha slack " << plan.alpha_slack << " deg\n";
  out.flags(flags);
  out.precision(prec);
  return kOk;
}

// ----------------------------------------------------------------- simulate

namespace {

/// Runs both arms for one configuration and writes its artifacts to cfg.out.
void simulate_point(const config::RunConfig& cfg, std::ostream& out) {
  cfg.validate();
  const auto grid = cfg.grid();
  const auto ecfg = cfg.engine();
  fs::create_directories(cfg.out);

  sim::ScenarioSpec spec;
  demand::DemandModel model;
  std::optional<sim::SimMetrics> replay;
  if (cfg.scenario_source == "trace") {
    const auto fleet = read_trace_dir(cfg.trace_dir);
    auto options = cfg.estimate_options();
    options.seed = derive_seed(cfg.seed, "model");
    try {
      model = demand::estimate_from_trace(fleet, grid, options, cfg.clock(), cfg.days);
    } catch (const std::invalid_argument& e) {
      throw DataError(e.what());
    }
    replay = sim::replay_baseline(fleet, grid, cfg.t2, cfg.clock(), cfg.miles_per_degree);
    replay->arm = "replay";
    spec = sim::spec_from_model(model, grid, cfg.fleet_size, derive_seed(cfg.seed, "requests"));
  } else {
    std::vector<std::size_t> hot;
    for (auto r : cfg.hot_regions) hot.push_back(r - 1);
    spec = sim::skewed_spec(grid, cfg.fleet_size, cfg.total_rate, hot, cfg.hot_share,
                            derive_seed(cfg.seed, "requests"));
  }
  spec.days = cfg.scenario_days;
  spec.trip_ticks = cfg.trip_ticks;
  if (!cfg.model_path.empty()) {
    model = read_model_file(cfg.model_path);
    check_model(model, cfg, cfg.model_path.string());
  } else if (cfg.scenario_source != "trace") {
    sim::HistoryOptions h;
    h.history_days = cfg.history_days;
    h.bootstrap_samples = cfg.history_bootstrap;
    h.interval_multiplier = cfg.interval_multiplier;
    h.seed = derive_seed(cfg.seed, "history");
    model = sim::model_from_scenario(spec, ecfg, h);
  }

  const auto scenario = sim::synthesize_scenario(spec);
  const auto stations =
      geo::generate_stations(grid, cfg.fleet_size, derive_seed(cfg.seed, "stations"));
  const auto dispatched = sim::run_dispatch_sim(scenario, model, ecfg, stations, cfg.miles_per_degree);
  const auto baseline = sim::run_baseline(scenario, cfg.t2, cfg.t1, cfg.miles_per_degree);
  const double beta = ecfg.beta_at(0);
  const auto cmp = sim::compare_metrics(dispatched.metrics, baseline.metrics);

  auto emit = [&](const sim::SimMetrics& m) {
    auto f = open_out(cfg.out / ("metrics_" + m.arm + ".csv"));
    sim::write_metrics_csv(f, m, beta);
    auto h = open_out(cfg.out / ("hourly_" + m.arm + ".csv"));
    sim::write_hourly_csv(h, m);
  };
  emit(dispatched.metrics);
  emit(baseline.metrics);
  if (replay) emit(*replay);
  {
    auto f = open_out(cfg.out / "orders.csv");
    engine::write_orders_header(f);
    for (const auto& s : dispatched.steps) engine::write_orders(f, s);
  }
  {
    auto f = open_out(cfg.out / "summary.csv");
    sim::write_summary_header(f);
    sim::write_summary_row(f, dispatched.metrics, beta);
    sim::write_summary_row(f, baseline.metrics, beta);
    if (replay) sim::write_summary_row(f, *replay, beta);
  }
  {
    auto f = open_out(cfg.out / "comparison.csv");
    sim::write_comparison_csv(f, cmp);
    auto t = open_out(cfg.out / "comparison.txt");
    sim::write_comparison(t, cmp);
  }
  {
    auto f = open_out(cfg.out / "model.json");
    demand::save_model(f, model);
  }
  write_config_dump(cfg, cfg.out);

  std::size_t fallbacks = 0;
  for (const auto& s : dispatched.steps) fallbacks += s.fallback ? 1 : 0;
  out << "requests " << dispatched.metrics.requests_total << ", served dispatch "
      << dispatched.metrics.requests_served << " / baseline " << baseline.metrics.requests_served
      << ", stay-in-place fallbacks " << fallbacks << '\n';
  sim::write_comparison(out, cmp);
}

struct SweepSpec {
  std::string name;  // as given, used for directory names
  std::string key;   // resolved key path
  std::vector<std::string> values;
};

SweepSpec parse_sweep(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0 || eq + 1 == text.size())
    throw config::ConfigError("sweep", "expected key=v1,v2,..., got '" + text + "'");
  SweepSpec s;
  s.name = text.substr(0, eq);
  s.key = config::resolve_alias(s.name);
  s.values = split(text.substr(eq + 1), ',');
  for (const auto& v : s.values)
    if (v.empty()) throw config::ConfigError("sweep", "empty value in '" + text + "'");
  return s;
}

}  // namespace

int cmd_simulate(const config::RunConfig& cfg, const std::string& sweep, std::ostream& out) {
  if (sweep.empty()) {
    simulate_point(cfg, out);
    return kOk;
  }
  const auto s = parse_sweep(sweep);
  std::vector<config::RunConfig> points;
  for (const auto& v : s.values) {
    config::RunConfig c = cfg;
    c.set(s.key, v);
    c.out = cfg.out / (s.name + "=" + v);
    c.validate();
    points.push_back(std::move(c));
  }

  // Independent points; each writes only to its own directory.
  const std::size_t jobs =
      std::max<std::size_t>(1, std::min<std::size_t>(std::thread::hardware_concurrency(), points.size()));
  std::vector<std::ostringstream> logs(points.size());
  std::vector<std::exception_ptr> errors(points.size());
  for (std::size_t first = 0; first < points.size(); first += jobs) {
    std::vector<std::future<void>> running;
    for (std::size_t p = first; p < std::min(points.size(), first + jobs); ++p)
      running.push_back(std::async(std::launch::async, [&, p] {
        try {
          simulate_point(points[p], logs[p]);
        } catch (...) {
          errors[p] = std::current_exception();
        }
      }));
    for (auto& r : running) r.get();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  fs::create_directories(cfg.out);
  auto f = open_out(cfg.out / "sweep.csv");
  f << "# taxi-rhc sweep v1 key=" << s.key << '\n';
  f << "point,arm,beta,slots,counted_slots,mean_mismatch_error,total_idle_miles,requests,served,"
       "occupied_miles\n";
  for (std::size_t p = 0; p < points.size(); ++p) {
    out << "== " << s.name << '=' << s.values[p] << '\n' << logs[p].str();
    std::ifstream summary(points[p].out / "summary.csv");
    std::string line;
    std::getline(summary, line);
    std::getline(summary, line);
    while (std::getline(summary, line))
      if (!line.empty()) f << s.name << '=' << s.values[p] << ',' << line << '\n';
  }
  return kOk;
}

// ---------------------------------------------------------------------- run

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Receding-horizon taxi dispatch: estimate, dispatch, simulate, report", "taxi-rhc"};
  app.require_subcommand(1);

  std::string config_path, seed, out_dir, mode, beta, trace_dir, model_path, fleet_path, days,
      sweep, slot;
  std::vector<std::string> sets;
  std::vector<std::string> report_inputs;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "key = value config file");
    sub->add_option("--seed", seed, "root seed");
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--set", sets, "override any config key: key=value")->take_all();
  };
  auto* estimate = app.add_subcommand("estimate", "bootstrap a demand model from GPS traces");
  common(estimate);
  estimate->add_option("--trace", trace_dir, "directory of per-taxi trace files");
  estimate->add_option("--days", days, "all | weekday | weekend");

  auto* dispatch_cmd = app.add_subcommand("dispatch", "one-shot dispatch for a fleet snapshot");
  common(dispatch_cmd);
  dispatch_cmd->add_option("--model", model_path, "demand model file");
  dispatch_cmd->add_option("--fleet", fleet_path, "fleet snapshot file");
  dispatch_cmd->add_option("--mode", mode, "nominal | robust");
  dispatch_cmd->add_option("--beta", beta, "beta schedule, comma separated");
  dispatch_cmd->add_option("--slot", slot, "t2 period of the day (1-based)");

  auto* simulate = app.add_subcommand("simulate", "run dispatch and baseline arms");
  common(simulate);
  simulate->add_option("--mode", mode, "nominal | robust");
  simulate->add_option("--beta", beta, "beta schedule, comma separated");
  simulate->add_option("--trace", trace_dir, "trace directory (scenario.source = trace)");
  simulate->add_option("--model", model_path, "demand model file for the dispatch arm");
  simulate->add_option("--sweep", sweep, "key=v1,v2,... one run per value");

  auto* report = app.add_subcommand("report", "summarize metrics files");
  common(report);
  report->add_option("files", report_inputs, "metrics files or directories");

  std::vector<const char*> argv{"taxi-rhc"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    config::RunConfig cfg;
    if (!config_path.empty()) cfg = config::load(config_path);
    for (const auto& kv : sets) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos)
        throw config::ConfigError("--set", "expected key=value, got '" + kv + "'");
      cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (!seed.empty()) cfg.set("seed", seed);
    if (!out_dir.empty()) cfg.set("out", out_dir);
    if (!mode.empty()) cfg.set("rhc.mode", mode);
    if (!beta.empty()) cfg.set("rhc.beta", beta);
    if (!trace_dir.empty()) cfg.set("trace.dir", trace_dir);
    if (!model_path.empty()) cfg.set("model.path", model_path);
    if (!fleet_path.empty()) cfg.set("fleet.snapshot", fleet_path);
    if (!days.empty()) cfg.set("demand.days", days);
    if (!slot.empty()) cfg.set("dispatch.slot", slot);
    if (!trace_dir.empty() && *simulate) cfg.set("scenario.source", "trace");
    cfg.validate();

    if (*estimate) return cmd_estimate(cfg, out);
    if (*dispatch_cmd) return cmd_dispatch(cfg, out, err);
    if (*simulate) return cmd_simulate(cfg, sweep, out);
    const fs::path report_out = cfg.out;
    return cmd_report({report_inputs.begin(), report_inputs.end()}, cfg,
                      out_dir.empty() ? nullptr : &report_out, out);
  } catch (const config::ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kUsage;
  } catch (const trace::ParseError& e) {
    err << "trace error: " << e.what() << '\n';
    return kDataError;
  } catch (const DataError& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  }
}

}  // namespace rhc::cli
