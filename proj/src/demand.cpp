#include "taxi_rhc/demand.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <random>
#include <stdexcept>

#include <json.hpp>

#include "taxi_rhc/seed.hpp"

namespace rhc::demand {

namespace {

// Running mean, m += (x - m) / (k + 1): constant inputs come back bit-exact.
void accumulate(Vector& mean, const Vector& x, std::size_t k) {
  const double w = 1.0 / static_cast<double>(k + 1);
  for (std::size_t j = 0; j < mean.size(); ++j) mean[j] += (x[j] - mean[j]) * w;
}

}  // namespace

BootstrapResult bootstrap_mean(std::span<const Vector> daily, int samples,
                               std::uint64_t seed) {
  if (daily.empty()) throw std::invalid_argument("bootstrap needs at least one day of data");
  if (samples < 1) throw std::invalid_argument("bootstrap needs B >= 1");
  const std::size_t n = daily.front().size();
  for (const auto& v : daily)
    if (v.size() != n) throw std::invalid_argument("daily vectors differ in length");

  const std::size_t d = daily.size();
  BootstrapResult result;
  result.samples.assign(static_cast<std::size_t>(samples), Vector(n, 0.0));
  for (int b = 0; b < samples; ++b) {
    std::mt19937_64 rng(derive_seed(seed, static_cast<std::uint64_t>(b)));
    std::uniform_int_distribution<std::size_t> pick(0, d - 1);
    auto& sample = result.samples[static_cast<std::size_t>(b)];
    for (std::size_t draw = 0; draw < d; ++draw) accumulate(sample, daily[pick(rng)], draw);
  }
  result.mean.assign(n, 0.0);
  for (std::size_t b = 0; b < result.samples.size(); ++b)
    accumulate(result.mean, result.samples[b], b);
  return result;
}

Vector bootstrap_variance(std::span<const Vector> samples) {
  if (samples.empty()) throw std::invalid_argument("variance needs at least one sample");
  const std::size_t n = samples.front().size();
  Vector mean(n, 0.0);
  for (std::size_t b = 0; b < samples.size(); ++b) accumulate(mean, samples[b], b);
  Vector var(n, 0.0);
  for (const auto& s : samples) {
    for (std::size_t j = 0; j < n; ++j) {
      const double dev = s[j] - mean[j];
      var[j] += dev * dev;
    }
  }
  for (double& v : var) v /= static_cast<double>(samples.size());
  return var;
}

std::pair<Vector, Vector> demand_interval(const Vector& mean, const Vector& variance,
                                          double multiplier) {
  if (mean.size() != variance.size())
    throw std::invalid_argument("mean and variance differ in length");
  if (!(multiplier >= 0.0)) throw std::invalid_argument("interval multiplier must be >= 0");
  Vector lo(mean.size()), hi(mean.size());
  for (std::size_t j = 0; j < mean.size(); ++j) {
    if (variance[j] < 0.0) throw std::invalid_argument("variance must be nonnegative");
    const double sd = multiplier * std::sqrt(variance[j]);
    lo[j] = std::max(mean[j] - sd, 0.0);
    hi[j] = mean[j] + sd;
  }
  return {lo, hi};
}

Matrix estimate_mobility(const Matrix& counts) {
  if (counts.rows() != counts.cols()) throw std::invalid_argument("counts must be square");
  const std::size_t n = counts.rows();
  Matrix c(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    double total = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (counts(i, j) < 0.0) throw std::invalid_argument("negative trajectory count");
      total += counts(i, j);
    }
    if (total <= 0.0) {
      c(i, i) = 1.0;
      continue;
    }
    for (std::size_t j = 0; j < n; ++j) c(i, j) = counts(i, j) / total;
  }
  return c;
}

Vector dropoff_probability(const Vector& dropoffs) {
  double total = 0.0;
  for (double x : dropoffs) {
    if (x < 0.0) throw std::invalid_argument("negative drop-off count");
    total += x;
  }
  if (dropoffs.empty()) return {};
  if (total <= 0.0) return Vector(dropoffs.size(), 1.0 / static_cast<double>(dropoffs.size()));
  Vector pd(dropoffs.size());
  for (std::size_t j = 0; j < pd.size(); ++j) pd[j] = dropoffs[j] / total;
  return pd;
}

void DemandModel::validate() const {
  trace::check_slot_minutes(request_slot_minutes);
  trace::check_slot_minutes(mobility_slot_minutes);
  const auto s1 = static_cast<std::size_t>(num_request_slots());
  const auto s2 = static_cast<std::size_t>(num_mobility_slots());
  if (num_regions == 0) throw std::invalid_argument("model has no regions");
  auto check_vectors = [&](const std::vector<Vector>& vs, const char* name) {
    if (vs.size() != s1)
      throw std::invalid_argument(std::string(name) + " must have one vector per t1 slot");
    for (const auto& v : vs) {
      if (v.size() != num_regions)
        throw std::invalid_argument(std::string(name) + " vector has wrong length");
      for (double x : v)
        if (!(x >= 0.0) || !std::isfinite(x))
          throw std::invalid_argument(std::string(name) + " must be finite and >= 0");
    }
  };
  check_vectors(request_mean, "request_mean");
  check_vectors(request_variance, "request_variance");
  check_vectors(request_lower, "request_lower");
  check_vectors(request_upper, "request_upper");
  check_vectors(dropoff_mean, "dropoff_mean");
  for (std::size_t h = 0; h < s1; ++h) {
    for (std::size_t j = 0; j < num_regions; ++j) {
      if (request_lower[h][j] > request_mean[h][j] + 1e-12 ||
          request_mean[h][j] > request_upper[h][j] + 1e-12)
        throw std::invalid_argument("demand interval must contain the mean (slot " +
                                    std::to_string(h + 1) + ")");
    }
  }
  if (mobility.size() != s2)
    throw std::invalid_argument("mobility must have one matrix per t2 slot");
  for (std::size_t h = 0; h < s2; ++h) {
    const auto& c = mobility[h];
    if (c.rows() != num_regions || c.cols() != num_regions)
      throw std::invalid_argument("mobility matrix has wrong shape");
    for (std::size_t i = 0; i < num_regions; ++i) {
      double sum = 0.0;
      for (std::size_t j = 0; j < num_regions; ++j) {
        if (c(i, j) < 0.0 || c(i, j) > 1.0)
          throw std::invalid_argument("mobility entry outside [0,1]");
        sum += c(i, j);
      }
      if (std::abs(sum - 1.0) > 1e-9)
        throw std::invalid_argument("mobility row " + std::to_string(i + 1) + " of slot " +
                                    std::to_string(h + 1) + " does not sum to 1");
    }
  }
}

DemandModel build_model(const trace::SlotCounts& counts,
                        const trace::TransitionCounts& transitions,
                        const EstimateOptions& options) {
  if (counts.days.empty()) throw std::invalid_argument("no days of event data to estimate from");
  if (counts.slot_minutes != options.request_slot_minutes ||
      transitions.slot_minutes != options.mobility_slot_minutes)
    throw std::invalid_argument("count slot lengths do not match the estimate options");
  DemandModel model;
  model.request_slot_minutes = options.request_slot_minutes;
  model.mobility_slot_minutes = options.mobility_slot_minutes;
  model.num_regions = counts.num_regions;
  model.bootstrap_samples = options.bootstrap_samples;
  model.seed = options.seed;
  model.interval_multiplier = options.interval_multiplier;
  model.num_days = counts.days.size();

  const std::size_t n = counts.num_regions;
  const std::uint64_t request_seed = derive_seed(options.seed, "requests");
  const std::uint64_t dropoff_seed = derive_seed(options.seed, "dropoffs");
  const std::uint64_t mobility_seed = derive_seed(options.seed, "mobility");

  for (int h = 1; h <= counts.num_slots(); ++h) {
    const auto row = static_cast<std::size_t>(h) - 1;
    std::vector<Vector> pickups, dropoffs;
    for (const auto& day : counts.days) {
      pickups.emplace_back(day.pickups.row(row).begin(), day.pickups.row(row).end());
      dropoffs.emplace_back(day.dropoffs.row(row).begin(), day.dropoffs.row(row).end());
    }
    // Each slot is resampled independently.
    auto boot = bootstrap_mean(pickups, options.bootstrap_samples,
                               derive_seed(request_seed, static_cast<std::uint64_t>(h)));
    Vector var = bootstrap_variance(boot.samples);
    auto [lo, hi] = demand_interval(boot.mean, var, options.interval_multiplier);
    model.request_mean.push_back(boot.mean);
    model.request_variance.push_back(std::move(var));
    model.request_lower.push_back(std::move(lo));
    model.request_upper.push_back(std::move(hi));
    model.dropoff_mean.push_back(
        bootstrap_mean(dropoffs, options.bootstrap_samples,
                       derive_seed(dropoff_seed, static_cast<std::uint64_t>(h)))
            .mean);
  }

  for (int h = 1; h <= transitions.num_slots(); ++h) {
    const auto idx = static_cast<std::size_t>(h) - 1;
    std::vector<Vector> daily;
    for (const auto& day : transitions.days) daily.push_back(day.per_slot[idx].data());
    Matrix mean_counts(n, n);
    if (!daily.empty()) {
      const auto boot = bootstrap_mean(daily, options.bootstrap_samples,
                                       derive_seed(mobility_seed, static_cast<std::uint64_t>(h)));
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) mean_counts(i, j) = boot.mean[i * n + j];
    }
    model.mobility.push_back(estimate_mobility(mean_counts));
  }
  model.validate();
  return model;
}

DayFilter parse_day_filter(const std::string& text) {
  if (text == "all") return DayFilter::kAll;
  if (text == "weekday") return DayFilter::kWeekday;
  if (text == "weekend") return DayFilter::kWeekend;
  throw std::invalid_argument("day filter must be all, weekday or weekend, got '" + text + "'");
}

std::string to_string(DayFilter f) {
  switch (f) {
    case DayFilter::kAll: return "all";
    case DayFilter::kWeekday: return "weekday";
    case DayFilter::kWeekend: return "weekend";
  }
  return "all";
}

DemandModel estimate_from_trace(const trace::FleetTrace& fleet, const geo::RegionGrid& grid,
                                const EstimateOptions& options, const trace::DayClock& clock,
                                DayFilter filter) {
  auto keep = [&](std::int64_t day) {
    switch (filter) {
      case DayFilter::kAll: return true;
      case DayFilter::kWeekday: return !clock.is_weekend(day);
      case DayFilter::kWeekend: return clock.is_weekend(day);
    }
    return true;
  };
  std::vector<std::int64_t> days;
  for (std::int64_t d : trace::days_in_trace(fleet, clock))
    if (keep(d)) days.push_back(d);
  if (days.empty()) throw std::invalid_argument("trace has no days matching the day filter");

  std::vector<trace::Event> events;
  for (const auto& [id, records] : fleet) {
    for (const auto& e : trace::detect_events(records, grid))
      if (keep(clock.day_index(e.timestamp))) events.push_back(e);
  }
  const auto counts =
      trace::aggregate_counts(events, options.request_slot_minutes, grid.size(), clock, days);

  auto transitions =
      trace::count_transitions(fleet, options.mobility_slot_minutes, grid, clock, days);
  std::erase_if(transitions.days, [&](const auto& d) { return !keep(d.day); });

  DemandModel model = build_model(counts, transitions, options);
  model.day_filter = to_string(filter);
  return model;
}

namespace {

nlohmann::json vectors_to_json(const std::vector<Vector>& vs) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& v : vs) out.push_back(v);
  return out;
}

std::vector<Vector> vectors_from_json(const nlohmann::json& j) {
  std::vector<Vector> out;
  for (const auto& v : j) out.push_back(v.get<Vector>());
  return out;
}

}  // namespace

void save_model(std::ostream& out, const DemandModel& model) {
  nlohmann::json doc;
  doc["format"] = "taxi-rhc-demand-model";
  doc["version"] = DemandModel::kFormatVersion;
  doc["t1_minutes"] = model.request_slot_minutes;
  doc["t2_minutes"] = model.mobility_slot_minutes;
  doc["regions"] = model.num_regions;
  doc["bootstrap_samples"] = model.bootstrap_samples;
  doc["seed"] = model.seed;
  doc["interval_multiplier"] = model.interval_multiplier;
  doc["days"] = model.num_days;
  doc["day_filter"] = model.day_filter;
  doc["request_mean"] = vectors_to_json(model.request_mean);
  doc["request_variance"] = vectors_to_json(model.request_variance);
  doc["request_lower"] = vectors_to_json(model.request_lower);
  doc["request_upper"] = vectors_to_json(model.request_upper);
  doc["dropoff_mean"] = vectors_to_json(model.dropoff_mean);
  nlohmann::json mob = nlohmann::json::array();
  for (const auto& m : model.mobility) {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t i = 0; i < m.rows(); ++i)
      rows.push_back(Vector(m.row(i).begin(), m.row(i).end()));
    mob.push_back(rows);
  }
  doc["mobility"] = mob;
  out << doc.dump(1) << '\n';
}

DemandModel load_model(std::istream& in) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("demand model is not valid JSON: ") + e.what());
  }
  if (doc.value("format", "") != "taxi-rhc-demand-model")
    throw std::runtime_error("not a taxi-rhc demand model file");
  if (doc.value("version", 0) != DemandModel::kFormatVersion)
    throw std::runtime_error("unsupported demand model version");
  DemandModel model;
  try {
    model.request_slot_minutes = doc.at("t1_minutes").get<int>();
    model.mobility_slot_minutes = doc.at("t2_minutes").get<int>();
    model.num_regions = doc.at("regions").get<std::size_t>();
    model.bootstrap_samples = doc.at("bootstrap_samples").get<int>();
    model.seed = doc.at("seed").get<std::uint64_t>();
    model.interval_multiplier = doc.at("interval_multiplier").get<double>();
    model.num_days = doc.at("days").get<std::size_t>();
    model.day_filter = doc.at("day_filter").get<std::string>();
    model.request_mean = vectors_from_json(doc.at("request_mean"));
    model.request_variance = vectors_from_json(doc.at("request_variance"));
    model.request_lower = vectors_from_json(doc.at("request_lower"));
    model.request_upper = vectors_from_json(doc.at("request_upper"));
    model.dropoff_mean = vectors_from_json(doc.at("dropoff_mean"));
    for (const auto& rows : doc.at("mobility")) {
      const std::size_t n = rows.size();
      Matrix m(n, n);
      for (std::size_t i = 0; i < n; ++i) {
        const auto r = rows.at(i).get<Vector>();
        if (r.size() != n) throw std::runtime_error("mobility matrix is not square");
        for (std::size_t j = 0; j < n; ++j) m(i, j) = r[j];
      }
      model.mobility.push_back(std::move(m));
    }
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("malformed demand model: ") + e.what());
  }
  model.validate();
  return model;
}

}  // namespace rhc::demand
