#include <doctest.h>

#include <algorithm>
#include <random>
#include <sstream>

#include "taxi_rhc/demand.hpp"

using namespace rhc;
using namespace rhc::demand;

TEST_CASE("bootstrap_mean of a constant dataset") {
  const std::vector<Vector> daily(5, Vector{1.5, 0.0, 7.0});
  const auto boot = bootstrap_mean(daily, 200, 9);
  CHECK(boot.mean == Vector{1.5, 0.0, 7.0});
  for (const auto& s : boot.samples) CHECK(s == Vector{1.5, 0.0, 7.0});
  CHECK(bootstrap_variance(boot.samples) == Vector{0.0, 0.0, 0.0});
}

TEST_CASE("bootstrap_mean with a single day") {
  const std::vector<Vector> daily{{3.0, 4.0}};
  CHECK(bootstrap_mean(daily, 10, 1).mean == Vector{3.0, 4.0});
}

TEST_CASE("bootstrap_mean at paper scale") {
  std::mt19937_64 rng(1);
  std::poisson_distribution<int> pois(12.0);
  std::vector<Vector> daily(18, Vector(16));
  for (auto& d : daily)
    for (double& x : d) x = pois(rng);
  const auto boot = bootstrap_mean(daily, 1000, 77);
  CHECK(boot.samples.size() == 1000);
  // The bootstrap mean converges to the plain sample mean.
  for (std::size_t j = 0; j < 16; ++j) {
    double plain = 0.0;
    for (const auto& d : daily) plain += d[j];
    plain /= 18.0;
    CHECK(boot.mean[j] == doctest::Approx(plain).epsilon(0.02));
  }
  const auto again = bootstrap_mean(daily, 1000, 77);
  CHECK(again.mean == boot.mean);
  CHECK(bootstrap_mean(daily, 1000, 78).mean != boot.mean);
}

TEST_CASE("bootstrap_mean rejects empty input") {
  CHECK_THROWS_AS(bootstrap_mean(std::vector<Vector>{}, 10, 0), std::invalid_argument);
  CHECK_THROWS_AS(bootstrap_mean(std::vector<Vector>{{1.0}}, 0, 0), std::invalid_argument);
}

TEST_CASE("bootstrap_variance") {
  CHECK(bootstrap_variance(std::vector<Vector>{{0.0}, {2.0}}) == Vector{1.0});
  std::vector<Vector> samples{{1.0, 5.0}, {4.0, -1.0}, {2.5, 3.0}, {0.5, 0.0}};
  const auto v = bootstrap_variance(samples);
  std::reverse(samples.begin(), samples.end());
  const auto w = bootstrap_variance(samples);
  CHECK(v[0] == doctest::Approx(w[0]));
  CHECK(v[1] == doctest::Approx(w[1]));
}

TEST_CASE("demand_interval") {
  auto [lo, hi] = demand_interval({4.0}, {1.0});
  CHECK(lo == Vector{3.0});
  CHECK(hi == Vector{5.0});
  std::tie(lo, hi) = demand_interval({0.5}, {1.0});
  CHECK(lo == Vector{0.0});
  CHECK(hi == Vector{1.5});
  std::tie(lo, hi) = demand_interval({2.0}, {0.0});
  CHECK(lo == Vector{2.0});
  CHECK(hi == Vector{2.0});
  std::tie(lo, hi) = demand_interval({4.0}, {1.0}, 2.0);
  CHECK(lo == Vector{2.0});
  CHECK(hi == Vector{6.0});
}

TEST_CASE("demand_interval contains the mean and stays nonnegative") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  for (int i = 0; i < 500; ++i) {
    const Vector mean{u(rng)}, var{u(rng)};
    const auto [lo, hi] = demand_interval(mean, var);
    CHECK(lo[0] >= 0.0);
    CHECK(lo[0] <= mean[0]);
    CHECK(mean[0] <= hi[0]);
  }
}

TEST_CASE("estimate_mobility") {
  Matrix counts(3, 3);
  counts(0, 1) = 1.0;
  counts(0, 2) = 1.0;
  const auto c = estimate_mobility(counts);
  CHECK(c(0, 0) == 0.0);
  CHECK(c(0, 1) == 0.5);
  CHECK(c(0, 2) == 0.5);
  CHECK(c(1, 1) == 1.0);  // empty row -> self-loop
  CHECK(c(2, 2) == 1.0);
  CHECK(c(1, 0) == 0.0);
}

TEST_CASE("estimate_mobility reproduces a published row from scaled counts") {
  const Vector row{0.0032, 0.0337, 0.5144, 0.0278, 0.0132, 0.0577, 0.1966, 0.0263,
                   0.0001, 0.0050, 0.0340, 0.0136, 0.0018, 0.0082, 0.0248, 0.0396};
  Matrix counts(16, 16);
  for (std::size_t j = 0; j < 16; ++j) counts(4, j) = row[j] * 10000.0;
  const auto c = estimate_mobility(counts);
  double sum = 0.0;
  for (std::size_t j = 0; j < 16; ++j) {
    CHECK(c(4, j) == doctest::Approx(row[j]).epsilon(1e-3));
    sum += c(4, j);
  }
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("estimate_mobility rows are stochastic for arbitrary counts") {
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<int> k(0, 4);
  std::bernoulli_distribution zero_row(0.3);
  for (int trial = 0; trial < 200; ++trial) {
    Matrix counts(5, 5);
    for (std::size_t i = 0; i < 5; ++i) {
      const bool z = zero_row(rng);
      for (std::size_t j = 0; j < 5; ++j) counts(i, j) = z ? 0.0 : k(rng) * 1.7;
    }
    const auto c = estimate_mobility(counts);
    for (std::size_t i = 0; i < 5; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < 5; ++j) {
        CHECK(c(i, j) >= 0.0);
        s += c(i, j);
      }
      CHECK(std::abs(s - 1.0) <= 1e-9);
    }
  }
}

TEST_CASE("dropoff_probability") {
  CHECK(dropoff_probability({2, 2}) == Vector{0.5, 0.5});
  const auto u = dropoff_probability({0, 0, 0});
  for (double p : u) CHECK(p == doctest::Approx(1.0 / 3.0));
  CHECK(dropoff_probability({1, 0}) == Vector{1.0, 0.0});
}

namespace {

trace::FleetTrace two_day_trace() {
  // Taxi a: one trip per day from region 0 to region 3 on a 2x2 unit grid.
  trace::FleetTrace fleet;
  for (int day = 0; day < 2; ++day) {
    const std::int64_t base = day * 86400 + 8 * 3600;
    auto& recs = fleet["a"];
    recs.push_back({"a", {0.2, 0.2}, false, base});
    recs.push_back({"a", {0.3, 0.3}, true, base + 120});
    recs.push_back({"a", {1.5, 1.5}, false, base + 900});
  }
  fleet["b"] = {{"b", {1.5, 0.5}, false, 100}, {"b", {1.5, 0.6}, false, 200}};
  return fleet;
}

}  // namespace

TEST_CASE("estimate_from_trace builds a valid model") {
  const geo::RegionGrid grid(0, 2, 0, 2, 2, 2);
  EstimateOptions opt;
  opt.bootstrap_samples = 50;
  opt.seed = 5;
  const auto model = estimate_from_trace(two_day_trace(), grid, opt);
  CHECK_NOTHROW(model.validate());
  CHECK(model.num_days == 2);
  CHECK(model.num_request_slots() == 24);
  // pickups at 08:02 fall in slot 9
  CHECK(model.mean(9)[0] == doctest::Approx(1.0));
  CHECK(model.request_variance[8][0] == doctest::Approx(0.0));
  CHECK(model.dropoffs(9)[3] == doctest::Approx(1.0));
  CHECK(model.transition(9)(0, 3) == doctest::Approx(1.0));
  CHECK(model.transition(9)(1, 1) == 1.0);
  CHECK(model.transition(25)(0, 0) == model.transition(1)(0, 0));  // wraps by day

  std::stringstream buf;
  save_model(buf, model);
  const std::string text = buf.str();
  const auto back = load_model(buf);
  std::stringstream again;
  save_model(again, back);
  CHECK(again.str() == text);
  CHECK(back.mobility == model.mobility);
  CHECK(back.request_upper == model.request_upper);

  std::stringstream bogus("{\"format\": \"other\"}");
  CHECK_THROWS(load_model(bogus));
  std::stringstream broken("{not json");
  CHECK_THROWS(load_model(broken));
}

TEST_CASE("weekday filter partitions days before bootstrap") {
  const geo::RegionGrid grid(0, 2, 0, 2, 2, 2);
  // day 0 is a Thursday, day 2 a Saturday
  trace::FleetTrace fleet;
  fleet["a"] = {{"a", {0.2, 0.2}, false, 3600},
                {"a", {0.2, 0.2}, true, 3700},
                {"a", {0.2, 0.2}, false, 3800},
                {"a", {0.2, 0.2}, false, 2 * 86400 + 3600},
                {"a", {0.2, 0.2}, true, 2 * 86400 + 3700},
                {"a", {0.2, 0.2}, false, 2 * 86400 + 3800}};
  EstimateOptions opt;
  opt.bootstrap_samples = 20;
  const auto weekday = estimate_from_trace(fleet, grid, opt, {}, DayFilter::kWeekday);
  const auto weekend = estimate_from_trace(fleet, grid, opt, {}, DayFilter::kWeekend);
  const auto all = estimate_from_trace(fleet, grid, opt, {}, DayFilter::kAll);
  CHECK(weekday.num_days == 1);
  CHECK(weekend.num_days == 1);
  CHECK(all.num_days == 2);
  CHECK(weekday.day_filter == "weekday");
  CHECK_THROWS(parse_day_filter("sometimes"));
}
