#include "taxi_rhc/dispatch.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace rhc::dispatch {

namespace {

constexpr double kRowSumTol = 1e-6;
constexpr std::array<std::array<double, 2>, 4> kSigns{{{1, 1}, {1, -1}, {-1, 1}, {-1, -1}}};

void check_vector(const Vector& v, std::size_t n, const char* what) {
  if (v.size() != n) throw std::invalid_argument(std::string(what) + ": wrong length");
  for (double x : v)
    if (!std::isfinite(x) || x < 0.0)
      throw std::invalid_argument(std::string(what) + ": entries must be finite and >= 0");
}

// Row-append helper for the dense LP matrices.
class RowBuilder {
 public:
  explicit RowBuilder(std::size_t cols) : cols_(cols) {}
  std::vector<double>& add(double rhs) {
    rows_.emplace_back(cols_, 0.0);
    rhs_.push_back(rhs);
    return rows_.back();
  }
  void finish(Matrix& a, std::vector<double>& b) {
    a = Matrix(rows_.size(), cols_);
    for (std::size_t r = 0; r < rows_.size(); ++r)
      std::copy(rows_[r].begin(), rows_[r].end(), a.row(r).begin());
    b = std::move(rhs_);
  }

 private:
  std::size_t cols_;
  std::vector<std::vector<double>> rows_;
  std::vector<double> rhs_;
};

geo::GeoPoint reference_point(const DispatchInstance& in) {
  double lat = 0.0, lon = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < in.num_taxis(); ++i)
    for (std::size_t j = 0; j < in.num_regions(); ++j) {
      lat += in.stations.station(i, j).lat;
      lon += in.stations.station(i, j).lon;
      ++count;
    }
  return count ? geo::GeoPoint{lat / count, lon / count} : geo::GeoPoint{};
}

void check_reachable(const DispatchInstance& in) {
  for (std::size_t i = 0; i < in.num_taxis(); ++i) {
    double reach = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < in.num_regions(); ++j)
      reach = std::min(reach, geo::manhattan_deg(in.positions[i], in.stations.station(i, j)));
    const double cap = in.alpha[0][i];
    if (cap < reach - 1e-12) throw InfeasibleInstance(i, cap, reach);
  }
}

// Shared part of both LPs: distance rows, row sums, bounds and the distance
// objective. Mismatch rows are added by the caller.
BuiltLp build_common(const DispatchInstance& in, RowBuilder& ub) {
  in.validate();
  check_reachable(in);
  const std::size_t N = in.num_taxis(), n = in.num_regions(), T = in.horizon();
  VariableMap vars{N, n, T};
  lp::LinearProgram prog(vars.size());

  // Coordinates are shifted by a common reference so the tableau works with
  // small numbers; Manhattan differences are unaffected.
  const geo::GeoPoint ref = reference_point(in);
  auto lat = [&](const geo::GeoPoint& p) { return p.lat - ref.lat; };
  auto lon = [&](const geo::GeoPoint& p) { return p.lon - ref.lon; };

  for (std::size_t k = 0; k < T; ++k) {
    for (std::size_t i = 0; i < N; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        prog.lower[vars.x(k, i, j)] = 0.0;
        prog.upper[vars.x(k, i, j)] = 1.0;
      }
      prog.upper[vars.d(k, i)] = in.alpha[k][i];
      prog.objective[vars.d(k, i)] = in.beta[k];
    }
    for (std::size_t j = 0; j < n; ++j) {
      prog.objective[vars.mismatch(k, j)] = 1.0;
      if (in.demand_total(k) <= 0.0) prog.upper[vars.mismatch(k, j)] = 0.0;
    }
  }

  for (std::size_t k = 0; k < T; ++k) {
    for (std::size_t i = 0; i < N; ++i) {
      // Q_j = (C^{k-1} W_i)_j, the expected position after starting step k-1 in region j.
      std::vector<geo::GeoPoint> q;
      if (k > 0) {
        const Matrix& c = in.mobility[k - 1];
        q.resize(n);
        for (std::size_t a = 0; a < n; ++a) {
          double qa = 0.0, qo = 0.0;
          for (std::size_t b = 0; b < n; ++b) {
            qa += c(a, b) * lat(in.stations.station(i, b));
            qo += c(a, b) * lon(in.stations.station(i, b));
          }
          q[a] = {qa, qo};
        }
      }
      for (const auto& s : kSigns) {
        // s1*(P_lat - sum X W_lat) + s2*(P_lon - sum X W_lon) - d <= 0
        double rhs = 0.0;
        if (k == 0) rhs = -(s[0] * lat(in.positions[i]) + s[1] * lon(in.positions[i]));
        auto& row = ub.add(rhs);
        row[vars.d(k, i)] = -1.0;
        for (std::size_t j = 0; j < n; ++j) {
          const auto& w = in.stations.station(i, j);
          row[vars.x(k, i, j)] = -(s[0] * lat(w) + s[1] * lon(w));
          if (k > 0) row[vars.x(k - 1, i, j)] = s[0] * q[j].lat + s[1] * q[j].lon;
        }
      }
    }
  }

  // Among optimal allocations prefer the one with the least expected
  // first-leg travel; the relaxation leaves many ties (e.g. any convex
  // combination of stations that reproduces a taxi's position).
  prog.secondary.assign(vars.size(), 0.0);
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t j = 0; j < n; ++j)
      prog.secondary[vars.x(0, i, j)] =
          geo::manhattan_deg(in.positions[i], in.stations.station(i, j));

  RowBuilder eq(vars.size());
  for (std::size_t k = 0; k < T; ++k)
    for (std::size_t i = 0; i < N; ++i) {
      auto& row = eq.add(1.0);
      for (std::size_t j = 0; j < n; ++j) row[vars.x(k, i, j)] = 1.0;
    }
  eq.finish(prog.a_eq, prog.b_eq);
  return {std::move(prog), vars};
}

// e >= +-(share_j - target): two rows.
void add_abs_rows(RowBuilder& ub, const VariableMap& vars, std::size_t k, std::size_t j,
                  double target) {
  const double inv_n = 1.0 / static_cast<double>(vars.taxis);
  for (double sign : {1.0, -1.0}) {
    auto& row = ub.add(sign * target);
    for (std::size_t i = 0; i < vars.taxis; ++i) row[vars.x(k, i, j)] = sign * inv_n;
    row[vars.mismatch(k, j)] = -1.0;
  }
}

std::vector<double> supply_shares(const Matrix& x) {
  std::vector<double> share(x.cols(), 0.0);
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t j = 0; j < x.cols(); ++j) share[j] += x(i, j);
  for (double& s : share) s /= static_cast<double>(x.rows());
  return share;
}

void check_sequence(const std::vector<Matrix>& x, const DispatchInstance& in) {
  if (x.size() != in.horizon()) throw std::invalid_argument("allocation horizon mismatch");
  for (const auto& m : x)
    if (m.rows() != in.num_taxis() || m.cols() != in.num_regions())
      throw std::invalid_argument("allocation shape mismatch");
}

}  // namespace

double DispatchInstance::demand_total(std::size_t k) const {
  if (is_robust()) return intervals.at(k).total;
  double total = 0.0;
  for (double v : demand.at(k)) total += v;
  return total;
}

void DispatchInstance::validate() const {
  const std::size_t N = num_taxis(), n = num_regions(), T = horizon();
  if (T == 0) throw std::invalid_argument("horizon must be >= 1");
  if (N == 0) throw std::invalid_argument("no vacant taxis");
  if (n == 0) throw std::invalid_argument("no regions");
  if (stations.num_taxis() != N) throw std::invalid_argument("station table size mismatch");
  for (const auto& p : positions) geo::validate(p);
  if (is_robust() == !demand.empty())
    throw std::invalid_argument("exactly one of nominal demand or intervals must be given");
  if (is_robust()) {
    if (intervals.size() != T) throw std::invalid_argument("interval horizon mismatch");
    for (const auto& box : intervals) {
      check_vector(box.lower, n, "interval lower");
      check_vector(box.upper, n, "interval upper");
      for (std::size_t j = 0; j < n; ++j)
        if (box.lower[j] > box.upper[j]) throw std::invalid_argument("interval lower > upper");
      if (!std::isfinite(box.total) || box.total < 0.0)
        throw std::invalid_argument("interval total must be >= 0");
    }
  } else {
    if (demand.size() != T) throw std::invalid_argument("demand horizon mismatch");
    for (const auto& r : demand) check_vector(r, n, "demand");
  }
  if (mobility.size() + 1 != T) throw std::invalid_argument("need T-1 mobility matrices");
  for (const auto& c : mobility) {
    if (c.rows() != n || c.cols() != n) throw std::invalid_argument("mobility shape mismatch");
    for (std::size_t a = 0; a < n; ++a) {
      double sum = 0.0;
      for (double v : c.row(a)) {
        if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("mobility entry outside [0,1]");
        sum += v;
      }
      if (std::abs(sum - 1.0) > 1e-9) throw std::invalid_argument("mobility row does not sum to 1");
    }
  }
  if (alpha.size() != T) throw std::invalid_argument("alpha horizon mismatch");
  for (const auto& a : alpha) {
    check_vector(a, N, "alpha");
    for (double v : a)
      if (v <= 0.0) throw std::invalid_argument("alpha must be > 0");
  }
  for (double b : beta)
    if (!std::isfinite(b) || b < 0.0) throw std::invalid_argument("beta must be >= 0");
}

std::vector<Vector> uniform_alpha(std::size_t horizon, std::size_t num_taxis, double value) {
  return std::vector<Vector>(horizon, Vector(num_taxis, value));
}

geo::GeoPoint expected_end_position(std::span<const double> x_row, const Matrix& mobility,
                                    std::span<const geo::GeoPoint> stations) {
  const std::size_t n = x_row.size();
  if (mobility.rows() != n || mobility.cols() != n || stations.size() != n)
    throw std::invalid_argument("expected_end_position: dimension mismatch");
  geo::GeoPoint p{0.0, 0.0};
  for (std::size_t a = 0; a < n; ++a) {
    if (x_row[a] == 0.0) continue;
    for (std::size_t b = 0; b < n; ++b) {
      const double w = x_row[a] * mobility(a, b);
      p.lat += w * stations[b].lat;
      p.lon += w * stations[b].lon;
    }
  }
  return p;
}

BuiltLp build_nominal_lp(const DispatchInstance& instance) {
  if (instance.is_robust()) throw std::invalid_argument("nominal LP needs nominal demand");
  RowBuilder ub(VariableMap{instance.num_taxis(), instance.num_regions(), instance.horizon()}.size());
  BuiltLp built = build_common(instance, ub);
  for (std::size_t k = 0; k < instance.horizon(); ++k) {
    const double total = instance.demand_total(k);
    if (total <= 0.0) continue;
    for (std::size_t j = 0; j < instance.num_regions(); ++j)
      add_abs_rows(ub, built.vars, k, j, instance.demand[k][j] / total);
  }
  ub.finish(built.program.a_ub, built.program.b_ub);
  return built;
}

BuiltLp build_robust_lp(const DispatchInstance& instance) {
  if (!instance.is_robust()) throw std::invalid_argument("robust LP needs interval demand");
  RowBuilder ub(VariableMap{instance.num_taxis(), instance.num_regions(), instance.horizon()}.size());
  BuiltLp built = build_common(instance, ub);
  for (std::size_t k = 0; k < instance.horizon(); ++k) {
    const auto& box = instance.intervals[k];
    if (box.total <= 0.0) continue;
    for (std::size_t j = 0; j < instance.num_regions(); ++j) {
      add_abs_rows(ub, built.vars, k, j, box.lower[j] / box.total);
      add_abs_rows(ub, built.vars, k, j, box.upper[j] / box.total);
    }
  }
  ub.finish(built.program.a_ub, built.program.b_ub);
  return built;
}

Matrix round_first_step(const Matrix& relaxed) {
  Matrix out(relaxed.rows(), relaxed.cols());
  for (std::size_t i = 0; i < relaxed.rows(); ++i) {
    const auto row = relaxed.row(i);
    std::size_t best = 0;
    for (std::size_t j = 1; j < row.size(); ++j)
      if (row[j] > row[best]) best = j;
    if (!row.empty()) out(i, best) = 1.0;
  }
  return out;
}

double ObjectiveBreakdown::mismatch_total() const {
  double s = 0.0;
  for (double v : mismatch) s += v;
  return s;
}

double ObjectiveBreakdown::distance_total() const {
  double s = 0.0;
  for (double v : distance) s += v;
  return s;
}

std::vector<Vector> tight_distances(const std::vector<Matrix>& x,
                                    const DispatchInstance& in) {
  check_sequence(x, in);
  const std::size_t N = in.num_taxis(), n = in.num_regions();
  std::vector<Vector> d(in.horizon(), Vector(N, 0.0));
  for (std::size_t i = 0; i < N; ++i) {
    std::vector<geo::GeoPoint> w(n);
    for (std::size_t j = 0; j < n; ++j) w[j] = in.stations.station(i, j);
    const Matrix eye = Matrix::identity(n);
    geo::GeoPoint start = in.positions[i];
    for (std::size_t k = 0; k < in.horizon(); ++k) {
      if (k > 0) start = expected_end_position(x[k - 1].row(i), in.mobility[k - 1], w);
      const geo::GeoPoint target = expected_end_position(x[k].row(i), eye, w);
      d[k][i] = geo::manhattan_deg(start, target);
    }
  }
  return d;
}

double mismatch_error(const Matrix& allocation, const Vector& demand, double total) {
  if (total <= 0.0) return 0.0;
  const auto share = supply_shares(allocation);
  double e = 0.0;
  for (std::size_t j = 0; j < share.size(); ++j) e += std::abs(share[j] - demand.at(j) / total);
  return e;
}

double worst_case_deviation(double share, double a, double b, double total) {
  return std::max(std::abs(share - a / total), std::abs(share - b / total));
}

namespace {

ObjectiveBreakdown finish_breakdown(const std::vector<Matrix>& x, const DispatchInstance& in,
                                    Vector mismatch) {
  ObjectiveBreakdown out;
  out.mismatch = std::move(mismatch);
  const auto d = tight_distances(x, in);
  out.distance.assign(in.horizon(), 0.0);
  for (std::size_t k = 0; k < in.horizon(); ++k) {
    for (double v : d[k]) out.distance[k] += v;
    out.total += out.mismatch[k] + in.beta[k] * out.distance[k];
  }
  return out;
}

}  // namespace

ObjectiveBreakdown evaluate_objective(const std::vector<Matrix>& x,
                                      const DispatchInstance& in) {
  check_sequence(x, in);
  if (in.is_robust()) throw std::invalid_argument("evaluate_objective needs nominal demand");
  Vector mismatch(in.horizon());
  for (std::size_t k = 0; k < in.horizon(); ++k)
    mismatch[k] = mismatch_error(x[k], in.demand[k], in.demand_total(k));
  return finish_breakdown(x, in, std::move(mismatch));
}

ObjectiveBreakdown evaluate_robust_objective(const std::vector<Matrix>& x,
                                             const DispatchInstance& in) {
  check_sequence(x, in);
  if (!in.is_robust()) throw std::invalid_argument("robust evaluation needs intervals");
  Vector mismatch(in.horizon(), 0.0);
  for (std::size_t k = 0; k < in.horizon(); ++k) {
    const auto& box = in.intervals[k];
    if (box.total <= 0.0) continue;
    const auto share = supply_shares(x[k]);
    for (std::size_t j = 0; j < share.size(); ++j)
      mismatch[k] += worst_case_deviation(share[j], box.lower[j], box.upper[j], box.total);
  }
  return finish_breakdown(x, in, std::move(mismatch));
}

DispatchPlan solve_dispatch(const DispatchInstance& instance, const lp::Options& options) {
  const BuiltLp built =
      instance.is_robust() ? build_robust_lp(instance) : build_nominal_lp(instance);
  const lp::Solution sol = lp::solve(built.program, options);
  DispatchPlan plan;
  plan.status = sol.status;
  plan.iterations = sol.iterations;
  if (sol.status != lp::Status::kOptimal) return plan;

  const auto& v = built.vars;
  plan.lp_objective = sol.objective;
  plan.relaxed.assign(v.horizon, Matrix(v.taxis, v.regions));
  plan.distance.assign(v.horizon, Vector(v.taxis, 0.0));
  for (std::size_t k = 0; k < v.horizon; ++k)
    for (std::size_t i = 0; i < v.taxis; ++i) {
      for (std::size_t j = 0; j < v.regions; ++j)
        plan.relaxed[k](i, j) = std::clamp(sol.x[v.x(k, i, j)], 0.0, 1.0);
      plan.distance[k][i] = sol.x[v.d(k, i)];
    }
  for (const auto& m : plan.relaxed)
    for (std::size_t i = 0; i < m.rows(); ++i) {
      double s = 0.0;
      for (double x : m.row(i)) s += x;
      if (std::abs(s - 1.0) > kRowSumTol)
        throw std::runtime_error("solver returned a non-stochastic allocation row");
    }

  plan.first_step = round_first_step(plan.relaxed[0]);
  plan.regions.resize(v.taxis);
  plan.first_step_distance.resize(v.taxis);
  for (std::size_t i = 0; i < v.taxis; ++i) {
    const auto row = plan.first_step.row(i);
    plan.regions[i] = static_cast<std::size_t>(std::find(row.begin(), row.end(), 1.0) - row.begin());
    plan.first_step_distance[i] =
        geo::manhattan_deg(instance.positions[i], instance.stations.station(i, plan.regions[i]));
    plan.alpha_slack =
        std::max(plan.alpha_slack, plan.first_step_distance[i] - instance.alpha[0][i]);
  }
  plan.objective = instance.is_robust() ? evaluate_robust_objective(plan.relaxed, instance)
                                        : evaluate_objective(plan.relaxed, instance);
  return plan;
}

BruteForceResult brute_force_dispatch(const DispatchInstance& instance, double limit) {
  instance.validate();
  const std::size_t N = instance.num_taxis(), n = instance.num_regions(),
                    T = instance.horizon();
  const double size = std::pow(static_cast<double>(n), static_cast<double>(N * T));
  if (size > limit)
    throw InstanceTooLarge("brute force refused: n^(N*T) = " + std::to_string(size) +
                           " exceeds " + std::to_string(limit));
  if (instance.is_robust() && n > 20)
    throw InstanceTooLarge("brute force refused: 2^n corner enumeration with n = " +
                           std::to_string(n));

  // Corner enumeration per step, independent of the closed-form worst case.
  auto robust_mismatch = [&](const Matrix& x, std::size_t k) {
    const auto& box = instance.intervals[k];
    double worst = 0.0;
    for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
      Vector r(n);
      for (std::size_t j = 0; j < n; ++j) r[j] = (mask >> j & 1) ? box.upper[j] : box.lower[j];
      worst = std::max(worst, mismatch_error(x, r, box.total));
    }
    return worst;
  };

  BruteForceResult best;
  std::vector<std::size_t> digits(N * T, 0);
  std::vector<Matrix> x(T, Matrix(N, n));
  const double tol = 1e-12;
  for (bool more = true; more;) {
    for (std::size_t k = 0; k < T; ++k) {
      x[k] = Matrix(N, n);
      for (std::size_t i = 0; i < N; ++i) x[k](i, digits[k * N + i]) = 1.0;
    }
    const auto d = tight_distances(x, instance);
    bool ok = true;
    for (std::size_t k = 0; k < T && ok; ++k)
      for (std::size_t i = 0; i < N && ok; ++i) ok = d[k][i] <= instance.alpha[k][i] + tol;
    if (ok) {
      Vector mismatch(T);
      for (std::size_t k = 0; k < T; ++k)
        mismatch[k] = instance.is_robust()
                          ? robust_mismatch(x[k], k)
                          : mismatch_error(x[k], instance.demand[k], instance.demand_total(k));
      ObjectiveBreakdown b = finish_breakdown(x, instance, std::move(mismatch));
      if (!best.feasible || b.total < best.objective - 1e-12) {
        best.feasible = true;
        best.objective = b.total;
        best.breakdown = std::move(b);
        best.x = x;
        best.assignment.assign(T, std::vector<std::size_t>(N));
        for (std::size_t k = 0; k < T; ++k)
          for (std::size_t i = 0; i < N; ++i) best.assignment[k][i] = digits[k * N + i];
      }
    }
    more = false;
    for (std::size_t p = 0; p < digits.size(); ++p) {
      if (++digits[p] < n) {
        more = true;
        break;
      }
      digits[p] = 0;
    }
  }
  return best;
}

}  // namespace rhc::dispatch
