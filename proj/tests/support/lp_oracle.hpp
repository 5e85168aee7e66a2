#pragma once

// Test-only oracles for the simplex solver: a random LP generator with a
// constructed feasible point, and brute-force vertex enumeration.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "taxi_rhc/lp.hpp"

namespace rhc::testing {

struct RandomLp {
  lp::LinearProgram lp;
  std::vector<double> feasible_point;
};

/// Box-bounded LP over at most `max_vars` variables whose constraints are all
/// satisfied by a known interior-ish point.
inline RandomLp random_box_lp(std::mt19937_64& rng, int max_vars = 6) {
  std::uniform_int_distribution<int> vars_dist(1, max_vars);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  const int v = vars_dist(rng);
  const int mu = std::uniform_int_distribution<int>(0, 5)(rng);
  const int me = std::uniform_int_distribution<int>(0, std::min(2, v - 1))(rng);

  RandomLp out;
  out.lp = lp::LinearProgram(v);
  out.feasible_point.resize(v);
  for (int j = 0; j < v; ++j) {
    const double lo = -3.0 * unit(rng);
    const double hi = lo + 0.5 + 3.5 * unit(rng);
    out.lp.lower[j] = lo;
    out.lp.upper[j] = hi;
    out.feasible_point[j] = lo + (hi - lo) * unit(rng);
    out.lp.objective[j] = coef(rng);
  }
  out.lp.a_ub = Matrix(mu, v);
  out.lp.b_ub.resize(mu);
  for (int i = 0; i < mu; ++i) {
    double ax = 0.0;
    for (int j = 0; j < v; ++j) {
      out.lp.a_ub(i, j) = coef(rng);
      ax += out.lp.a_ub(i, j) * out.feasible_point[j];
    }
    out.lp.b_ub[i] = ax + unit(rng);
  }
  out.lp.a_eq = Matrix(me, v);
  out.lp.b_eq.resize(me);
  for (int i = 0; i < me; ++i) {
    double ax = 0.0;
    for (int j = 0; j < v; ++j) {
      out.lp.a_eq(i, j) = coef(rng);
      ax += out.lp.a_eq(i, j) * out.feasible_point[j];
    }
    out.lp.b_eq[i] = ax;
  }
  return out;
}

/// Solves the square system in place by Gaussian elimination with partial
/// pivoting; nullopt when singular.
inline std::optional<std::vector<double>> solve_square(std::vector<std::vector<double>> a,
                                                       std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    if (std::abs(a[piv][col]) < 1e-10) return std::nullopt;
    std::swap(a[piv], a[col]);
    std::swap(b[piv], b[col]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = a[r][col] / a[col][col];
      if (f == 0.0) continue;
      for (std::size_t k = col; k < n; ++k) a[r][k] -= f * a[col][k];
      b[r] -= f * b[col];
    }
  }
  for (std::size_t i = 0; i < n; ++i) b[i] /= a[i][i];
  return b;
}

/// Minimum objective over all basic feasible solutions of a bounded LP, found
/// by enumerating every choice of active constraints. nullopt if none exist.
inline std::optional<double> enumerate_vertices(const lp::LinearProgram& lp,
                                                double feas_tol = 1e-9) {
  const std::size_t v = lp.num_vars();
  struct Row {
    std::vector<double> a;
    double b;
  };
  std::vector<Row> candidates;
  for (std::size_t i = 0; i < lp.num_ub(); ++i)
    candidates.push_back({{lp.a_ub.row(i).begin(), lp.a_ub.row(i).end()}, lp.b_ub[i]});
  for (std::size_t j = 0; j < v; ++j) {
    std::vector<double> e(v, 0.0);
    e[j] = 1.0;
    if (std::isfinite(lp.lower[j])) candidates.push_back({e, lp.lower[j]});
    if (std::isfinite(lp.upper[j])) candidates.push_back({e, lp.upper[j]});
  }
  const std::size_t me = lp.num_eq();
  if (me > v) return std::nullopt;
  const std::size_t pick = v - me;

  std::optional<double> best;
  std::vector<std::size_t> idx(pick);
  for (std::size_t k = 0; k < pick; ++k) idx[k] = k;
  if (pick > candidates.size()) return std::nullopt;
  while (true) {
    std::vector<std::vector<double>> a;
    std::vector<double> b;
    for (std::size_t i = 0; i < me; ++i) {
      a.emplace_back(lp.a_eq.row(i).begin(), lp.a_eq.row(i).end());
      b.push_back(lp.b_eq[i]);
    }
    for (std::size_t k : idx) {
      a.push_back(candidates[k].a);
      b.push_back(candidates[k].b);
    }
    if (auto x = solve_square(a, b)) {
      if (lp::check_solution(lp, *x).passes(feas_tol)) {
        double obj = 0.0;
        for (std::size_t j = 0; j < v; ++j) obj += lp.objective[j] * (*x)[j];
        if (!best || obj < *best) best = obj;
      }
    }
    // next combination
    std::size_t k = pick;
    while (k > 0 && idx[k - 1] == candidates.size() - pick + (k - 1)) --k;
    if (k == 0) break;
    ++idx[k - 1];
    for (std::size_t t = k; t < pick; ++t) idx[t] = idx[t - 1] + 1;
  }
  return best;
}

}  // namespace rhc::testing
