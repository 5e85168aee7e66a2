#pragma once

#include <cstddef>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include "taxi_rhc/matrix.hpp"

namespace rhc::lp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// min c'x  s.t.  A_ub x <= b_ub,  A_eq x = b_eq,  lower <= x <= upper.
struct LinearProgram {
  std::vector<double> objective;
  Matrix a_ub;
  std::vector<double> b_ub;
  Matrix a_eq;
  std::vector<double> b_eq;
  std::vector<double> lower;
  std::vector<double> upper;
  /// Optional tie-break: minimized over the optimal face of `objective`.
  std::vector<double> secondary;

  LinearProgram() = default;
  /// Empty program over `num_vars` variables with bounds [0, +inf).
  explicit LinearProgram(std::size_t num_vars)
      : objective(num_vars, 0.0), lower(num_vars, 0.0), upper(num_vars, kInf) {}

  std::size_t num_vars() const { return objective.size(); }
  std::size_t num_ub() const { return b_ub.size(); }
  std::size_t num_eq() const { return b_eq.size(); }

  /// Throws std::invalid_argument on inconsistent dimensions, NaNs or lower > upper.
  void validate() const;
};

enum class Status { kOptimal, kInfeasible, kUnbounded, kIterationLimit };

std::string to_string(Status s);

struct Solution {
  Status status = Status::kIterationLimit;
  std::vector<double> x;
  double objective = 0.0;
  long iterations = 0;
};

struct Options {
  double feasibility_tol = 1e-9;
  double optimality_tol = 1e-9;
  double degeneracy_tol = 1e-12;
  double pivot_tol = 1e-10;
  long max_iters = 200000;
  /// Consecutive degenerate pivots before switching to Bland's rule.
  int degenerate_streak = 30;
};

/// Two-phase bounded-variable revised simplex.
Solution solve(const LinearProgram& lp, const Options& options = {});

struct ResidualReport {
  double max_eq_residual = 0.0;
  double max_ineq_violation = 0.0;
  double max_bound_violation = 0.0;

  bool passes(double tol) const {
    return max_eq_residual <= tol && max_ineq_violation <= tol && max_bound_violation <= tol;
  }
};

ResidualReport check_solution(const LinearProgram& lp, const std::vector<double>& x);

/// Plain-text dump: header line `LP <vars> <ub rows> <eq rows>`, then
/// `c`, `ub`, `eq`, `lo`, `hi` lines with dense rows (rhs last on row lines).
void write_text(std::ostream& out, const LinearProgram& lp);
LinearProgram read_text(std::istream& in);

}  // namespace rhc::lp
