#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "taxi_rhc/geo.hpp"
#include "taxi_rhc/lp.hpp"
#include "taxi_rhc/matrix.hpp"

namespace rhc::dispatch {

using Vector = std::vector<double>;

/// Demand box R1 <= r <= R2 of one horizon step, with the fixed total used
/// as the ratio denominator.
struct IntervalDemand {
  Vector lower;
  Vector upper;
  double total = 0.0;
};

/// Everything one receding-horizon solve needs. Horizon steps are 0-based
/// here: step 0 is the one that gets executed.
///
/// Exactly one of `demand` (nominal) or `intervals` (robust) holds T entries.
/// A step whose demand total is zero carries no mismatch term.
struct DispatchInstance {
  std::vector<geo::GeoPoint> positions;  // current vacant-taxi positions, N
  geo::StationTable stations;            // N x n dispatch destinations
  std::vector<Vector> demand;            // T vectors of length n
  std::vector<IntervalDemand> intervals; // T boxes
  std::vector<Matrix> mobility;          // T-1 row-stochastic n x n matrices
  std::vector<Vector> alpha;             // T vectors of per-taxi distance caps (degrees)
  Vector beta;                           // T distance weights

  std::size_t num_taxis() const { return positions.size(); }
  std::size_t num_regions() const { return stations.num_regions(); }
  std::size_t horizon() const { return beta.size(); }
  bool is_robust() const { return !intervals.empty(); }

  /// Demand total R^k (nominal) or the fixed total of the box (robust).
  double demand_total(std::size_t k) const;

  void validate() const;
};

/// Per-taxi caps `value` for every step.
std::vector<Vector> uniform_alpha(std::size_t horizon, std::size_t num_taxis, double value);

class InfeasibleInstance : public std::runtime_error {
 public:
  InfeasibleInstance(std::size_t taxi, double alpha, double reach)
      : std::runtime_error("taxi " + std::to_string(taxi) + " cannot reach any station: alpha " +
                           std::to_string(alpha) + " < nearest station distance " +
                           std::to_string(reach)),
        taxi_(taxi) {}
  std::size_t taxi() const { return taxi_; }

 private:
  std::size_t taxi_;
};

/// Column layout of the dispatch LP: X^k_{ij}, then d^k_i, then one
/// mismatch epigraph variable per (k, j).
struct VariableMap {
  std::size_t taxis = 0, regions = 0, horizon = 0;

  std::size_t x(std::size_t k, std::size_t i, std::size_t j) const {
    return (k * taxis + i) * regions + j;
  }
  std::size_t d(std::size_t k, std::size_t i) const {
    return horizon * taxis * regions + k * taxis + i;
  }
  std::size_t mismatch(std::size_t k, std::size_t j) const {
    return horizon * taxis * (regions + 1) + k * regions + j;
  }
  std::size_t size() const { return horizon * (taxis * (regions + 1) + regions); }
};

struct BuiltLp {
  lp::LinearProgram program;
  VariableMap vars;
};

/// x_row * C * W_i: the expected end-of-step position of a taxi.
geo::GeoPoint expected_end_position(std::span<const double> x_row, const Matrix& mobility,
                                    std::span<const geo::GeoPoint> stations);

/// Relaxed nominal problem: one-norm mismatch epigraph, Manhattan distance
/// rows by sign enumeration, d^k <= alpha^k as bounds. Throws
/// InfeasibleInstance when some taxi's first-step cap is below its distance
/// to every one of its stations.
BuiltLp build_nominal_lp(const DispatchInstance& instance);

/// Robust counterpart: four rows per (k, j) against both interval ends.
BuiltLp build_robust_lp(const DispatchInstance& instance);

/// Per-row argmax set to 1, ties to the lowest region index.
Matrix round_first_step(const Matrix& relaxed);

struct ObjectiveBreakdown {
  Vector mismatch;  // J_E term per step
  Vector distance;  // sum_i d^k_i per step
  double total = 0.0;

  double mismatch_total() const;
  double distance_total() const;
};

/// Tight distances d^k for an allocation sequence (N x n matrices).
std::vector<Vector> tight_distances(const std::vector<Matrix>& x,
                                    const DispatchInstance& instance);

/// Nominal J_E + sum beta^k J_D^k with tight distances.
ObjectiveBreakdown evaluate_objective(const std::vector<Matrix>& x,
                                      const DispatchInstance& instance);

/// Worst case over the demand box: sum_j max(|s_j - R1_j/R~|, |s_j - R2_j/R~|).
ObjectiveBreakdown evaluate_robust_objective(const std::vector<Matrix>& x,
                                             const DispatchInstance& instance);

/// max over r in [a, b] of |x - r/total|, evaluated at the interval ends.
double worst_case_deviation(double share, double a, double b, double total);

/// One-norm distance between the supply shares of `allocation` (N x n, rows
/// summing to 1) and demand / total. Zero when the total is zero.
double mismatch_error(const Matrix& allocation, const Vector& demand, double total);

struct DispatchPlan {
  lp::Status status = lp::Status::kIterationLimit;
  double lp_objective = 0.0;
  long iterations = 0;
  std::vector<Matrix> relaxed;           // X^k, k = 0..T-1
  std::vector<Vector> distance;          // d^k from the LP
  Matrix first_step;                     // rounded X^1
  std::vector<std::size_t> regions;      // dispatched region per taxi
  Vector first_step_distance;            // d^1 of the rounded orders
  double alpha_slack = 0.0;              // max_i (d^1_i - alpha^1_i)^+ after rounding
  ObjectiveBreakdown objective;          // at the relaxed solution
};

/// Builds the nominal or robust LP (by instance kind), solves it and rounds
/// the first step. Non-optimal solves return the status with empty matrices.
DispatchPlan solve_dispatch(const DispatchInstance& instance, const lp::Options& options = {});

class InstanceTooLarge : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct BruteForceResult {
  bool feasible = false;
  double objective = 0.0;
  std::vector<std::vector<std::size_t>> assignment;  // [k][i] region
  std::vector<Matrix> x;
  ObjectiveBreakdown breakdown;
};

/// Exhaustive search over binary assignment sequences satisfying the
/// distance caps. Robust instances are scored by explicit enumeration of
/// the 2^n demand-box corners. Refuses when n^(N*T) exceeds `limit`.
BruteForceResult brute_force_dispatch(const DispatchInstance& instance,
                                      double limit = 1e6);

}  // namespace rhc::dispatch
