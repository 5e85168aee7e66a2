#include "taxi_rhc/lp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace rhc::lp {

void LinearProgram::validate() const {
  const std::size_t v = num_vars();
  if (!secondary.empty() && secondary.size() != v)
    throw std::invalid_argument("secondary objective must be empty or one entry per variable");
  if (lower.size() != v || upper.size() != v)
    throw std::invalid_argument("bound vectors must have one entry per variable");
  if (a_ub.rows() != b_ub.size() || (a_ub.rows() > 0 && a_ub.cols() != v))
    throw std::invalid_argument("inequality block has inconsistent dimensions");
  if (a_eq.rows() != b_eq.size() || (a_eq.rows() > 0 && a_eq.cols() != v))
    throw std::invalid_argument("equality block has inconsistent dimensions");
  for (std::size_t j = 0; j < v; ++j) {
    if (std::isnan(lower[j]) || std::isnan(upper[j]) || lower[j] > upper[j])
      throw std::invalid_argument("variable " + std::to_string(j) + " has lower > upper");
    if (lower[j] == kInf || upper[j] == -kInf)
      throw std::invalid_argument("variable " + std::to_string(j) + " has an empty range");
    if (!std::isfinite(objective[j]))
      throw std::invalid_argument("objective coefficient is not finite");
    if (!secondary.empty() && !std::isfinite(secondary[j]))
      throw std::invalid_argument("secondary objective coefficient is not finite");
  }
  for (double x : a_ub.data())
    if (!std::isfinite(x)) throw std::invalid_argument("A_ub has a non-finite entry");
  for (double x : a_eq.data())
    if (!std::isfinite(x)) throw std::invalid_argument("A_eq has a non-finite entry");
  for (double x : b_ub)
    if (!std::isfinite(x)) throw std::invalid_argument("b_ub has a non-finite entry");
  for (double x : b_eq)
    if (!std::isfinite(x)) throw std::invalid_argument("b_eq has a non-finite entry");
}

std::string to_string(Status s) {
  switch (s) {
    case Status::kOptimal: return "optimal";
    case Status::kInfeasible: return "infeasible";
    case Status::kUnbounded: return "unbounded";
    case Status::kIterationLimit: return "iteration-limit";
  }
  return "unknown";
}

namespace {

enum class VarState : std::uint8_t { kBasic, kLower, kUpper, kFree };

enum class PhaseResult { kOptimal, kUnbounded, kIterationLimit };

struct SparseColumn {
  std::vector<std::size_t> rows;
  std::vector<double> values;
};

// Revised bounded-variable simplex. The basis inverse is kept explicitly
// (column-major) and updated by eta row operations; constraint columns are
// sparse. Columns: structural, then one slack per inequality row, then the
// artificials Phase I needs.
class Simplex {
 public:
  Simplex(const LinearProgram& lp, const Options& opt) : lp_(lp), opt_(opt) {}

  Solution run() {
    Solution sol;
    setup();
    if (num_art_ > 0) {
      std::vector<double> cost(ncols_, 0.0);
      for (std::size_t j = art_begin_; j < ncols_; ++j) cost[j] = 1.0;
      const PhaseResult r = iterate(cost, /*phase_one=*/true);
      sol.iterations = iterations_;
      if (r == PhaseResult::kIterationLimit) return finish(sol, Status::kIterationLimit);
      double infeasibility = 0.0;
      for (std::size_t j = art_begin_; j < ncols_; ++j) infeasibility += x_[j];
      if (infeasibility > opt_.feasibility_tol * (1.0 + rhs_scale_))
        return finish(sol, Status::kInfeasible);
      retire_artificials();
    }
    std::vector<double> cost(ncols_, 0.0);
    std::copy(lp_.objective.begin(), lp_.objective.end(), cost.begin());
    const PhaseResult r = iterate(cost, /*phase_one=*/false);
    sol.iterations = iterations_;
    if (r == PhaseResult::kOptimal && !lp_.secondary.empty()) tie_break();
    switch (r) {
      case PhaseResult::kOptimal: return finish(sol, Status::kOptimal);
      case PhaseResult::kUnbounded: return finish(sol, Status::kUnbounded);
      case PhaseResult::kIterationLimit: return finish(sol, Status::kIterationLimit);
    }
    return sol;
  }

 private:
  double& binv(std::size_t i, std::size_t c) { return binv_[c * m_ + i]; }

  void setup() {
    const std::size_t v = lp_.num_vars();
    const std::size_t mu = lp_.num_ub();
    const std::size_t me = lp_.num_eq();
    m_ = mu + me;
    art_begin_ = v + mu;

    cols_.assign(v, {});
    b_.assign(m_, 0.0);
    for (std::size_t i = 0; i < m_; ++i) {
      const bool ub = i < mu;
      const auto row = ub ? lp_.a_ub.row(i) : lp_.a_eq.row(i - mu);
      b_[i] = ub ? lp_.b_ub[i] : lp_.b_eq[i - mu];
      for (std::size_t j = 0; j < v; ++j) {
        if (row[j] == 0.0) continue;
        cols_[j].rows.push_back(i);
        cols_[j].values.push_back(row[j]);
      }
    }

    std::vector<double> x0(v);
    std::vector<VarState> s0(v);
    for (std::size_t j = 0; j < v; ++j) {
      if (std::isfinite(lp_.lower[j])) {
        x0[j] = lp_.lower[j];
        s0[j] = VarState::kLower;
      } else if (std::isfinite(lp_.upper[j])) {
        x0[j] = lp_.upper[j];
        s0[j] = VarState::kUpper;
      } else {
        x0[j] = 0.0;
        s0[j] = VarState::kFree;
      }
    }

    // Residual of every row at the starting point decides which rows need an
    // artificial variable and its sign.
    std::vector<double> resid(b_);
    for (std::size_t j = 0; j < v; ++j) {
      if (x0[j] == 0.0) continue;
      for (std::size_t p = 0; p < cols_[j].rows.size(); ++p)
        resid[cols_[j].rows[p]] -= cols_[j].values[p] * x0[j];
    }
    rhs_scale_ = 0.0;
    std::vector<double> art_sign(m_, 0.0);
    for (std::size_t i = 0; i < m_; ++i) {
      rhs_scale_ = std::max(rhs_scale_, std::abs(b_[i]));
      if (i < mu) {
        if (resid[i] < 0.0) art_sign[i] = -1.0;
      } else {
        art_sign[i] = resid[i] >= 0.0 ? 1.0 : -1.0;
      }
      if (art_sign[i] != 0.0) ++num_art_;
    }

    ncols_ = art_begin_ + num_art_;
    x_.assign(ncols_, 0.0);
    state_.assign(ncols_, VarState::kLower);
    lo_.assign(ncols_, 0.0);
    hi_.assign(ncols_, kInf);
    basis_.assign(m_, 0);
    redundant_.assign(m_, false);
    binv_.assign(m_ * m_, 0.0);
    for (std::size_t j = 0; j < v; ++j) {
      x_[j] = x0[j];
      state_[j] = s0[j];
      lo_[j] = lp_.lower[j];
      hi_[j] = lp_.upper[j];
    }
    for (std::size_t i = 0; i < mu; ++i) cols_.push_back({{i}, {1.0}});

    for (std::size_t i = 0; i < m_; ++i) {
      if (art_sign[i] != 0.0) {
        const std::size_t a = cols_.size();
        cols_.push_back({{i}, {art_sign[i]}});
        basis_[i] = a;
        x_[a] = std::abs(resid[i]);
        state_[a] = VarState::kBasic;
        binv(i, i) = art_sign[i];
      } else {
        basis_[i] = v + i;
        x_[v + i] = resid[i];
        state_[v + i] = VarState::kBasic;
        binv(i, i) = 1.0;
      }
    }
  }

  // alpha = B^-1 a_j
  void ftran(std::size_t j, std::vector<double>& alpha) {
    alpha.assign(m_, 0.0);
    const auto& col = cols_[j];
    for (std::size_t p = 0; p < col.rows.size(); ++p) {
      const double a = col.values[p];
      const double* bc = &binv_[col.rows[p] * m_];
      for (std::size_t i = 0; i < m_; ++i) alpha[i] += a * bc[i];
    }
    for (std::size_t i = 0; i < m_; ++i)
      if (redundant_[i]) alpha[i] = 0.0;
  }

  double column_dot(std::size_t j, const std::vector<double>& y) const {
    const auto& col = cols_[j];
    double s = 0.0;
    for (std::size_t p = 0; p < col.rows.size(); ++p) s += col.values[p] * y[col.rows[p]];
    return s;
  }

  // Row r of B^-1 A over all columns.
  void pivot_row(std::size_t r, std::vector<double>& row) {
    rho_.resize(m_);
    for (std::size_t c = 0; c < m_; ++c) rho_[c] = binv_[c * m_ + r];
    row.assign(ncols_, 0.0);
    for (std::size_t j = 0; j < ncols_; ++j) row[j] = column_dot(j, rho_);
  }

  void compute_reduced_costs(const std::vector<double>& cost) {
    std::vector<double> y(m_, 0.0);  // y' = c_B' B^-1
    for (std::size_t i = 0; i < m_; ++i) {
      const double cb = cost[basis_[i]];
      if (cb == 0.0) continue;
      for (std::size_t c = 0; c < m_; ++c) y[c] += cb * binv_[c * m_ + i];
    }
    reduced_.assign(ncols_, 0.0);
    for (std::size_t j = 0; j < ncols_; ++j) reduced_[j] = cost[j] - column_dot(j, y);
    for (std::size_t i = 0; i < m_; ++i) reduced_[basis_[i]] = 0.0;
  }

  void refresh_basic_values() {
    std::vector<double> rhs(b_);
    for (std::size_t j = 0; j < ncols_; ++j) {
      if (state_[j] == VarState::kBasic || x_[j] == 0.0) continue;
      const auto& col = cols_[j];
      for (std::size_t p = 0; p < col.rows.size(); ++p) rhs[col.rows[p]] -= col.values[p] * x_[j];
    }
    std::vector<double> xb(m_, 0.0);
    for (std::size_t c = 0; c < m_; ++c) {
      const double rc = rhs[c];
      if (rc == 0.0) continue;
      const double* bc = &binv_[c * m_];
      for (std::size_t i = 0; i < m_; ++i) xb[i] += bc[i] * rc;
    }
    for (std::size_t i = 0; i < m_; ++i) x_[basis_[i]] = redundant_[i] ? 0.0 : xb[i];
  }

  bool is_fixed(std::size_t j) const { return lo_[j] == hi_[j]; }

  // Returns the entering column and its direction (+1 increase, -1 decrease),
  // or npos when the current basis is optimal. Devex pricing unless `bland`.
  std::pair<std::size_t, int> choose_entering(bool bland) const {
    std::size_t best = npos;
    int best_dir = 0;
    double best_score = 0.0;
    for (std::size_t j = 0; j < ncols_; ++j) {
      const VarState st = state_[j];
      if (st == VarState::kBasic || is_fixed(j)) continue;
      const double dj = reduced_[j];
      int dir = 0;
      if ((st == VarState::kLower || st == VarState::kFree) && dj < -opt_.optimality_tol)
        dir = 1;
      else if ((st == VarState::kUpper || st == VarState::kFree) && dj > opt_.optimality_tol)
        dir = -1;
      if (dir == 0) continue;
      if (bland) return {j, dir};
      const double score = dj * dj / weight_[j];
      if (score > best_score) {
        best_score = score;
        best = j;
        best_dir = dir;
      }
    }
    return {best, best_dir};
  }

  struct Leaving {
    std::size_t row;
    double theta;
    bool to_upper;
  };

  // Step limit of basic row i when the entering variable moves in `dir`;
  // `slack` relaxes the bound (Harris first pass).
  bool row_limit(std::size_t i, double a, int dir, double slack, double& limit,
                 bool& to_upper) const {
    const std::size_t b = basis_[i];
    const double rate = -dir * a;
    if (rate < 0.0) {
      if (!std::isfinite(lo_[b])) return false;
      limit = (x_[b] - lo_[b] + slack) / -rate;
      to_upper = false;
    } else {
      if (!std::isfinite(hi_[b])) return false;
      limit = (hi_[b] - x_[b] + slack) / rate;
      to_upper = true;
    }
    if (limit < 0.0) limit = 0.0;
    return true;
  }

  // Two-pass Harris test: bound the step with slightly relaxed bounds, then
  // take the largest pivot among rows blocking within that bound. Bland mode
  // uses the textbook minimum ratio with lowest-index ties.
  Leaving ratio_test(const std::vector<double>& alpha, int dir, bool bland) const {
    Leaving best{npos, kInf, false};
    double limit = 0.0;
    bool to_upper = false;
    if (bland) {
      for (std::size_t i = 0; i < m_; ++i) {
        if (std::abs(alpha[i]) <= opt_.pivot_tol) continue;
        if (!row_limit(i, alpha[i], dir, 0.0, limit, to_upper)) continue;
        if (best.row == npos || limit < best.theta - opt_.degeneracy_tol ||
            (limit <= best.theta + opt_.degeneracy_tol && basis_[i] < basis_[best.row]))
          best = {i, limit, to_upper};
      }
      return best;
    }
    double bound = kInf;
    for (std::size_t i = 0; i < m_; ++i) {
      if (std::abs(alpha[i]) <= opt_.pivot_tol) continue;
      if (row_limit(i, alpha[i], dir, opt_.feasibility_tol, limit, to_upper))
        bound = std::min(bound, limit);
    }
    if (!std::isfinite(bound)) return best;
    double best_pivot = 0.0;
    for (std::size_t i = 0; i < m_; ++i) {
      const double a = std::abs(alpha[i]);
      if (a <= opt_.pivot_tol) continue;
      if (!row_limit(i, alpha[i], dir, 0.0, limit, to_upper) || limit > bound) continue;
      if (a > best_pivot) {
        best_pivot = a;
        best = {i, limit, to_upper};
      }
    }
    return best;
  }

  // Recomputes B^-1 from the basis columns (Gauss-Jordan, partial pivoting).
  void refactor() {
    std::vector<double> lhs(m_ * m_, 0.0), inv(m_ * m_, 0.0);  // row-major
    for (std::size_t c = 0; c < m_; ++c) {
      const auto& col = cols_[basis_[c]];
      for (std::size_t p = 0; p < col.rows.size(); ++p) lhs[col.rows[p] * m_ + c] = col.values[p];
    }
    for (std::size_t i = 0; i < m_; ++i) inv[i * m_ + i] = 1.0;
    std::vector<std::size_t> nz;
    for (std::size_t k = 0; k < m_; ++k) {
      std::size_t p = k;
      for (std::size_t i = k + 1; i < m_; ++i)
        if (std::abs(lhs[i * m_ + k]) > std::abs(lhs[p * m_ + k])) p = i;
      if (std::abs(lhs[p * m_ + k]) < 1e-14) throw std::runtime_error("simplex: singular basis");
      if (p != k) {
        std::swap_ranges(lhs.begin() + p * m_, lhs.begin() + (p + 1) * m_, lhs.begin() + k * m_);
        std::swap_ranges(inv.begin() + p * m_, inv.begin() + (p + 1) * m_, inv.begin() + k * m_);
      }
      double* lk = &lhs[k * m_];
      double* ik = &inv[k * m_];
      const double scale = 1.0 / lk[k];
      nz.clear();
      for (std::size_t c = 0; c < m_; ++c) {
        lk[c] *= scale;
        ik[c] *= scale;
        if (lk[c] != 0.0 || ik[c] != 0.0) nz.push_back(c);
      }
      for (std::size_t i = 0; i < m_; ++i) {
        if (i == k) continue;
        const double f = lhs[i * m_ + k];
        if (f == 0.0) continue;
        double* li = &lhs[i * m_];
        double* ii = &inv[i * m_];
        for (std::size_t c : nz) {
          li[c] -= f * lk[c];
          ii[c] -= f * ik[c];
        }
      }
    }
    for (std::size_t i = 0; i < m_; ++i)
      for (std::size_t c = 0; c < m_; ++c) binv_[c * m_ + i] = inv[i * m_ + c];
    since_refactor_ = 0;
  }

  // Basis change: column j replaces the basic variable of row r. `alpha` is
  // B^-1 a_j for the current basis.
  void pivot(std::size_t r, std::size_t j, const std::vector<double>& alpha) {
    const double inv = 1.0 / alpha[r];
    pivot_row(r, prow_);
    if (std::abs(prow_[j] - alpha[r]) > 1e-9 * (1.0 + std::abs(alpha[r]))) needs_refactor_ = true;
    const double f = reduced_[j] * inv;
    const double wq = weight_[j];
    for (std::size_t k = 0; k < ncols_; ++k) {
      const double a = prow_[k];
      if (a == 0.0) continue;
      if (f != 0.0) reduced_[k] -= f * a;
      const double ratio = a * inv;
      weight_[k] = std::max(weight_[k], ratio * ratio * wq);
    }
    reduced_[j] = 0.0;
    weight_[basis_[r]] = std::max(wq * inv * inv, 1.0);

    nz_.clear();
    for (std::size_t i = 0; i < m_; ++i)
      if (i != r && alpha[i] != 0.0) nz_.push_back(i);
    for (std::size_t c = 0; c < m_; ++c) {
      double* bc = &binv_[c * m_];
      const double br = bc[r] * inv;
      if (br == 0.0) continue;
      bc[r] = br;
      for (std::size_t i : nz_) bc[i] -= alpha[i] * br;
    }
    basis_[r] = j;
    ++since_refactor_;
  }

  PhaseResult iterate(const std::vector<double>& cost, bool phase_one) {
    compute_reduced_costs(cost);
    weight_.assign(ncols_, 1.0);
    int streak = 0;
    bool bland = false;
    std::vector<double> alpha;
    while (true) {
      if (iterations_ >= opt_.max_iters) return PhaseResult::kIterationLimit;
      const auto [j, dir] = choose_entering(bland);
      if (j == npos) {
        refresh_basic_values();
        return PhaseResult::kOptimal;
      }
      ftran(j, alpha);

      const auto [leave, theta_rows, leave_to_upper] = ratio_test(alpha, dir, bland);
      double theta = theta_rows;

      const double range = hi_[j] - lo_[j];
      const bool flip = std::isfinite(range) && (leave == npos || range <= theta);
      if (flip) theta = range;
      if (!std::isfinite(theta)) {
        if (phase_one) return PhaseResult::kOptimal;  // cannot happen: bounded below by 0
        return PhaseResult::kUnbounded;
      }

      ++iterations_;
      if (theta <= opt_.degeneracy_tol) {
        if (++streak >= opt_.degenerate_streak) bland = true;
      } else {
        streak = 0;
        bland = false;
      }

      if (theta != 0.0) {
        x_[j] += dir * theta;
        for (std::size_t i = 0; i < m_; ++i)
          if (alpha[i] != 0.0) x_[basis_[i]] -= dir * alpha[i] * theta;
      }

      if (flip) {
        state_[j] = dir > 0 ? VarState::kUpper : VarState::kLower;
        x_[j] = dir > 0 ? hi_[j] : lo_[j];
        continue;
      }

      const std::size_t leaving = basis_[leave];
      x_[leaving] = leave_to_upper ? hi_[leaving] : lo_[leaving];
      state_[leaving] = leave_to_upper ? VarState::kUpper : VarState::kLower;
      if (leaving >= art_begin_) hi_[leaving] = 0.0;  // artificials never re-enter
      state_[j] = VarState::kBasic;
      pivot(leave, j, alpha);
      if (needs_refactor_ || since_refactor_ >= kRefactorInterval) {
        refactor();
        needs_refactor_ = false;
        refresh_basic_values();
        compute_reduced_costs(cost);
      }
    }
  }

  // Fixes artificials at zero and pivots basic ones out where a structural
  // or slack column can take their place; rows where none can are redundant
  // and are ignored from here on.
  void retire_artificials() {
    for (std::size_t j = art_begin_; j < ncols_; ++j) {
      hi_[j] = 0.0;
      if (state_[j] != VarState::kBasic) {
        state_[j] = VarState::kLower;
        x_[j] = 0.0;
      }
    }
    reduced_.assign(ncols_, 0.0);
    std::vector<double> row, alpha;
    for (std::size_t i = 0; i < m_; ++i) {
      if (basis_[i] < art_begin_) continue;
      pivot_row(i, row);
      std::size_t best = npos;
      double best_abs = 1e-7;
      for (std::size_t j = 0; j < art_begin_; ++j) {
        if (state_[j] == VarState::kBasic) continue;
        const double a = std::abs(row[j]);
        if (a > best_abs) {
          best_abs = a;
          best = j;
        }
      }
      if (best == npos) {
        redundant_[i] = true;
        continue;
      }
      const std::size_t art = basis_[i];
      state_[art] = VarState::kLower;
      x_[art] = 0.0;
      state_[best] = VarState::kBasic;
      ftran(best, alpha);
      pivot(i, best, alpha);
    }
    refresh_basic_values();
  }

  // Lexicographic second stage: nonbasic columns with nonzero reduced cost
  // are pinned, which confines the search to the optimal face.
  void tie_break() {
    const std::vector<double> saved_x = x_;
    const std::vector<double> saved_lo = lo_, saved_hi = hi_;
    for (std::size_t j = 0; j < ncols_; ++j) {
      if (state_[j] == VarState::kBasic) continue;
      if (std::abs(reduced_[j]) > opt_.optimality_tol) lo_[j] = hi_[j] = x_[j];
    }
    std::vector<double> cost(ncols_, 0.0);
    std::copy(lp_.secondary.begin(), lp_.secondary.end(), cost.begin());
    if (iterate(cost, /*phase_one=*/false) != PhaseResult::kOptimal) x_ = saved_x;
    lo_ = saved_lo;
    hi_ = saved_hi;
  }

  Solution& finish(Solution& sol, Status status) {
    sol.status = status;
    sol.iterations = iterations_;
    const std::size_t v = lp_.num_vars();
    sol.x.assign(x_.begin(), x_.begin() + static_cast<std::ptrdiff_t>(v));
    if (status == Status::kOptimal) {
      // Snap values within tolerance of a bound onto it.
      for (std::size_t j = 0; j < v; ++j) {
        if (std::isfinite(lo_[j]) && std::abs(sol.x[j] - lo_[j]) <= opt_.degeneracy_tol)
          sol.x[j] = lo_[j];
        if (std::isfinite(hi_[j]) && std::abs(sol.x[j] - hi_[j]) <= opt_.degeneracy_tol)
          sol.x[j] = hi_[j];
      }
    }
    sol.objective = 0.0;
    for (std::size_t j = 0; j < v; ++j) sol.objective += lp_.objective[j] * sol.x[j];
    return sol;
  }

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);
  static constexpr long kRefactorInterval = 400;

  const LinearProgram& lp_;
  const Options& opt_;
  std::size_t m_ = 0;
  std::size_t art_begin_ = 0;
  std::size_t num_art_ = 0;
  std::size_t ncols_ = 0;
  double rhs_scale_ = 0.0;
  long iterations_ = 0;
  std::vector<SparseColumn> cols_;
  std::vector<double> b_;
  std::vector<double> binv_;
  std::vector<double> x_;
  std::vector<double> lo_, hi_;
  std::vector<VarState> state_;
  std::vector<std::size_t> basis_;
  std::vector<bool> redundant_;
  std::vector<double> reduced_;
  std::vector<double> weight_;  // Devex reference weights
  std::vector<double> prow_, rho_;
  std::vector<std::size_t> nz_;
  long since_refactor_ = 0;
  bool needs_refactor_ = false;
};

}  // namespace

Solution solve(const LinearProgram& lp, const Options& options) {
  lp.validate();
  Simplex simplex(lp, options);
  return simplex.run();
}

ResidualReport check_solution(const LinearProgram& lp, const std::vector<double>& x) {
  if (x.size() != lp.num_vars())
    throw std::invalid_argument("solution dimension does not match the program");
  ResidualReport report;
  for (std::size_t i = 0; i < lp.num_eq(); ++i) {
    double ax = 0.0;
    const auto row = lp.a_eq.row(i);
    for (std::size_t j = 0; j < x.size(); ++j) ax += row[j] * x[j];
    report.max_eq_residual = std::max(report.max_eq_residual, std::abs(ax - lp.b_eq[i]));
  }
  for (std::size_t i = 0; i < lp.num_ub(); ++i) {
    double ax = 0.0;
    const auto row = lp.a_ub.row(i);
    for (std::size_t j = 0; j < x.size(); ++j) ax += row[j] * x[j];
    report.max_ineq_violation = std::max(report.max_ineq_violation, ax - lp.b_ub[i]);
  }
  for (std::size_t j = 0; j < x.size(); ++j) {
    report.max_bound_violation = std::max(
        {report.max_bound_violation, lp.lower[j] - x[j], x[j] - lp.upper[j]});
  }
  return report;
}

namespace {

void write_value(std::ostream& out, double v) {
  if (v == kInf) {
    out << "inf";
  } else if (v == -kInf) {
    out << "-inf";
  } else {
    out << v;
  }
}

double read_value(std::istream& in) {
  std::string token;
  if (!(in >> token)) throw std::runtime_error("LP text: unexpected end of input");
  if (token == "inf") return kInf;
  if (token == "-inf") return -kInf;
  std::size_t used = 0;
  const double v = std::stod(token, &used);
  if (used != token.size()) throw std::runtime_error("LP text: bad number '" + token + "'");
  return v;
}

void expect(std::istream& in, const std::string& word) {
  std::string token;
  if (!(in >> token) || token != word)
    throw std::runtime_error("LP text: expected '" + word + "'");
}

}  // namespace

void write_text(std::ostream& out, const LinearProgram& lp) {
  const auto old_precision = out.precision(17);
  const std::size_t v = lp.num_vars();
  out << "LP " << v << ' ' << lp.num_ub() << ' ' << lp.num_eq() << '\n';
  out << 'c';
  for (double c : lp.objective) out << ' ' << c;
  out << '\n';
  if (!lp.secondary.empty()) {
    out << "c2";
    for (double c : lp.secondary) out << ' ' << c;
    out << '\n';
  }
  for (std::size_t i = 0; i < lp.num_ub(); ++i) {
    out << "ub";
    for (double a : lp.a_ub.row(i)) out << ' ' << a;
    out << ' ' << lp.b_ub[i] << '\n';
  }
  for (std::size_t i = 0; i < lp.num_eq(); ++i) {
    out << "eq";
    for (double a : lp.a_eq.row(i)) out << ' ' << a;
    out << ' ' << lp.b_eq[i] << '\n';
  }
  out << "lo";
  for (double l : lp.lower) {
    out << ' ';
    write_value(out, l);
  }
  out << "\nhi";
  for (double u : lp.upper) {
    out << ' ';
    write_value(out, u);
  }
  out << '\n';
  out.precision(old_precision);
}

LinearProgram read_text(std::istream& in) {
  expect(in, "LP");
  std::size_t v = 0, mu = 0, me = 0;
  if (!(in >> v >> mu >> me)) throw std::runtime_error("LP text: bad header");
  LinearProgram lp(v);
  expect(in, "c");
  for (auto& c : lp.objective) c = read_value(in);

  std::string pending;  // one token of lookahead for the optional c2 line
  if (!(in >> pending)) throw std::runtime_error("LP text: unexpected end of input");
  if (pending == "c2") {
    lp.secondary.resize(v);
    for (auto& c : lp.secondary) c = read_value(in);
    pending.clear();
  }
  auto tag = [&](const std::string& word) {
    if (!pending.empty()) {
      if (pending != word) throw std::runtime_error("LP text: expected '" + word + "'");
      pending.clear();
    } else {
      expect(in, word);
    }
  };

  lp.a_ub = Matrix(mu, v);
  lp.b_ub.resize(mu);
  for (std::size_t i = 0; i < mu; ++i) {
    tag("ub");
    for (std::size_t j = 0; j < v; ++j) lp.a_ub(i, j) = read_value(in);
    lp.b_ub[i] = read_value(in);
  }
  lp.a_eq = Matrix(me, v);
  lp.b_eq.resize(me);
  for (std::size_t i = 0; i < me; ++i) {
    tag("eq");
    for (std::size_t j = 0; j < v; ++j) lp.a_eq(i, j) = read_value(in);
    lp.b_eq[i] = read_value(in);
  }
  tag("lo");
  for (auto& l : lp.lower) l = read_value(in);
  tag("hi");
  for (auto& u : lp.upper) u = read_value(in);
  lp.validate();
  return lp;
}

}  // namespace rhc::lp
