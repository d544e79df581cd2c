#include "boxpolicy/lp.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>
#include <string>

#include "boxpolicy/errors.hpp"

namespace boxpolicy {

std::size_t LinearProgram::add_variable(double cost, double lo, double hi) {
  objective.push_back(cost);
  lower.push_back(lo);
  upper.push_back(hi);
  return objective.size() - 1;
}

std::size_t LinearProgram::add_row(std::vector<std::pair<std::size_t, double>> coeffs, RowSense sense,
                                   double rhs) {
  rows.push_back(LinearRow{std::move(coeffs), sense, rhs});
  return rows.size() - 1;
}

const char* to_string(LpStatus status) {
  switch (status) {
    case LpStatus::kOptimal: return "optimal";
    case LpStatus::kInfeasible: return "infeasible";
    case LpStatus::kUnbounded: return "unbounded";
    case LpStatus::kNumericalFailure: return "numerical_failure";
    case LpStatus::kIterationLimit: return "iteration_limit";
    case LpStatus::kTimeLimit: return "time_limit";
  }
  return "unknown";
}

namespace {

using Entries = std::vector<std::pair<std::size_t, double>>;

void validate(const LinearProgram& lp) {
  const auto n = lp.num_vars();
  if (lp.lower.size() != n || lp.upper.size() != n) {
    throw PreconditionError("LP bound vectors do not match the objective length");
  }
  for (std::size_t j = 0; j < n; ++j) {
    if (!std::isfinite(lp.objective[j]) || std::isnan(lp.lower[j]) || std::isnan(lp.upper[j]) ||
        lp.lower[j] > lp.upper[j] || lp.lower[j] == kInf || lp.upper[j] == -kInf) {
      throw PreconditionError("LP variable " + std::to_string(j) + " has invalid cost or bounds");
    }
  }
  for (std::size_t r = 0; r < lp.num_rows(); ++r) {
    const auto& row = lp.rows[r];
    if (!std::isfinite(row.rhs)) throw PreconditionError("LP row " + std::to_string(r) + " has non-finite rhs");
    for (const auto& [j, v] : row.coeffs) {
      if (j >= n || !std::isfinite(v)) {
        throw PreconditionError("LP row " + std::to_string(r) + " has an invalid coefficient");
      }
    }
  }
}

// Bounded primal simplex on A x - z = 0, where z holds one logical per row.
// The basis matrix is kept as a dense inverse of its kernel: the rows whose
// logical is nonbasic, restricted to the basic structural columns. Rows with
// a basic logical are recovered by substitution, so the dense part never
// exceeds the number of structural variables.
class Simplex {
 public:
  Simplex(const LinearProgram& lp, const LpOptions& opt) : lp_(lp), opt_(opt) {
    n_ = lp.num_vars();
    m_ = lp.num_rows();
    cols_.assign(n_, {});
    rows_.assign(m_, {});
    for (std::size_t r = 0; r < m_; ++r) {
      // Merge duplicate coefficients of the same variable.
      Entries merged = lp.rows[r].coeffs;
      std::sort(merged.begin(), merged.end());
      Entries clean;
      for (const auto& [j, v] : merged) {
        if (!clean.empty() && clean.back().first == j) {
          clean.back().second += v;
        } else {
          clean.emplace_back(j, v);
        }
      }
      for (const auto& [j, v] : clean) {
        if (v == 0.0) continue;
        rows_[r].emplace_back(j, v);
        cols_[j].emplace_back(r, v);
      }
    }
    lb_.resize(n_ + m_);
    ub_.resize(n_ + m_);
    for (std::size_t j = 0; j < n_; ++j) {
      lb_[j] = lp.lower[j];
      ub_[j] = lp.upper[j];
    }
    for (std::size_t r = 0; r < m_; ++r) {
      const auto& row = lp.rows[r];
      lb_[n_ + r] = row.sense == RowSense::kLessEqual ? -kInf : row.rhs;
      ub_[n_ + r] = row.sense == RowSense::kGreaterEqual ? kInf : row.rhs;
    }
    cap_ = std::min(n_, m_);
    g_.resize(static_cast<Eigen::Index>(cap_), static_cast<Eigen::Index>(cap_));
    ws_.resize(static_cast<Eigen::Index>(cap_));
    wl_.assign(m_, 0.0);
    y_.assign(m_, 0.0);
    max_iter_ = opt.max_iterations ? opt.max_iterations : 50 * (n_ + m_) + 10000;
  }

  LpSolution run() {
    if (!(opt_.warm_start && try_warm_start(*opt_.warm_start))) cold_start();
    if (!refactor()) {
      cold_start();
      if (!refactor()) return failure(LpStatus::kNumericalFailure);
    }

    std::size_t since_refactor = 0;
    if (opt_.warm_start) {
      const auto outcome = dual_phase(since_refactor);
      if (outcome != LpStatus::kOptimal) return failure(outcome);
    }

    std::size_t stall = 0;
    double best_progress = kInf;
    int last_phase = 0;
    int verify_rounds = 0;

    for (;; ++iter_) {
      if (iter_ >= max_iter_) return failure(LpStatus::kIterationLimit);
      if (opt_.deadline && (iter_ & 63) == 0 && std::chrono::steady_clock::now() > *opt_.deadline) {
        return failure(LpStatus::kTimeLimit);
      }
      if (since_refactor >= opt_.refactor_interval) {
        if (!refactor()) return failure(LpStatus::kNumericalFailure);
        since_refactor = 0;
      }

      const double infeasibility = total_infeasibility();
      const int phase = infeasibility > 0.0 ? 1 : 2;
      if (phase != last_phase) {
        last_phase = phase;
        best_progress = kInf;
        stall = 0;
      }
      const double progress = phase == 1 ? infeasibility : objective();
      if (progress < best_progress - 1e-12 * std::max(1.0, std::abs(best_progress))) {
        best_progress = progress;
        stall = 0;
      } else if (++stall > 5 * (n_ + m_)) {
        bland_ = true;
      }

      btran(phase);
      const auto [entering, direction] = price(phase);
      if (entering == kNone) {
        if (phase == 1) return failure(LpStatus::kInfeasible);
        // Confirm on a fresh factorization before declaring optimality.
        if (since_refactor > 0 && verify_rounds < 5) {
          ++verify_rounds;
          if (!refactor()) return failure(LpStatus::kNumericalFailure);
          since_refactor = 0;
          continue;
        }
        return finish();
      }

      ftran(entering);
      const auto [leaving, step] = ratio_test(entering, direction);
      if (step == kInf) {
        if (phase == 2) return failure(LpStatus::kUnbounded);
        return failure(LpStatus::kNumericalFailure);
      }
      apply(entering, direction, leaving, step);
      if (leaving != entering) {
        if (!update_inverse(entering, leaving)) {
          if (!rebuild_lists() || !refactor()) return failure(LpStatus::kNumericalFailure);
          since_refactor = 0;
          continue;
        }
        ++since_refactor;
      }
    }
  }

 private:
  static constexpr std::size_t kNone = static_cast<std::size_t>(-1);

  bool is_structural(std::size_t j) const { return j < n_; }
  Eigen::Index k() const { return static_cast<Eigen::Index>(krow_.size()); }

  double initial_value(std::size_t j, VarState& state) const {
    if (std::isfinite(lb_[j])) {
      state = VarState::kAtLower;
      return lb_[j];
    }
    if (std::isfinite(ub_[j])) {
      state = VarState::kAtUpper;
      return ub_[j];
    }
    state = VarState::kFreeZero;
    return 0.0;
  }

  void reset_lists() {
    krow_.clear();
    kcol_.clear();
    lrow_.clear();
    row_pos_.assign(m_, -1);
    col_pos_.assign(n_, -1);
    lpos_.assign(m_, -1);
  }

  void cold_start() {
    reset_lists();
    state_.assign(n_ + m_, VarState::kBasic);
    x_.assign(n_ + m_, 0.0);
    for (std::size_t j = 0; j < n_; ++j) x_[j] = initial_value(j, state_[j]);
    for (std::size_t r = 0; r < m_; ++r) push_basic_logical(r);
  }

  bool try_warm_start(const std::vector<VarState>& basis) {
    if (basis.size() != n_ + m_) return false;
    const auto basics = std::count(basis.begin(), basis.end(), VarState::kBasic);
    if (static_cast<std::size_t>(basics) != m_) return false;
    state_ = basis;
    x_.assign(n_ + m_, 0.0);
    for (std::size_t j = 0; j < n_ + m_; ++j) {
      auto& s = state_[j];
      if (s == VarState::kBasic) continue;
      if (s == VarState::kAtLower && std::isfinite(lb_[j])) {
        x_[j] = lb_[j];
      } else if (s == VarState::kAtUpper && std::isfinite(ub_[j])) {
        x_[j] = ub_[j];
      } else {
        x_[j] = initial_value(j, s);
      }
    }
    return rebuild_lists();
  }

  // Derives the kernel and basic-logical lists from state_.
  bool rebuild_lists() {
    reset_lists();
    for (std::size_t j = 0; j < n_; ++j) {
      if (state_[j] == VarState::kBasic) {
        col_pos_[j] = static_cast<std::ptrdiff_t>(kcol_.size());
        kcol_.push_back(j);
      }
    }
    for (std::size_t r = 0; r < m_; ++r) {
      if (state_[n_ + r] == VarState::kBasic) {
        push_basic_logical(r);
      } else {
        row_pos_[r] = static_cast<std::ptrdiff_t>(krow_.size());
        krow_.push_back(r);
      }
    }
    return krow_.size() == kcol_.size();
  }

  void push_basic_logical(std::size_t r) {
    lpos_[r] = static_cast<std::ptrdiff_t>(lrow_.size());
    lrow_.push_back(r);
  }

  void remove_basic_logical(std::size_t r) {
    const auto pos = static_cast<std::size_t>(lpos_[r]);
    const auto last = lrow_.back();
    lrow_[pos] = last;
    lpos_[last] = static_cast<std::ptrdiff_t>(pos);
    lrow_.pop_back();
    lpos_[r] = -1;
  }

  // Rebuilds the kernel inverse from scratch and recomputes basic values. The
  // kernel is usually close to a permuted diagonal, so a sparse LU applied to
  // the identity is far cheaper than a dense factorization.
  bool refactor() {
    const auto kk = k();
    if (kk > 0) {
      std::vector<Eigen::Triplet<double>> entries;
      std::vector<double> row_norm(static_cast<std::size_t>(kk), 0.0);
      for (Eigen::Index c = 0; c < kk; ++c) {
        for (const auto& [r, v] : cols_[kcol_[static_cast<std::size_t>(c)]]) {
          if (row_pos_[r] < 0) continue;
          entries.emplace_back(row_pos_[r], c, v);
          row_norm[static_cast<std::size_t>(row_pos_[r])] += std::abs(v);
        }
      }
      Eigen::SparseMatrix<double> kernel(kk, kk);
      kernel.setFromTriplets(entries.begin(), entries.end());
      kernel.makeCompressed();
      Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
      lu.compute(kernel);
      if (lu.info() != Eigen::Success) return false;
      // Solving straight into the block view gives wrong results; go through a temporary.
      const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(kk, kk);
      const Eigen::MatrixXd inverse = lu.solve(identity);
      g_.topLeftCorner(kk, kk) = inverse;
      if (!g_.topLeftCorner(kk, kk).allFinite()) return false;
      // Infinity-norm condition number, exact since the inverse is explicit.
      const double kernel_norm = *std::max_element(row_norm.begin(), row_norm.end());
      const double inverse_norm = g_.topLeftCorner(kk, kk).cwiseAbs().rowwise().sum().maxCoeff();
      if (!(kernel_norm * inverse_norm <= opt_.max_condition)) return false;
    }
    recompute_basics();
    return true;
  }

  void recompute_basics() {
    // rhs = -(nonbasic part of [A, -I] x)
    std::vector<double> rhs(m_, 0.0);
    for (std::size_t j = 0; j < n_; ++j) {
      if (state_[j] == VarState::kBasic || x_[j] == 0.0) continue;
      for (const auto& [r, v] : cols_[j]) rhs[r] -= v * x_[j];
    }
    for (std::size_t r = 0; r < m_; ++r) {
      if (state_[n_ + r] != VarState::kBasic) rhs[r] += x_[n_ + r];
    }
    const auto kk = k();
    Eigen::VectorXd a_n(kk);
    for (Eigen::Index p = 0; p < kk; ++p) a_n(p) = rhs[krow_[static_cast<std::size_t>(p)]];
    Eigen::VectorXd xs = kk > 0 ? Eigen::VectorXd(g_.topLeftCorner(kk, kk) * a_n) : Eigen::VectorXd();
    for (Eigen::Index c = 0; c < kk; ++c) x_[kcol_[static_cast<std::size_t>(c)]] = xs(c);
    for (auto r : lrow_) x_[n_ + r] = -rhs[r];
    for (Eigen::Index c = 0; c < kk; ++c) {
      const double v = xs(c);
      if (v == 0.0) continue;
      for (const auto& [r, a] : cols_[kcol_[static_cast<std::size_t>(c)]]) {
        if (row_pos_[r] < 0) x_[n_ + r] += a * v;
      }
    }
  }

  double infeasibility_of(std::size_t j) const {
    const double tol = opt_.feasibility_tol;
    if (x_[j] < lb_[j] - tol) return lb_[j] - x_[j];
    if (x_[j] > ub_[j] + tol) return x_[j] - ub_[j];
    return 0.0;
  }

  double total_infeasibility() const {
    double s = 0.0;
    for (auto j : kcol_) s += infeasibility_of(j);
    for (auto r : lrow_) s += infeasibility_of(n_ + r);
    return s;
  }

  double objective() const {
    double v = 0.0;
    for (std::size_t j = 0; j < n_; ++j) v += lp_.objective[j] * x_[j];
    return v;
  }

  // Phase 0 prices the unit vector of `unit_basic_`, giving a row of the
  // basis inverse.
  double basic_cost(std::size_t j, int phase) const {
    if (phase == 0) return j == unit_basic_ ? 1.0 : 0.0;
    if (phase == 2) return is_structural(j) ? lp_.objective[j] : 0.0;
    const double tol = opt_.feasibility_tol;
    if (x_[j] < lb_[j] - tol) return -1.0;
    if (x_[j] > ub_[j] + tol) return 1.0;
    return 0.0;
  }

  void btran(int phase) {
    std::fill(y_.begin(), y_.end(), 0.0);
    for (auto r : lrow_) y_[r] = -basic_cost(n_ + r, phase);
    const auto kk = k();
    if (kk == 0) return;
    Eigen::VectorXd rhs(kk);
    for (Eigen::Index c = 0; c < kk; ++c) {
      const auto j = kcol_[static_cast<std::size_t>(c)];
      double v = basic_cost(j, phase);
      for (const auto& [r, a] : cols_[j]) {
        if (row_pos_[r] < 0) v -= a * y_[r];
      }
      rhs(c) = v;
    }
    const Eigen::VectorXd yn = g_.topLeftCorner(kk, kk).transpose() * rhs;
    for (Eigen::Index p = 0; p < kk; ++p) y_[krow_[static_cast<std::size_t>(p)]] = yn(p);
  }

  double reduced_cost(std::size_t j, int phase) const {
    if (!is_structural(j)) return y_[j - n_];
    double d = phase == 2 ? lp_.objective[j] : 0.0;
    for (const auto& [r, a] : cols_[j]) d -= a * y_[r];
    return d;
  }

  bool dual_feasible() const {
    const double tol = opt_.optimality_tol;
    for (std::size_t j = 0; j < n_ + m_; ++j) {
      const auto s = state_[j];
      if (s == VarState::kBasic || lb_[j] == ub_[j]) continue;
      const double d = reduced_cost(j, 2);
      if (d < -tol && s != VarState::kAtUpper) return false;
      if (d > tol && s != VarState::kAtLower) return false;
    }
    return true;
  }

  // Dual simplex from a dual feasible warm start (typically a parent optimum
  // after a bound change). Hands over to the primal loop once primal feasible,
  // or when the start is not dual feasible or progress stalls; the primal
  // loop then settles the outcome. Returns kOptimal to continue.
  LpStatus dual_phase(std::size_t& since_refactor) {
    btran(2);
    if (!dual_feasible()) return LpStatus::kOptimal;
    const double tol = opt_.feasibility_tol;
    const double ptol = opt_.pivot_tol;
    const std::size_t cap = 2 * (n_ + m_) + 100;
    for (std::size_t it = 0; it < cap; ++it, ++iter_) {
      if (iter_ >= max_iter_) return LpStatus::kIterationLimit;
      if (opt_.deadline && (iter_ & 63) == 0 && std::chrono::steady_clock::now() > *opt_.deadline) {
        return LpStatus::kTimeLimit;
      }
      if (since_refactor >= opt_.refactor_interval) {
        if (!refactor()) return LpStatus::kNumericalFailure;
        since_refactor = 0;
      }
      // Leaving: the most infeasible basic variable.
      std::size_t p = kNone;
      double worst = tol;
      auto consider = [&](std::size_t j) {
        const double v = infeasibility_of(j);
        if (v > worst) {
          worst = v;
          p = j;
        }
      };
      for (auto j : kcol_) consider(j);
      for (auto r : lrow_) consider(n_ + r);
      if (p == kNone) return LpStatus::kOptimal;
      const bool raise = x_[p] < lb_[p];

      btran(2);
      std::vector<double> d(n_ + m_, 0.0);
      for (std::size_t j = 0; j < n_ + m_; ++j) {
        if (state_[j] != VarState::kBasic) d[j] = reduced_cost(j, 2);
      }
      unit_basic_ = p;
      btran(0);
      unit_basic_ = kNone;

      // Entering: the dual ratio test, ties to the larger pivot.
      std::size_t q = kNone;
      int q_dir = 0;
      double best_ratio = kInf;
      double best_alpha = 0.0;
      for (std::size_t j = 0; j < n_ + m_; ++j) {
        const auto s = state_[j];
        if (s == VarState::kBasic || lb_[j] == ub_[j]) continue;
        const double alpha = -reduced_cost(j, 0);  // d x_p = -alpha d x_j
        if (std::abs(alpha) <= ptol) continue;
        // Direction of x_j that moves x_p toward its violated bound.
        const int dir = (alpha < 0.0) == raise ? 1 : -1;
        if (dir > 0 && s == VarState::kAtUpper) continue;
        if (dir < 0 && s == VarState::kAtLower) continue;
        const double ratio = std::max(0.0, std::abs(d[j])) / std::abs(alpha);
        if (ratio < best_ratio - 1e-12 || (ratio <= best_ratio + 1e-12 && std::abs(alpha) > best_alpha)) {
          best_ratio = ratio;
          best_alpha = std::abs(alpha);
          q = j;
          q_dir = dir;
        }
      }
      if (q == kNone) return LpStatus::kOptimal;  // primal infeasible; phase 1 confirms

      ftran(q);
      const double w = is_structural(p) ? ws_(col_pos_[p]) : wl_[p - n_];
      if (std::abs(w) <= ptol) return LpStatus::kOptimal;
      const double bound = raise ? lb_[p] : ub_[p];
      const double step = std::abs(bound - x_[p]) / std::abs(w);
      leave_rate_ = -q_dir * w;
      apply(q, q_dir, p, step);
      if (!update_inverse(q, p)) {
        if (!rebuild_lists() || !refactor()) return LpStatus::kNumericalFailure;
        since_refactor = 0;
        continue;
      }
      ++since_refactor;
    }
    return LpStatus::kOptimal;
  }

  // Returns (entering variable, +1 to increase / -1 to decrease).
  std::pair<std::size_t, int> price(int phase) const {
    const double tol = opt_.optimality_tol;
    std::size_t best = kNone;
    int best_dir = 0;
    double best_score = 0.0;
    for (std::size_t j = 0; j < n_ + m_; ++j) {
      const auto s = state_[j];
      if (s == VarState::kBasic || lb_[j] == ub_[j]) continue;
      const double d = reduced_cost(j, phase);
      int dir = 0;
      if (d < -tol && s != VarState::kAtUpper) dir = 1;
      if (d > tol && s != VarState::kAtLower) dir = -1;
      if (dir == 0) continue;
      if (bland_) return {j, dir};
      if (std::abs(d) > best_score) {
        best_score = std::abs(d);
        best = j;
        best_dir = dir;
      }
    }
    return {best, best_dir};
  }

  // Solves B w = column of `q` in [A, -I].
  void ftran(std::size_t q) {
    const auto kk = k();
    for (auto r : lrow_) wl_[r] = 0.0;
    if (kk > 0) ws_.head(kk).setZero();
    if (is_structural(q)) {
      for (const auto& [r, v] : cols_[q]) {
        if (row_pos_[r] >= 0) ws_.head(kk) += v * g_.col(row_pos_[r]).head(kk);
      }
      for (const auto& [r, v] : cols_[q]) {
        if (row_pos_[r] < 0) wl_[r] -= v;
      }
    } else {
      const auto r0 = q - n_;
      ws_.head(kk) = -g_.col(row_pos_[r0]).head(kk);
    }
    for (Eigen::Index c = 0; c < kk; ++c) {
      const double w = ws_(c);
      if (w == 0.0) continue;
      for (const auto& [r, a] : cols_[kcol_[static_cast<std::size_t>(c)]]) {
        if (row_pos_[r] < 0) wl_[r] += a * w;
      }
    }
  }

  struct Candidate {
    std::size_t var;
    double rate;   // d x_var / d step
    double ratio;  // exact step to the blocking bound
  };

  // Blocking bound for a basic variable moving at `rate`; phase-1 infeasible
  // variables may travel up to the bound they violate.
  double limit(std::size_t j, double rate, double slack) const {
    const double tol = opt_.feasibility_tol;
    double lo = lb_[j];
    double hi = ub_[j];
    if (x_[j] < lb_[j] - tol) {
      lo = -kInf;
      hi = lb_[j];
    } else if (x_[j] > ub_[j] + tol) {
      lo = ub_[j];
      hi = kInf;
    }
    if (rate < 0.0) return lo == -kInf ? kInf : std::max(0.0, (x_[j] - lo + slack) / -rate);
    return hi == kInf ? kInf : std::max(0.0, (hi - x_[j] + slack) / rate);
  }

  // Bound a basic variable reaches when moving at `rate`, judged before the step.
  std::pair<double, VarState> target(std::size_t j, double rate) const {
    const double tol = opt_.feasibility_tol;
    if (rate < 0.0) {
      if (x_[j] > ub_[j] + tol) return {ub_[j], VarState::kAtUpper};
      return {lb_[j], VarState::kAtLower};
    }
    if (x_[j] < lb_[j] - tol) return {lb_[j], VarState::kAtLower};
    return {ub_[j], VarState::kAtUpper};
  }

  std::pair<std::size_t, double> ratio_test(std::size_t q, int dir) {
    candidates_.clear();
    const double ptol = opt_.pivot_tol;
    const auto kk = k();
    for (Eigen::Index c = 0; c < kk; ++c) {
      const double w = ws_(c);
      if (std::abs(w) <= ptol) continue;
      candidates_.push_back({kcol_[static_cast<std::size_t>(c)], -dir * w, 0.0});
    }
    for (auto r : lrow_) {
      const double w = wl_[r];
      if (std::abs(w) <= ptol) continue;
      candidates_.push_back({n_ + r, -dir * w, 0.0});
    }
    for (auto& cand : candidates_) cand.ratio = limit(cand.var, cand.rate, 0.0);
    const double own = ub_[q] - lb_[q];  // bound flip distance, kInf when one-sided

    std::size_t leave = kNone;
    double step = kInf;
    if (bland_) {
      for (const auto& cand : candidates_) step = std::min(step, cand.ratio);
      if (std::isfinite(own) && own <= step) return {q, own};
      for (const auto& cand : candidates_) {
        if (cand.ratio <= step + 1e-12 && cand.var < leave) {
          leave = cand.var;
          leave_rate_ = cand.rate;
        }
      }
      if (leave != kNone) step = std::max(0.0, std::min(step, limit(leave, leave_rate_, 0.0)));
      return {leave, step};
    }

    // Harris two-pass ratio test.
    double relaxed = kInf;
    for (const auto& cand : candidates_) {
      relaxed = std::min(relaxed, limit(cand.var, cand.rate, opt_.feasibility_tol));
    }
    double best_rate = 0.0;
    for (const auto& cand : candidates_) {
      if (cand.ratio > relaxed) continue;
      if (std::abs(cand.rate) > best_rate) {
        best_rate = std::abs(cand.rate);
        leave = cand.var;
        leave_rate_ = cand.rate;
        step = cand.ratio;
      }
    }
    if (std::isfinite(own) && own <= step) return {q, own};
    return {leave, step};
  }

  void apply(std::size_t q, int dir, std::size_t p, double step) {
    const auto kk = k();
    std::pair<double, VarState> snap{0.0, VarState::kAtLower};
    if (p != q) snap = target(p, leave_rate_);
    if (step > 0.0) {
      x_[q] += dir * step;
      for (Eigen::Index c = 0; c < kk; ++c) x_[kcol_[static_cast<std::size_t>(c)]] -= dir * step * ws_(c);
      for (auto r : lrow_) x_[n_ + r] -= dir * step * wl_[r];
    }
    if (p == q) {
      x_[q] = dir > 0 ? ub_[q] : lb_[q];
      state_[q] = dir > 0 ? VarState::kAtUpper : VarState::kAtLower;
      return;
    }
    x_[p] = snap.first;
    state_[p] = lb_[p] == ub_[p] ? VarState::kAtLower : snap.second;
    state_[q] = VarState::kBasic;
  }

  bool update_inverse(std::size_t q, std::size_t p) {
    const auto kk = k();
    const double tiny = 1e-11;
    if (is_structural(q) && is_structural(p)) {
      const auto c = col_pos_[p];
      const double piv = ws_(c);
      if (std::abs(piv) < tiny) return false;
      Eigen::RowVectorXd row = g_.row(c).head(kk) / piv;
      g_.topLeftCorner(kk, kk).noalias() -= ws_.head(kk) * row;
      g_.row(c).head(kk) = row;
      kcol_[static_cast<std::size_t>(c)] = q;
      col_pos_[q] = c;
      col_pos_[p] = -1;
      return true;
    }
    if (is_structural(q)) {
      // Logical of row r leaves: kernel grows by row r and column q.
      const auto r = p - n_;
      const double sigma = -wl_[r];
      if (std::abs(sigma) < tiny) return false;
      Eigen::RowVectorXd v = Eigen::RowVectorXd::Zero(kk);
      for (const auto& [j, a] : rows_[r]) {
        if (col_pos_[j] >= 0) v += a * g_.row(col_pos_[j]).head(kk);
      }
      const Eigen::VectorXd u = ws_.head(kk);
      g_.topLeftCorner(kk, kk).noalias() += u * v / sigma;
      g_.col(kk).head(kk) = -u / sigma;
      g_.row(kk).head(kk) = -v / sigma;
      g_(kk, kk) = 1.0 / sigma;
      remove_basic_logical(r);
      row_pos_[r] = kk;
      krow_.push_back(r);
      col_pos_[q] = kk;
      kcol_.push_back(q);
      return true;
    }
    const auto r0 = q - n_;
    const auto rho = row_pos_[r0];
    if (is_structural(p)) {
      // Logical of row r0 enters, structural p leaves: kernel shrinks.
      const auto c = col_pos_[p];
      const double piv = g_(c, rho);
      if (std::abs(piv) < tiny) return false;
      const Eigen::VectorXd col = g_.col(rho).head(kk);
      const Eigen::RowVectorXd row = g_.row(c).head(kk);
      g_.topLeftCorner(kk, kk).noalias() -= col * row / piv;
      const auto last = kk - 1;
      if (c != last) {
        g_.row(c).head(kk) = g_.row(last).head(kk);
        kcol_[static_cast<std::size_t>(c)] = kcol_.back();
        col_pos_[kcol_[static_cast<std::size_t>(c)]] = c;
      }
      if (rho != last) {
        g_.col(rho).head(kk) = g_.col(last).head(kk);
        krow_[static_cast<std::size_t>(rho)] = krow_.back();
        row_pos_[krow_[static_cast<std::size_t>(rho)]] = rho;
      }
      kcol_.pop_back();
      krow_.pop_back();
      col_pos_[p] = -1;
      row_pos_[r0] = -1;
      push_basic_logical(r0);
      return true;
    }
    // Logical r0 enters and logical r1 leaves: kernel row rho now comes from r1.
    const auto r1 = p - n_;
    Eigen::RowVectorXd v = Eigen::RowVectorXd::Zero(kk);
    for (const auto& [j, a] : rows_[r1]) {
      if (col_pos_[j] >= 0) v += a * g_.row(col_pos_[j]).head(kk);
    }
    const double den = v(rho);
    if (std::abs(den) < tiny) return false;
    v(rho) -= 1.0;
    const Eigen::VectorXd col = g_.col(rho).head(kk);
    g_.topLeftCorner(kk, kk).noalias() -= col * v / den;
    remove_basic_logical(r1);
    krow_[static_cast<std::size_t>(rho)] = r1;
    row_pos_[r1] = rho;
    row_pos_[r0] = -1;
    push_basic_logical(r0);
    return true;
  }

  LpSolution failure(LpStatus status) {
    LpSolution sol;
    sol.status = status;
    sol.iterations = iter_;
    sol.x.assign(x_.begin(), x_.begin() + static_cast<std::ptrdiff_t>(std::min(n_, x_.size())));
    return sol;
  }

  LpSolution finish() {
    LpSolution sol;
    sol.status = LpStatus::kOptimal;
    sol.iterations = iter_;
    sol.x.assign(x_.begin(), x_.begin() + static_cast<std::ptrdiff_t>(n_));
    // Snap values sitting within tolerance of a bound.
    for (std::size_t j = 0; j < n_; ++j) {
      if (std::abs(sol.x[j] - lb_[j]) <= opt_.feasibility_tol) sol.x[j] = lb_[j];
      if (std::abs(sol.x[j] - ub_[j]) <= opt_.feasibility_tol) sol.x[j] = ub_[j];
    }
    double obj = 0.0;
    for (std::size_t j = 0; j < n_; ++j) obj += lp_.objective[j] * sol.x[j];
    sol.objective_value = obj;
    btran(2);
    sol.row_duals = y_;
    sol.reduced_costs.resize(n_);
    for (std::size_t j = 0; j < n_; ++j) {
      sol.reduced_costs[j] = state_[j] == VarState::kBasic ? 0.0 : reduced_cost(j, 2);
    }
    // Basic logicals carry zero duals exactly.
    for (auto r : lrow_) sol.row_duals[r] = 0.0;
    sol.basis = state_;
    return sol;
  }

  const LinearProgram& lp_;
  const LpOptions& opt_;
  std::size_t n_ = 0;
  std::size_t m_ = 0;
  std::size_t cap_ = 0;
  std::size_t max_iter_ = 0;
  std::size_t iter_ = 0;
  bool bland_ = false;
  std::size_t unit_basic_ = kNone;

  std::vector<Entries> cols_;
  std::vector<Entries> rows_;
  std::vector<double> lb_, ub_;
  std::vector<VarState> state_;
  std::vector<double> x_;

  std::vector<std::size_t> krow_;  // kernel position -> row (logical nonbasic)
  std::vector<std::size_t> kcol_;  // kernel position -> basic structural
  std::vector<std::size_t> lrow_;  // rows with a basic logical
  std::vector<std::ptrdiff_t> row_pos_, col_pos_, lpos_;
  Eigen::MatrixXd g_;  // inverse kernel: rows by kcol position, columns by krow position

  Eigen::VectorXd ws_;
  std::vector<double> wl_;
  std::vector<double> y_;
  std::vector<Candidate> candidates_;
  double leave_rate_ = 0.0;
};

}  // namespace

LpSolution solve_lp(const LinearProgram& lp, const LpOptions& options) {
  validate(lp);
  Simplex simplex(lp, options);
  return simplex.run();
}

double dual_objective(const LinearProgram& lp, const LpSolution& sol) {
  double v = 0.0;
  for (std::size_t r = 0; r < lp.num_rows(); ++r) v += lp.rows[r].rhs * sol.row_duals[r];
  for (std::size_t j = 0; j < lp.num_vars(); ++j) {
    const double d = sol.reduced_costs[j];
    if (d > 0.0) {
      v += d * lp.lower[j];
    } else if (d < 0.0) {
      v += d * lp.upper[j];
    }
  }
  return v;
}

LpSolution solve_binary(const LinearProgram& lp, std::span<const std::size_t> integer_vars,
                        const BinaryOptions& options) {
  validate(lp);
  for (auto j : integer_vars) {
    if (j >= lp.num_vars() || lp.lower[j] < 0.0 || lp.upper[j] > 1.0) {
      throw PreconditionError("binary variable " + std::to_string(j) + " must have bounds within [0,1]");
    }
  }
  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();
  std::optional<Clock::time_point> deadline;
  if (std::isfinite(options.time_limit_seconds)) {
    deadline = start + std::chrono::duration_cast<Clock::duration>(
                           std::chrono::duration<double>(options.time_limit_seconds));
  }

  struct Node {
    std::vector<std::pair<std::size_t, double>> fixings;  // variable -> fixed value
    std::shared_ptr<const std::vector<VarState>> basis;   // parent's optimal basis
  };
  std::vector<Node> stack{Node{}};
  LpSolution incumbent;
  bool have_incumbent = false;
  bool timed_out = false;
  std::size_t branches = 0;
  std::size_t iterations = 0;
  LinearProgram node_lp = lp;

  while (!stack.empty()) {
    if (deadline && Clock::now() > *deadline) {
      timed_out = true;
      break;
    }
    Node node = std::move(stack.back());
    stack.pop_back();
    for (auto j : integer_vars) {
      node_lp.lower[j] = lp.lower[j];
      node_lp.upper[j] = lp.upper[j];
    }
    bool contradictory = false;
    for (const auto& [j, v] : node.fixings) {
      if (v < node_lp.lower[j] || v > node_lp.upper[j]) contradictory = true;
      node_lp.lower[j] = node_lp.upper[j] = v;
    }
    if (contradictory) continue;

    LpOptions lp_opts = options.lp;
    lp_opts.deadline = deadline;
    if (node.basis) lp_opts.warm_start = node.basis.get();
    auto relaxed = solve_lp(node_lp, lp_opts);
    iterations += relaxed.iterations;
    if (relaxed.status == LpStatus::kTimeLimit) {
      timed_out = true;
      break;
    }
    if (relaxed.status == LpStatus::kInfeasible) continue;
    if (relaxed.status != LpStatus::kOptimal) {
      relaxed.iterations = iterations;
      return relaxed;
    }
    if (have_incumbent && relaxed.objective_value >= incumbent.objective_value - options.objective_tol) continue;
    if (relaxed.objective_value > options.cutoff + options.objective_tol) continue;

    std::size_t branch_var = static_cast<std::size_t>(-1);
    double best_gap = kInf;
    for (auto j : integer_vars) {
      const double v = relaxed.x[j];
      const double frac = v - std::floor(v);
      if (std::min(frac, 1.0 - frac) <= options.integrality_tol) continue;
      const double gap = std::abs(frac - 0.5);
      if (gap < best_gap || (gap == best_gap && j < branch_var)) {
        best_gap = gap;
        branch_var = j;
      }
    }
    if (branch_var == static_cast<std::size_t>(-1)) {
      for (auto j : integer_vars) relaxed.x[j] = std::round(relaxed.x[j]);
      incumbent = std::move(relaxed);
      have_incumbent = true;
      continue;
    }
    ++branches;
    node.basis = std::make_shared<const std::vector<VarState>>(relaxed.basis);
    Node down = node;
    down.fixings.emplace_back(branch_var, 0.0);
    Node up = std::move(node);
    up.fixings.emplace_back(branch_var, 1.0);
    stack.push_back(std::move(down));
    stack.push_back(std::move(up));  // explored first
  }

  if (!have_incumbent) {
    LpSolution none;
    none.status = timed_out ? LpStatus::kTimeLimit : LpStatus::kInfeasible;
    none.timed_out = timed_out;
    none.branch_nodes = branches;
    none.iterations = iterations;
    return none;
  }
  incumbent.timed_out = timed_out;
  incumbent.branch_nodes = branches;
  incumbent.iterations = iterations;
  return incumbent;
}

}  // namespace boxpolicy
