#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace boxpolicy {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class RowSense { kGreaterEqual, kLessEqual, kEqual };

struct LinearRow {
  std::vector<std::pair<std::size_t, double>> coeffs;  // variable -> coefficient
  RowSense sense = RowSense::kLessEqual;
  double rhs = 0.0;
};

// min c'x subject to rows and lower <= x <= upper.
struct LinearProgram {
  std::vector<double> objective;
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<LinearRow> rows;

  std::size_t num_vars() const { return objective.size(); }
  std::size_t num_rows() const { return rows.size(); }

  std::size_t add_variable(double cost, double lo, double hi);
  std::size_t add_row(std::vector<std::pair<std::size_t, double>> coeffs, RowSense sense, double rhs);
};

enum class LpStatus { kOptimal, kInfeasible, kUnbounded, kNumericalFailure, kIterationLimit, kTimeLimit };

const char* to_string(LpStatus status);

// Status of one column of [A, -I] (structurals first, then one logical per row).
enum class VarState : std::uint8_t { kBasic, kAtLower, kAtUpper, kFreeZero };

struct LpSolution {
  LpStatus status = LpStatus::kNumericalFailure;
  std::vector<double> x;
  double objective_value = 0.0;
  // >= 0 for >= rows, <= 0 for <= rows, free for = rows.
  std::vector<double> row_duals;
  std::vector<double> reduced_costs;
  std::size_t iterations = 0;
  std::vector<VarState> basis;  // structurals then logicals; usable as a warm start

  // solve_binary only.
  bool timed_out = false;
  std::size_t branch_nodes = 0;
};

struct LpOptions {
  double feasibility_tol = 1e-9;
  double optimality_tol = 1e-9;
  double pivot_tol = 1e-9;
  std::size_t refactor_interval = 100;
  double max_condition = 1e12;
  std::size_t max_iterations = 0;  // 0 picks 50 * (rows + vars) + 10000
  std::optional<std::chrono::steady_clock::time_point> deadline;
  // Starting basis; ignored when inconsistent with the LP.
  const std::vector<VarState>* warm_start = nullptr;
};

// Bounded-variable primal simplex (composite phase 1, Dantzig pricing with a
// Bland fallback after 5 * (rows + vars) non-improving iterations).
LpSolution solve_lp(const LinearProgram& lp, const LpOptions& options = {});

struct BinaryOptions {
  double time_limit_seconds = kInf;
  double integrality_tol = 1e-6;
  double objective_tol = 1e-9;
  // Nodes whose relaxation exceeds cutoff + objective_tol are pruned; without
  // a solution at or below that level the status is kInfeasible.
  double cutoff = kInf;
  LpOptions lp;
};

// Depth-first branch-and-bound over the listed 0/1 variables. On timeout the
// best incumbent is returned with `timed_out` set; with no incumbent the
// status is kTimeLimit.
LpSolution solve_binary(const LinearProgram& lp, std::span<const std::size_t> integer_vars,
                        const BinaryOptions& options = {});

// Dual objective b'y + sum of bound terms; equals the primal objective at optimality.
double dual_objective(const LinearProgram& lp, const LpSolution& sol);

}  // namespace boxpolicy
