#pragma once

#include <cstddef>
#include <vector>

#include "boxpolicy/data.hpp"
#include "boxpolicy/lp.hpp"
#include "boxpolicy/scores.hpp"

namespace boxpolicy {

// Role of a retained sample in the master problem, by treatment and score sign.
enum class SampleClass : std::uint8_t {
  kTreatedPositive,    // I_1 cap P: wants to be covered
  kUntreatedPositive,  // I_-1 cap P: wants to stay uncovered
  kTreatedNegative,    // I_1 cap N: wants to stay uncovered
  kUntreatedNegative,  // I_-1 cap N: wants to be covered
};

// Samples with a nonzero score, re-indexed 0..n'-1.
struct PolicyInstance {
  Dataset data;                    // retained rows only
  std::vector<double> psi;         // aligned with data
  std::vector<std::size_t> rows;   // original dataset row of each retained sample
  IndexPartition partition;        // over retained indices
  std::vector<SampleClass> cls;

  static PolicyInstance build(const Dataset& dataset, const ScoreVector& scores);
  std::size_t n() const { return psi.size(); }
  std::size_t d() const { return data.d(); }
  // Weighted mismatch objective (1/n') sum psi_i I(T_i != pi(X_i)) of `policy`.
  double objective(const Policy& policy) const;
};

struct Cut {
  std::size_t box = 0;
  bool fix_one = false;  // s_box >= 1 when true, s_box <= 0 otherwise
  friend bool operator==(const Cut&, const Cut&) = default;
};

// Restricted master over working set W with branching cuts C.
class MasterProblem {
 public:
  MasterProblem(const PolicyInstance& instance, std::size_t m_max, double omega);

  const PolicyInstance& instance() const { return *instance_; }
  std::size_t m_max() const { return m_max_; }
  double omega() const { return omega_; }

  const std::vector<Hyperbox>& working_set() const { return boxes_; }
  // Samples inside each working-set box (closed membership).
  const std::vector<std::vector<std::size_t>>& members() const { return members_; }
  const std::vector<Cut>& cuts() const { return cuts_; }

  // Appends a column; returns its index.
  std::size_t add_box(Hyperbox box);
  // Index of an identical box, or -1.
  std::ptrdiff_t find_box(const Hyperbox& box) const;
  // Retained samples inside `box`, ascending.
  std::vector<std::size_t> members_of(const Hyperbox& box) const;
  // Index of a box with exactly these members, or -1.
  std::ptrdiff_t find_members(const std::vector<std::size_t>& members) const;
  void add_cut(Cut cut);
  void set_cuts(std::vector<Cut> cuts);
  bool is_fixed(std::size_t box) const;

 private:
  const PolicyInstance* instance_;
  std::size_t m_max_;
  double omega_;
  std::vector<Hyperbox> boxes_;
  std::vector<std::vector<std::size_t>> members_;
  std::vector<Cut> cuts_;
};

// Variable and row layout of a built master LP. Variables: xi_0..xi_{n'-1},
// then s_0..s_{|W|-1}. Rows: covering rows for I_1 cap P, then I_-1 cap N,
// the cardinality row, the cut rows, then one pair row per (sample, box)
// grouped by box.
struct MasterLp {
  LinearProgram lp;
  std::vector<std::size_t> integer_vars;  // the s variables when not relaxed
  std::size_t xi_offset = 0;
  std::size_t s_offset = 0;
  std::vector<std::ptrdiff_t> cover_row;  // per sample: its (9) or (12) row, or -1
  std::size_t cardinality_row = 0;
  std::size_t first_cut_row = 0;
  struct PairRow {
    std::size_t sample;
    std::size_t box;
    std::size_t row;
  };
  std::vector<PairRow> pair_rows;

  std::size_t s_var(std::size_t j) const { return s_offset + j; }
  std::size_t xi_var(std::size_t i) const { return xi_offset + i; }
};

MasterLp build_master(const MasterProblem& problem, bool relaxed);

struct PairDual {
  std::size_t sample;
  std::size_t box;
  double value;
};

// Nonnegative duals in the sign convention of the reduced-cost formula.
struct MasterDuals {
  std::vector<double> mu1;       // per sample, nonzero only for I_1 cap P
  std::vector<double> mu4;       // per sample, nonzero only for I_-1 cap N
  std::vector<PairDual> mu2;     // (i, j) for I_-1 cap P
  std::vector<PairDual> mu3;     // (i, j) for I_1 cap N
  double lambda = 0.0;

  // Sum over boxes of the pair duals of sample i (mu2 or mu3 by class).
  std::vector<double> pair_sums(std::size_t n) const;
};

struct MasterSolution {
  LpStatus status = LpStatus::kNumericalFailure;
  std::vector<double> s;
  std::vector<double> xi;
  double objective = 0.0;
  MasterDuals duals;                       // relaxed solves only
  std::vector<double> column_reduced_costs; // LP reduced cost of each s_j
  std::vector<VarState> basis;
  std::size_t lp_vars = 0;  // layout the basis belongs to
  std::size_t lp_rows = 0;
  bool timed_out = false;
  std::size_t branch_nodes = 0;

  bool integral(double tol = 1e-6) const;
};

// LP relaxation. `previous` may be a relaxed solution of the same problem
// before columns were appended; its basis then seeds the simplex.
MasterSolution solve_relaxed(const MasterProblem& problem, const MasterSolution* previous = nullptr);
// Restricted integer master over the current working set. `previous` (a
// relaxed or integer solution with the same cuts, possibly fewer columns)
// seeds the root basis. Only
// solutions with objective <= cutoff (within 1e-9) are sought; status is
// kInfeasible when none exists.
MasterSolution solve_integer(const MasterProblem& problem, double time_limit_seconds,
                             const MasterSolution* previous = nullptr, double cutoff = kInf);

// Reduced cost of a box from the aggregated pair duals:
//   omega - sum mu1 d + sum (sum_j mu2) d + sum (sum_j mu3) d - sum mu4 d + lambda
// with d the 0/1 membership of each retained sample.
double aggregated_reduced_cost(const MasterProblem& problem, const MasterDuals& duals,
                               const std::vector<std::size_t>& inside);
// Same with only box j's own pair duals; this is the LP reduced cost of s_j
// for columns without cuts.
double column_reduced_cost(const MasterProblem& problem, const MasterDuals& duals, std::size_t j);

}  // namespace boxpolicy
