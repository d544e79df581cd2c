#include "boxpolicy/master.hpp"

#include <algorithm>
#include <cmath>

#include "boxpolicy/errors.hpp"

namespace boxpolicy {

PolicyInstance PolicyInstance::build(const Dataset& dataset, const ScoreVector& scores) {
  if (scores.psi.size() != scores.kept.size()) throw DataError("score vector is misaligned");
  PolicyInstance inst;
  inst.psi = scores.psi;
  inst.rows = scores.kept;
  for (auto r : inst.rows) {
    if (r >= dataset.n()) throw DataError("score row " + std::to_string(r) + " outside dataset");
  }
  inst.data = dataset.subset(inst.rows);
  std::vector<Treatment> t;
  t.reserve(inst.n());
  for (const auto& s : inst.data) t.push_back(s.t);
  inst.partition = boxpolicy::partition(inst.psi, t);
  inst.cls.resize(inst.n());
  for (std::size_t i = 0; i < inst.n(); ++i) {
    const bool treated = t[i] == Treatment::kTreat;
    if (inst.psi[i] > 0.0) {
      inst.cls[i] = treated ? SampleClass::kTreatedPositive : SampleClass::kUntreatedPositive;
    } else {
      inst.cls[i] = treated ? SampleClass::kTreatedNegative : SampleClass::kUntreatedNegative;
    }
  }
  return inst;
}

double PolicyInstance::objective(const Policy& policy) const {
  double total = 0.0;
  for (std::size_t i = 0; i < n(); ++i) {
    if (policy_decide(policy, data[i].x) != data[i].t) total += psi[i];
  }
  return total / static_cast<double>(n());
}

MasterProblem::MasterProblem(const PolicyInstance& instance, std::size_t m_max, double omega)
    : instance_(&instance), m_max_(m_max), omega_(omega) {
  if (!(omega >= 0.0)) throw PreconditionError("penalty omega must be nonnegative");
}

std::vector<std::size_t> MasterProblem::members_of(const Hyperbox& box) const {
  if (box.d() != instance_->d()) throw PreconditionError("box dimension does not match the data");
  std::vector<std::size_t> inside;
  for (std::size_t i = 0; i < instance_->n(); ++i) {
    if (box.contains(instance_->data[i].x)) inside.push_back(i);
  }
  return inside;
}

std::size_t MasterProblem::add_box(Hyperbox box) {
  auto inside = members_of(box);
  boxes_.push_back(std::move(box));
  members_.push_back(std::move(inside));
  return boxes_.size() - 1;
}

std::ptrdiff_t MasterProblem::find_members(const std::vector<std::size_t>& members) const {
  const auto it = std::find(members_.begin(), members_.end(), members);
  return it == members_.end() ? -1 : it - members_.begin();
}

std::ptrdiff_t MasterProblem::find_box(const Hyperbox& box) const {
  const auto it = std::find(boxes_.begin(), boxes_.end(), box);
  return it == boxes_.end() ? -1 : it - boxes_.begin();
}

void MasterProblem::add_cut(Cut cut) {
  if (cut.box >= boxes_.size()) throw PreconditionError("cut refers to a box outside the working set");
  for (const auto& c : cuts_) {
    if (c.box == cut.box && c.fix_one != cut.fix_one) {
      throw PreconditionError("contradictory cuts on box " + std::to_string(cut.box));
    }
  }
  if (std::find(cuts_.begin(), cuts_.end(), cut) == cuts_.end()) cuts_.push_back(cut);
}

void MasterProblem::set_cuts(std::vector<Cut> cuts) {
  cuts_.clear();
  for (const auto& c : cuts) add_cut(c);
}

bool MasterProblem::is_fixed(std::size_t box) const {
  return std::any_of(cuts_.begin(), cuts_.end(), [box](const Cut& c) { return c.box == box; });
}

MasterLp build_master(const MasterProblem& problem, bool relaxed) {
  const auto& inst = problem.instance();
  const auto n = inst.n();
  const auto w = problem.working_set().size();
  const auto& members = problem.members();
  const double inv_n = 1.0 / static_cast<double>(n);

  MasterLp out;
  auto& lp = out.lp;
  out.xi_offset = 0;
  for (std::size_t i = 0; i < n; ++i) lp.add_variable(inst.psi[i] * inv_n, 0.0, 1.0);
  out.s_offset = n;
  // The relaxation leaves s_j unbounded above: clipping s_j to 1 keeps every row
  // satisfied and never raises the objective, so the optimum is unchanged, and
  // every unfixed column then has a nonnegative reduced cost at the optimum.
  for (std::size_t j = 0; j < w; ++j) lp.add_variable(problem.omega(), 0.0, relaxed ? kInf : 1.0);
  if (!relaxed) {
    for (std::size_t j = 0; j < w; ++j) out.integer_vars.push_back(out.s_var(j));
  }

  // K_i: boxes containing sample i.
  std::vector<std::vector<std::size_t>> containing(n);
  for (std::size_t j = 0; j < w; ++j) {
    for (auto i : members[j]) containing[i].push_back(j);
  }

  out.cover_row.assign(n, -1);
  for (auto cls : {SampleClass::kTreatedPositive, SampleClass::kUntreatedNegative}) {
    for (std::size_t i = 0; i < n; ++i) {
      if (inst.cls[i] != cls) continue;
      const bool treated = cls == SampleClass::kTreatedPositive;
      std::vector<std::pair<std::size_t, double>> coeffs{{out.xi_var(i), 1.0}};
      for (auto j : containing[i]) coeffs.emplace_back(out.s_var(j), treated ? 1.0 : -1.0);
      // (9): xi_i + sum s_j >= 1;  (12): xi_i - sum s_j <= 0
      out.cover_row[i] = static_cast<std::ptrdiff_t>(
          lp.add_row(std::move(coeffs), treated ? RowSense::kGreaterEqual : RowSense::kLessEqual,
                     treated ? 1.0 : 0.0));
    }
  }

  std::vector<std::pair<std::size_t, double>> card;
  for (std::size_t j = 0; j < w; ++j) card.emplace_back(out.s_var(j), 1.0);
  out.cardinality_row = lp.add_row(std::move(card), RowSense::kLessEqual, static_cast<double>(problem.m_max()));

  out.first_cut_row = lp.num_rows();
  for (const auto& cut : problem.cuts()) {
    lp.add_row({{out.s_var(cut.box), 1.0}}, cut.fix_one ? RowSense::kGreaterEqual : RowSense::kLessEqual,
               cut.fix_one ? 1.0 : 0.0);
  }

  for (std::size_t j = 0; j < w; ++j) {
    for (auto i : members[j]) {
      if (inst.cls[i] == SampleClass::kUntreatedPositive) {
        // (10): xi_i - s_j >= 0
        const auto r = lp.add_row({{out.xi_var(i), 1.0}, {out.s_var(j), -1.0}}, RowSense::kGreaterEqual, 0.0);
        out.pair_rows.push_back({i, j, r});
      } else if (inst.cls[i] == SampleClass::kTreatedNegative) {
        // (11): xi_i + s_j <= 1
        const auto r = lp.add_row({{out.xi_var(i), 1.0}, {out.s_var(j), 1.0}}, RowSense::kLessEqual, 1.0);
        out.pair_rows.push_back({i, j, r});
      }
    }
  }
  return out;
}

std::vector<double> MasterDuals::pair_sums(std::size_t n) const {
  std::vector<double> sums(n, 0.0);
  for (const auto& p : mu2) sums[p.sample] += p.value;
  for (const auto& p : mu3) sums[p.sample] += p.value;
  return sums;
}

bool MasterSolution::integral(double tol) const {
  return std::all_of(s.begin(), s.end(), [tol](double v) { return std::min(v, 1.0 - v) <= tol; });
}

namespace {

// Clamps solver round-off; the dual sign convention makes all of these >= 0.
double nonneg(double v) { return v > 0.0 ? v : 0.0; }

MasterSolution unpack(const MasterProblem& problem, const MasterLp& layout, const LpSolution& sol,
                      bool with_duals) {
  MasterSolution out;
  out.status = sol.status;
  out.timed_out = sol.timed_out;
  out.branch_nodes = sol.branch_nodes;
  if (sol.status != LpStatus::kOptimal) return out;
  const auto n = problem.instance().n();
  const auto w = problem.working_set().size();
  out.xi.assign(sol.x.begin() + static_cast<std::ptrdiff_t>(layout.xi_offset),
                sol.x.begin() + static_cast<std::ptrdiff_t>(layout.xi_offset + n));
  out.s.assign(sol.x.begin() + static_cast<std::ptrdiff_t>(layout.s_offset),
               sol.x.begin() + static_cast<std::ptrdiff_t>(layout.s_offset + w));
  for (double& v : out.s) v = std::min(v, 1.0);
  out.objective = sol.objective_value;
  out.basis = sol.basis;
  out.lp_vars = layout.lp.num_vars();
  out.lp_rows = layout.lp.num_rows();
  if (!with_duals) return out;

  auto& duals = out.duals;
  duals.mu1.assign(n, 0.0);
  duals.mu4.assign(n, 0.0);
  const auto& cls = problem.instance().cls;
  for (std::size_t i = 0; i < n; ++i) {
    if (layout.cover_row[i] < 0) continue;
    const double y = sol.row_duals[static_cast<std::size_t>(layout.cover_row[i])];
    if (cls[i] == SampleClass::kTreatedPositive) {
      duals.mu1[i] = nonneg(y);
    } else {
      duals.mu4[i] = nonneg(-y);
    }
  }
  for (const auto& p : layout.pair_rows) {
    const double y = sol.row_duals[p.row];
    if (cls[p.sample] == SampleClass::kUntreatedPositive) {
      if (nonneg(y) > 0.0) duals.mu2.push_back({p.sample, p.box, y});
    } else if (nonneg(-y) > 0.0) {
      duals.mu3.push_back({p.sample, p.box, -y});
    }
  }
  duals.lambda = nonneg(-sol.row_duals[layout.cardinality_row]);
  out.column_reduced_costs.resize(w);
  for (std::size_t j = 0; j < w; ++j) out.column_reduced_costs[j] = sol.reduced_costs[layout.s_var(j)];
  return out;
}

}  // namespace

namespace {

// xi = 1 on positive scores and 0 on negative ones with every s at 0 satisfies
// all rows except cuts, so phase 1 is short.
std::vector<VarState> crash_basis(const MasterProblem& problem, const MasterLp& layout) {
  std::vector<VarState> basis(layout.lp.num_vars() + layout.lp.num_rows(), VarState::kBasic);
  const auto& psi = problem.instance().psi;
  for (std::size_t i = 0; i < psi.size(); ++i) {
    basis[layout.xi_var(i)] = psi[i] > 0.0 ? VarState::kAtUpper : VarState::kAtLower;
  }
  for (std::size_t j = 0; j < problem.working_set().size(); ++j) basis[layout.s_var(j)] = VarState::kAtLower;
  return basis;
}

// Basis of an earlier solve over a prefix of the current layout (same cuts),
// or the crash basis.
std::vector<VarState> warm_basis(const MasterProblem& problem, const MasterLp& layout, const MasterSolution* previous) {
  if (!previous || previous->basis.empty() || previous->lp_vars > layout.lp.num_vars() ||
      previous->lp_rows > layout.lp.num_rows() || previous->basis.size() != previous->lp_vars + previous->lp_rows) {
    return crash_basis(problem, layout);
  }
  // Appended columns start at zero; their pair rows start with basic logicals.
  std::vector<VarState> warm;
  warm.reserve(layout.lp.num_vars() + layout.lp.num_rows());
  warm.insert(warm.end(), previous->basis.begin(), previous->basis.begin() + static_cast<std::ptrdiff_t>(previous->lp_vars));
  warm.resize(layout.lp.num_vars(), VarState::kAtLower);
  warm.insert(warm.end(), previous->basis.begin() + static_cast<std::ptrdiff_t>(previous->lp_vars),
              previous->basis.end());
  warm.resize(layout.lp.num_vars() + layout.lp.num_rows(), VarState::kBasic);
  return warm;
}

}  // namespace

MasterSolution solve_relaxed(const MasterProblem& problem, const MasterSolution* previous) {
  const auto layout = build_master(problem, true);
  LpOptions opts;
  const auto warm = warm_basis(problem, layout, previous);
  opts.warm_start = &warm;
  const auto sol = solve_lp(layout.lp, opts);
  return unpack(problem, layout, sol, true);
}

MasterSolution solve_integer(const MasterProblem& problem, double time_limit_seconds, const MasterSolution* previous,
                             double cutoff) {
  const auto layout = build_master(problem, false);
  BinaryOptions opts;
  opts.time_limit_seconds = time_limit_seconds;
  opts.cutoff = cutoff;
  const auto warm = warm_basis(problem, layout, previous);
  opts.lp.warm_start = &warm;
  const auto sol = solve_binary(layout.lp, layout.integer_vars, opts);
  auto out = unpack(problem, layout, sol, false);
  if (out.status == LpStatus::kOptimal) {
    for (double& v : out.s) v = std::round(v);
  }
  return out;
}

double aggregated_reduced_cost(const MasterProblem& problem, const MasterDuals& duals,
                               const std::vector<std::size_t>& inside) {
  const auto& cls = problem.instance().cls;
  const auto sums = duals.pair_sums(problem.instance().n());
  double rc = problem.omega() + duals.lambda;
  for (auto i : inside) {
    switch (cls[i]) {
      case SampleClass::kTreatedPositive: rc -= duals.mu1[i]; break;
      case SampleClass::kUntreatedNegative: rc -= duals.mu4[i]; break;
      default: rc += sums[i]; break;
    }
  }
  return rc;
}

double column_reduced_cost(const MasterProblem& problem, const MasterDuals& duals, std::size_t j) {
  const auto& cls = problem.instance().cls;
  double rc = problem.omega() + duals.lambda;
  for (auto i : problem.members()[j]) {
    if (cls[i] == SampleClass::kTreatedPositive) rc -= duals.mu1[i];
    if (cls[i] == SampleClass::kUntreatedNegative) rc -= duals.mu4[i];
  }
  for (const auto& p : duals.mu2) {
    if (p.box == j) rc += p.value;
  }
  for (const auto& p : duals.mu3) {
    if (p.box == j) rc += p.value;
  }
  return rc;
}

}  // namespace boxpolicy
