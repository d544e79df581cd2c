#include "boxpolicy/bnp.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <deque>
#include <limits>
#include <set>

#include "boxpolicy/errors.hpp"

namespace boxpolicy {

namespace {

using Clock = std::chrono::steady_clock;

constexpr double kIntegralityTol = 1e-6;

class Budget {
 public:
  explicit Budget(double seconds) : start_(Clock::now()), seconds_(seconds) {}
  double remaining() const {
    if (!std::isfinite(seconds_)) return kInf;
    return seconds_ - std::chrono::duration<double>(Clock::now() - start_).count();
  }
  bool exhausted() const { return remaining() <= 0.0; }

 private:
  Clock::time_point start_;
  double seconds_;
};

// Span of the retained samples inside `box`; same membership, canonical endpoints.
Hyperbox canonical(const MasterProblem& problem, const Hyperbox& box, std::vector<std::size_t>& members) {
  members = problem.members_of(box);
  return members.empty() ? box : span_of(problem.instance().data, members);
}

CgResult run_cg(MasterProblem& problem, const BnPConfig& config, const Budget& budget,
                const BoxUniverse* universe) {
  CgResult out;
  MasterSolution previous;
  bool have_previous = false;
  auto append = [&](Hyperbox box) {
    problem.add_box(std::move(box));
    previous = std::move(out.solution);
    have_previous = true;
  };
  while (true) {
    out.solution = solve_relaxed(problem, have_previous ? &previous : nullptr);
    if (out.solution.status != LpStatus::kOptimal) return out;
    if (out.rounds >= config.cg_max_rounds) {
      out.round_limit_hit = true;
      return out;
    }
    if (budget.exhausted()) {
      out.pricing_timed_out = true;
      return out;
    }
    const auto pricing = build_pricing(problem.instance(), out.solution.duals, problem.omega());
    const double limit = std::min(config.pricing_time_limit, std::max(budget.remaining(), 0.0));
    out.last_pricing = solve_pricing(pricing, limit);
    ++out.rounds;
    if (out.last_pricing.timed_out) out.pricing_timed_out = true;
    // Improving when the reduced cost -objective is below -tol.
    if (out.last_pricing.box && out.last_pricing.objective > config.tol) {
      std::vector<std::size_t> members;
      auto box = canonical(problem, *out.last_pricing.box, members);
      if (problem.find_members(members) < 0) {
        append(std::move(box));
        ++out.columns_added;
        for (const auto& extra : out.last_pricing.runners_up) {
          if (pricing_value(pricing, extra) <= config.tol) continue;
          auto more = canonical(problem, extra, members);
          if (problem.find_members(members) >= 0) continue;
          problem.add_box(std::move(more));
          ++out.columns_added;
        }
        continue;
      }
      out.duplicate_column = true;
    }
    if (universe == nullptr || !universe->enumerable()) return out;
    const auto cert = universe->price(problem, out.solution.duals);
    if (!cert || cert->second >= -config.tol) return out;
    append(universe->boxes()[cert->first]);
    ++out.columns_added;
    ++out.certificate_columns;
  }
}

double penalized(const MasterSolution& sol) { return sol.objective; }

}  // namespace

void BnPConfig::validate() const {
  if (max_nodes == 0) throw PreconditionError("max_nodes must be positive");
  if (cg_max_rounds == 0) throw PreconditionError("cg_max_rounds must be positive");
  if (!(tol > 0.0)) throw PreconditionError("tol must be positive");
  if (!(omega >= 0.0)) throw PreconditionError("omega must be nonnegative");
  if (!(pricing_time_limit > 0.0)) throw PreconditionError("pricing time limit must be positive");
}

const char* to_string(FitStatus status) {
  switch (status) {
    case FitStatus::kOptimal: return "optimal";
    case FitStatus::kNodeLimit: return "node_limit";
    case FitStatus::kTimeLimit: return "time_limit";
  }
  return "unknown";
}

CgResult column_generation(MasterProblem& problem, const BnPConfig& config, const BoxUniverse* universe) {
  return run_cg(problem, config, Budget(config.time_limit), universe);
}

BoxUniverse BoxUniverse::build(const PolicyInstance& instance, std::size_t guard) {
  BoxUniverse out;
  const auto n = instance.n();
  const auto d = instance.d();
  if (n == 0 || d == 0) return out;
  std::vector<std::vector<double>> values(d);
  double count = 1.0;
  for (std::size_t t = 0; t < d; ++t) {
    for (const auto& s : instance.data) values[t].push_back(s.x[t]);
    std::sort(values[t].begin(), values[t].end());
    values[t].erase(std::unique(values[t].begin(), values[t].end()), values[t].end());
    const double k = static_cast<double>(values[t].size());
    count *= k * (k + 1.0) / 2.0;
  }
  if (count > static_cast<double>(guard)) return out;
  out.enumerable_ = true;

  std::set<std::vector<std::size_t>> seen;
  std::vector<std::size_t> lo(d, 0), hi(d, 0);
  while (true) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < n; ++i) {
      bool in = true;
      for (std::size_t t = 0; t < d && in; ++t) {
        const double v = instance.data[i].x[t];
        in = v >= values[t][lo[t]] && v <= values[t][hi[t]];
      }
      if (in) members.push_back(i);
    }
    if (!members.empty() && seen.insert(members).second) {
      out.boxes_.push_back(span_of(instance.data, members));
      out.members_.push_back(std::move(members));
    }
    std::size_t t = d;
    while (t-- > 0) {
      const auto last = values[t].size() - 1;
      if (hi[t] < last) {
        ++hi[t];
        break;
      }
      if (lo[t] < last) {
        hi[t] = ++lo[t];
        break;
      }
      lo[t] = hi[t] = 0;
    }
    if (t == static_cast<std::size_t>(-1)) break;
  }
  return out;
}

std::optional<std::pair<std::size_t, double>> BoxUniverse::price(const MasterProblem& problem,
                                                                 const MasterDuals& duals) const {
  const std::set<std::vector<std::size_t>> present(problem.members().begin(), problem.members().end());
  const auto& cls = problem.instance().cls;
  std::optional<std::pair<std::size_t, double>> best;
  for (std::size_t k = 0; k < boxes_.size(); ++k) {
    if (present.count(members_[k])) continue;
    double rc = problem.omega() + duals.lambda;
    for (auto i : members_[k]) {
      if (cls[i] == SampleClass::kTreatedPositive) rc -= duals.mu1[i];
      if (cls[i] == SampleClass::kUntreatedNegative) rc -= duals.mu4[i];
    }
    if (!best || rc < best->second) best.emplace(k, rc);
  }
  return best;
}

std::size_t branch_select(const MasterSolution& solution, const std::vector<Hyperbox>& working_set, double tol) {
  if (solution.s.size() != working_set.size()) throw PreconditionError("solution does not match the working set");
  std::ptrdiff_t pick = -1;
  double pick_volume = 0.0, pick_gap = 0.0;
  for (std::size_t j = 0; j < solution.s.size(); ++j) {
    const double v = solution.s[j];
    if (v <= tol || v >= 1.0 - tol) continue;
    const double volume = working_set[j].volume();
    const double gap = std::abs(v - 0.5);
    if (pick < 0 || volume > pick_volume || (volume == pick_volume && gap < pick_gap)) {
      pick = static_cast<std::ptrdiff_t>(j);
      pick_volume = volume;
      pick_gap = gap;
    }
  }
  if (pick < 0) throw PreconditionError("no fractional column to branch on");
  return static_cast<std::size_t>(pick);
}

FitResult fit(const Dataset& dataset, const ScoreVector& scores, const BnPConfig& config,
              const ProgressSink& progress) {
  config.validate();
  const Budget budget(config.time_limit);
  const Dataset flipped = config.flip ? dataset.with_flipped_treatments() : Dataset();
  const auto instance = PolicyInstance::build(config.flip ? flipped : dataset, scores);

  MasterProblem problem(instance, config.m_max, config.omega);
  problem.add_box(bounding_box(instance.data));
  const auto universe = BoxUniverse::build(instance, config.certify_guard);

  FitResult result;
  result.policy.d = dataset.d();
  result.policy.flipped = config.flip;
  double best = kInf;
  std::vector<double> best_s;

  // Warm-start boxes join W and, when few enough, form the first incumbent.
  if (!config.warm_start.empty()) {
    Policy seed{{}, false, instance.d()};
    std::vector<double> s;
    for (const auto& box : config.warm_start) {
      if (box.d() != instance.d()) throw PreconditionError("warm-start box has the wrong dimension");
      std::vector<std::size_t> members;
      auto canon = canonical(problem, box, members);
      if (members.empty()) continue;  // covers no retained sample
      auto j = problem.find_members(members);
      if (j < 0) {
        j = static_cast<std::ptrdiff_t>(problem.working_set().size());
        problem.add_box(std::move(canon));
      }
      s.resize(problem.working_set().size(), 0.0);
      if (s[static_cast<std::size_t>(j)] == 0.0) seed.boxes.push_back(problem.working_set()[static_cast<std::size_t>(j)]);
      s[static_cast<std::size_t>(j)] = 1.0;
    }
    if (seed.boxes.size() <= config.m_max) {
      best = instance.objective(seed) + config.omega * static_cast<double>(seed.boxes.size());
      best_s = std::move(s);
      result.has_incumbent = true;
    }
  }

  auto try_incumbent = [&](const MasterSolution& sol) {
    if (sol.status != LpStatus::kOptimal) return;
    // Ties update too.
    if (result.has_incumbent && penalized(sol) > best + config.tol) return;
    best = penalized(sol);
    best_s = sol.s;
    result.has_incumbent = true;
  };
  // W only grows, so an unchanged size means MILP(W') would repeat itself.
  std::size_t milp_columns = 0;
  MasterSolution last_milp;
  auto solve_restricted_integer = [&](const MasterSolution& node_solution) {
    if (problem.working_set().size() == milp_columns) return;
    milp_columns = problem.working_set().size();
    MasterProblem unrestricted = problem;
    unrestricted.set_cuts({});
    const double limit = std::min(config.milp_time_limit, std::max(budget.remaining(), 0.0));
    // Cuts sit between the cardinality and pair rows, so only cut-free bases
    // carry over.
    const MasterSolution* warm = problem.cuts().empty() ? &node_solution : &last_milp;
    auto sol = solve_integer(unrestricted, limit, warm, result.has_incumbent ? best + config.tol : kInf);
    result.milp_timed_out |= sol.timed_out || sol.status == LpStatus::kTimeLimit;
    try_incumbent(sol);
    if (!sol.basis.empty()) last_milp = std::move(sol);
  };

  std::deque<std::vector<Cut>> open{{}};
  bool hit_time = false;
  while (!open.empty() && result.nodes_explored < config.max_nodes) {
    if (budget.exhausted()) {
      hit_time = true;
      break;
    }
    auto cuts = std::move(open.front());
    open.pop_front();
    const std::size_t node = result.nodes_explored++;
    problem.set_cuts(cuts);

    const auto cg = run_cg(problem, config, budget, &universe);
    result.columns_generated += cg.columns_added;
    result.certificate_columns += cg.certificate_columns;
    result.pricing_timed_out |= cg.pricing_timed_out;
    result.round_limit_hit |= cg.round_limit_hit;
    const auto& sol = cg.solution;
    if (sol.status != LpStatus::kOptimal) continue;  // infeasible under its cuts
    const double relaxed = penalized(sol);
    if (node == 0) {
      result.relaxation_bound = relaxed;
      solve_restricted_integer(sol);
    }
    if (progress) progress({node, relaxed, best, cg.columns_added});
    result.progress.push_back({node, relaxed, best, cg.columns_added});

    if (relaxed > best + config.tol) continue;
    if (sol.integral(kIntegralityTol)) {
      try_incumbent(sol);
      continue;
    }
    const auto j = branch_select(sol, problem.working_set(), kIntegralityTol);
    auto up = cuts;
    up.push_back({j, true});
    cuts.push_back({j, false});
    open.push_back(std::move(up));
    open.push_back(std::move(cuts));
    if (node != 0) solve_restricted_integer(sol);
  }
  result.certified = universe.enumerable() && !result.round_limit_hit && !result.pricing_timed_out;
  if (!open.empty()) {
    result.status = hit_time ? FitStatus::kTimeLimit : FitStatus::kNodeLimit;
  } else if (result.pricing_timed_out || budget.exhausted()) {
    result.status = FitStatus::kTimeLimit;
  }

  if (result.has_incumbent) {
    for (std::size_t j = 0; j < best_s.size(); ++j) {
      if (best_s[j] > 0.5) result.policy.boxes.push_back(problem.working_set()[j]);
    }
    result.objective = instance.objective(result.policy.flipped ? Policy{result.policy.boxes, false, result.policy.d}
                                                                : result.policy);
    result.penalized_objective =
        result.objective + config.omega * static_cast<double>(result.policy.boxes.size());
  }
  return result;
}

}  // namespace boxpolicy
