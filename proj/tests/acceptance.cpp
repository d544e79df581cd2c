// Acceptance suite: one PASS/FAIL line per criterion.
//
//   acceptance [--cli PATH] [criterion ...]
//
// Without criterion numbers every criterion runs. The exit status is nonzero
// when any selected criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

#include "boxpolicy/bnp.hpp"
#include "boxpolicy/errors.hpp"
#include "boxpolicy/eval.hpp"
#include "boxpolicy/lp.hpp"
#include "boxpolicy/master.hpp"
#include "boxpolicy/nuisance.hpp"
#include "boxpolicy/pricing.hpp"
#include "boxpolicy/scores.hpp"
#include "boxpolicy/simgen.hpp"
#include "instance_fixtures.hpp"
#include "lp_fixtures.hpp"

#ifndef BOXPOLICY_CLI_PATH
#define BOXPOLICY_CLI_PATH ""
#endif

using namespace boxpolicy;
using boxpolicy::testing::RandomInstance;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
  std::size_t checks = 0;
  std::size_t failures = 0;

  // Records one check; the first few failures are kept in the detail.
  void check(bool ok, const std::string& what) {
    ++checks;
    if (ok) return;
    ++failures;
    pass = false;
    if (failures <= 3) detail += (detail.empty() ? "" : "; ") + what;
  }
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(double v, int digits = 6) {
  std::ostringstream s;
  s.precision(digits);
  s << v;
  return s.str();
}

// The randomized optimality suite: n <= 10, d <= 2, M in {1, 2}, nonzero psi.
struct SuiteInstance {
  RandomInstance inst;
  std::size_t m;
};

std::vector<SuiteInstance> optimality_suite() {
  std::mt19937_64 rng(1001);
  std::vector<SuiteInstance> out;
  for (int k = 0; k < 20; ++k) {
    const std::size_t n = 3 + rng() % 8;
    const std::size_t d = 1 + k % 2;
    const int grid = k % 4 == 3 ? 3 : 0;
    out.push_back({boxpolicy::testing::random_instance(rng, n, d, grid), std::size_t{1} + (k / 2) % 2});
  }
  return out;
}

Outcome criterion1() {
  Outcome out;
  const auto t0 = Clock::now();
  double worst = 0.0;
  for (const auto& [inst, m] : optimality_suite()) {
    BnPConfig cfg;
    cfg.m_max = m;
    const auto r = fit(inst.data, inst.scores, cfg);
    const auto oracle = exhaustive_search(PolicyInstance::build(inst.data, inst.scores), m);
    const double gap = std::abs(r.objective - oracle.objective);
    worst = std::max(worst, gap);
    out.check(gap <= 1e-9, "fit " + fmt(r.objective, 12) + " vs oracle " + fmt(oracle.objective, 12));
  }
  const double secs = seconds_since(t0);
  out.check(secs < 60.0, "runtime " + fmt(secs) + " s");
  out.detail = "20 instances, max gap " + fmt(worst) + ", " + fmt(secs, 3) + " s" +
               (out.detail.empty() ? "" : "; " + out.detail);
  return out;
}

// Relaxed-master duals of random small problems, some under cuts.
std::vector<PricingInstance> dual_instances(std::size_t count) {
  std::mt19937_64 rng(2002);
  std::vector<PricingInstance> out;
  while (out.size() < count) {
    const std::size_t n = 2 + rng() % 11;
    const std::size_t d = 1 + rng() % 2;
    const auto inst = boxpolicy::testing::random_instance(rng, n, d, rng() % 3 == 0 ? 3 : 0);
    const auto pi = PolicyInstance::build(inst.data, inst.scores);
    MasterProblem problem(pi, 1 + rng() % 2, rng() % 4 == 0 ? 0.02 : 0.0);
    problem.add_box(bounding_box(pi.data));
    for (int k = 0; k < 3; ++k) {
      std::vector<std::size_t> rows;
      for (std::size_t i = 0; i < pi.n(); ++i) {
        if (rng() % 2) rows.push_back(i);
      }
      if (rows.empty()) continue;
      auto box = span_of(pi.data, rows);
      if (problem.find_box(box) < 0) problem.add_box(std::move(box));
    }
    if (rng() % 3 == 0) problem.add_cut({0, false});
    const auto sol = solve_relaxed(problem);
    if (sol.status != LpStatus::kOptimal) continue;
    out.push_back(build_pricing(pi, sol.duals, problem.omega()));
  }
  return out;
}

Outcome criterion2() {
  Outcome out;
  const auto t0 = Clock::now();
  std::vector<std::vector<double>> x{{0.0}, {1.0}, {2.0}};
  const auto example = make_pricing_instance(1, x, {1.0, -0.5, 1.0}, {0, 1, 2}, 0.2, 0.0);
  const auto ex = solve_pricing(example);
  out.check(std::abs(ex.objective - 1.3) < 1e-9, "worked example gives " + fmt(ex.objective, 12));
  out.check(std::abs(solve_pricing_bruteforce(example).objective - 1.3) < 1e-9, "brute force on worked example");

  double worst = 0.0;
  for (const auto& in : dual_instances(50)) {
    const double gap = std::abs(solve_pricing(in).objective - solve_pricing_bruteforce(in).objective);
    worst = std::max(worst, gap);
    out.check(gap < 1e-9, "pricing gap " + fmt(gap));
  }
  const double secs = seconds_since(t0);
  out.check(secs < 30.0, "runtime " + fmt(secs) + " s");
  out.detail = "example 1.3 + 50 dual instances, max gap " + fmt(worst) + ", " + fmt(secs, 3) + " s" +
               (out.detail.empty() ? "" : "; " + out.detail);
  return out;
}

Outcome criterion3() {
  Outcome out;
  std::mt19937_64 rng(3003);
  double worst_integrality = 0.0;
  for (int rep = 0; rep < 100; ++rep) {
    const auto inst = boxpolicy::testing::random_instance(rng, 3 + rep % 6, 1 + rep % 2, rep % 2 ? 3 : 0);
    const auto pi = PolicyInstance::build(inst.data, inst.scores);
    const std::size_t m = 1 + rep % 3;
    MasterProblem problem(pi, m, 0.0);
    for (int k = 0; k < 4; ++k) {
      std::vector<std::size_t> rows;
      for (std::size_t i = 0; i < pi.n(); ++i) {
        if (rng() % 2) rows.push_back(i);
      }
      if (rows.empty()) continue;
      auto box = span_of(pi.data, rows);
      if (problem.find_box(box) < 0) problem.add_box(std::move(box));
    }

    // Integral s fixed by cuts: xi must be the mismatch indicators exactly.
    std::vector<Cut> cuts;
    Policy chosen{{}, false, pi.d()};
    std::size_t ones = 0;
    for (std::size_t j = 0; j < problem.working_set().size(); ++j) {
      const bool one = ones < m && rng() % 2 == 0;
      ones += one;
      cuts.push_back({j, one});
      if (one) chosen.boxes.push_back(problem.working_set()[j]);
    }
    problem.set_cuts(cuts);
    const auto fixed = solve_integer(problem, kInf);
    out.check(fixed.status == LpStatus::kOptimal, "fixed master not optimal");
    if (fixed.status != LpStatus::kOptimal) continue;
    bool exact = true;
    for (std::size_t i = 0; i < pi.n(); ++i) {
      const double indicator = policy_decide(chosen, pi.data[i].x) != pi.data[i].t ? 1.0 : 0.0;
      exact = exact && fixed.xi[i] == indicator;
    }
    out.check(exact, "xi differs from indicators at rep " + std::to_string(rep));

    // Free s: integrality is declared on s only, yet xi lands on {0, 1}.
    problem.set_cuts({});
    const auto free = solve_integer(problem, kInf);
    out.check(free.status == LpStatus::kOptimal, "free master not optimal");
    for (double v : free.xi) worst_integrality = std::max(worst_integrality, std::min(std::abs(v), std::abs(v - 1.0)));
  }
  out.check(worst_integrality <= 1e-6, "xi off {0,1} by " + fmt(worst_integrality));
  out.detail = "100 instances, max xi distance from {0,1} " + fmt(worst_integrality) +
               (out.detail.empty() ? "" : "; " + out.detail);
  return out;
}

// Column generation by hand, checking reduced costs at every relaxed optimum.
void checked_cg(MasterProblem& problem, Outcome& out, double& worst_column, double& worst_match) {
  for (int round = 0; round < 200; ++round) {
    const auto sol = solve_relaxed(problem);
    if (sol.status != LpStatus::kOptimal) return;
    for (std::size_t j = 0; j < problem.working_set().size(); ++j) {
      if (problem.is_fixed(j)) continue;
      const double rc = aggregated_reduced_cost(problem, sol.duals, problem.members()[j]);
      worst_column = std::min(worst_column, rc);
      out.check(rc >= -1e-7, "column reduced cost " + fmt(rc));
    }
    const auto pricing = solve_pricing(build_pricing(problem.instance(), sol.duals, problem.omega()));
    if (!pricing.box) return;
    const auto members = problem.members_of(*pricing.box);
    const double gap = std::abs(aggregated_reduced_cost(problem, sol.duals, members) + pricing.objective);
    worst_match = std::max(worst_match, gap);
    out.check(gap <= 1e-9, "pricing column mismatch " + fmt(gap));
    if (pricing.objective <= 1e-9 || problem.find_members(members) >= 0) return;
    problem.add_box(span_of(problem.instance().data, members));
  }
}

Outcome criterion4() {
  Outcome out;
  std::mt19937_64 rng(4004);
  double worst_column = 0.0, worst_match = 0.0;
  std::size_t optima = 0;
  for (const auto& [inst, m] : optimality_suite()) {
    const auto pi = PolicyInstance::build(inst.data, inst.scores);
    for (double omega : {0.0, 0.03}) {
      MasterProblem problem(pi, m, omega);
      problem.add_box(bounding_box(pi.data));
      checked_cg(problem, out, worst_column, worst_match);
      // Branch-like nodes: fix random columns and regenerate.
      for (int node = 0; node < 4; ++node) {
        std::vector<Cut> cuts;
        for (std::size_t j = 0; j < problem.working_set().size(); ++j) {
          if (rng() % 3 == 0) cuts.push_back({j, false});
        }
        problem.set_cuts(cuts);
        checked_cg(problem, out, worst_column, worst_match);
      }
      ++optima;
    }
  }
  out.detail = std::to_string(out.checks) + " checks, min column reduced cost " + fmt(worst_column) +
               ", max pricing mismatch " + fmt(worst_match) + (out.detail.empty() ? "" : "; " + out.detail);
  return out;
}

Outcome criterion5() {
  Outcome out;
  std::mt19937_64 rng(5005);
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const auto lp = boxpolicy::testing::random_bounded_lp(rng);
    const auto sol = solve_lp(lp);
    out.check(sol.status == LpStatus::kOptimal, "random LP not optimal");
    if (sol.status != LpStatus::kOptimal) continue;
    double err = boxpolicy::testing::max_primal_violation(lp, sol.x);
    err = std::max(err, std::abs(sol.objective_value - dual_objective(lp, sol)));
    for (std::size_t r = 0; r < lp.num_rows(); ++r) {
      const double slack = boxpolicy::testing::row_activity(lp.rows[r], sol.x) - lp.rows[r].rhs;
      err = std::max(err, std::abs(sol.row_duals[r] * slack));
    }
    for (std::size_t j = 0; j < lp.num_vars(); ++j) {
      const double gap = std::min(sol.x[j] - lp.lower[j], lp.upper[j] - sol.x[j]);
      err = std::max(err, std::abs(sol.reduced_costs[j]) * std::max(gap, 0.0));
    }
    worst = std::max(worst, err);
    out.check(err <= 1e-7, "duality/slackness error " + fmt(err));
  }
  std::size_t mixed = 0;
  for (int trial = 0; trial < 60; ++trial) {
    auto lp = boxpolicy::testing::random_bounded_lp(rng, 16, 12);
    std::vector<std::size_t> binaries;
    const auto count = std::min<std::size_t>(1 + rng() % 12, lp.num_vars());
    for (std::size_t j = 0; j < count; ++j) {
      lp.lower[j] = 0.0;
      lp.upper[j] = 1.0;
      binaries.push_back(j);
    }
    bool feasible = false;
    const double expected = boxpolicy::testing::enumerate_binary(lp, binaries, feasible);
    const auto sol = solve_binary(lp, binaries);
    ++mixed;
    if (!feasible) {
      out.check(sol.status == LpStatus::kInfeasible, "binary LP should be infeasible");
      continue;
    }
    out.check(sol.status == LpStatus::kOptimal &&
                  std::abs(sol.objective_value - expected) <= 1e-9 * std::max(1.0, std::abs(expected)),
              "solve_binary " + fmt(sol.objective_value, 12) + " vs enumeration " + fmt(expected, 12));
  }
  out.detail = "200 LPs, max error " + fmt(worst) + "; " + std::to_string(mixed) + " binary instances" +
               (out.detail.empty() ? "" : "; " + out.detail);
  return out;
}

// Fits over the M grid, each seeded with the previous M's boxes, and the
// regret of each policy on the seed's 10,000-point pool.
struct GridRun {
  std::vector<std::vector<double>> objective;  // [seed][M]
  std::vector<std::vector<double>> regret;
  std::vector<std::vector<std::string>> status;
  double seconds = 0.0;
};

GridRun run_grid(const Scenario& scenario, std::size_t n_train, const std::vector<std::size_t>& ms,
                 const std::vector<std::uint64_t>& seeds, const BnPConfig& base) {
  GridRun run;
  const auto t0 = Clock::now();
  for (auto seed : seeds) {
    const auto pool = generate(scenario, 10000, seed);
    std::vector<std::size_t> rows(n_train);
    for (std::size_t i = 0; i < n_train; ++i) rows[i] = i;
    const auto train = pool.subset(rows);
    std::vector<std::vector<double>> points;
    for (const auto& s : pool) points.push_back(s.x);
    const auto scores = compute_scores(train, exact_nuisance(scenario), ScoreMethod::kDR);

    std::vector<double> objectives, regrets;
    std::vector<std::string> statuses;
    std::vector<Hyperbox> seed_boxes;
    for (auto m : ms) {
      BnPConfig cfg = base;
      cfg.m_max = m;
      cfg.warm_start = seed_boxes;
      const auto r = fit(train, scores, cfg);
      seed_boxes = r.policy.boxes;
      objectives.push_back(r.has_incumbent ? r.objective : kInf);
      regrets.push_back(regret_on_points(r.policy, scenario, points).value);
      statuses.push_back(to_string(r.status));
      std::cerr << "  seed " << seed << " M=" << m << " objective " << objectives.back() << " regret "
                << regrets.back() << " status " << statuses.back() << " nodes " << r.nodes_explored << " t "
                << fmt(seconds_since(t0), 4) << "s\n";
    }
    run.objective.push_back(objectives);
    run.regret.push_back(regrets);
    run.status.push_back(statuses);
  }
  run.seconds = seconds_since(t0);
  return run;
}

std::vector<double> column_means(const std::vector<std::vector<double>>& v) {
  std::vector<double> mean(v.front().size(), 0.0);
  for (const auto& row : v) {
    for (std::size_t k = 0; k < row.size(); ++k) mean[k] += row[k] / static_cast<double>(v.size());
  }
  return mean;
}

std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t k = 0; k < v.size(); ++k) s += (k ? "/" : "") + fmt(v[k], 4);
  return s;
}

Outcome criterion6() {
  Outcome out;
  const std::vector<std::size_t> ms{1, 3, 5, 10};
  BnPConfig base;
  // 20 fits share the 30-minute budget.
  base.time_limit = 80.0;
  base.milp_time_limit = 10.0;
  const auto run = run_grid(Scenario::parse("basic"), 1000, ms, {1, 2, 3, 4, 5}, base);
  for (std::size_t s = 0; s < run.objective.size(); ++s) {
    for (std::size_t k = 1; k < ms.size(); ++k) {
      out.check(run.objective[s][k] <= run.objective[s][k - 1] + 1e-9,
                "seed " + std::to_string(s + 1) + " objective rises at M=" + std::to_string(ms[k]));
    }
  }
  const auto mean = column_means(run.regret);
  out.check(mean.back() < mean.front(), "mean regret at M=10 not below M=1");
  out.check(run.seconds <= 1800.0, "runtime " + fmt(run.seconds) + " s");
  out.detail = "mean regret M=1/3/5/10 " + join(mean) + ", " + fmt(run.seconds, 4) + " s" +
               (out.detail.empty() ? "" : "; " + out.detail);
  return out;
}

Outcome criterion7() {
  Outcome out;
  const std::vector<std::size_t> ms{1, 3, 5, 10};
  std::vector<std::uint64_t> seeds;
  for (std::uint64_t s = 1; s <= 10; ++s) seeds.push_back(s);
  BnPConfig base;
  base.max_nodes = 50;
  base.pricing_time_limit = 180.0;
  // 40 fits share the two-hour budget.
  base.time_limit = 165.0;
  base.milp_time_limit = 20.0;
  const auto run = run_grid(Scenario::parse("regret4d"), 250, ms, seeds, base);
  const auto mean = column_means(run.regret);
  // Pooled standard error of a grid point's mean regret.
  double pooled_var = 0.0;
  for (std::size_t k = 0; k < ms.size(); ++k) {
    double ss = 0.0;
    for (const auto& row : run.regret) ss += (row[k] - mean[k]) * (row[k] - mean[k]);
    pooled_var += ss / static_cast<double>(seeds.size() - 1);
  }
  pooled_var /= static_cast<double>(ms.size());
  const double pooled_se = std::sqrt(pooled_var / static_cast<double>(seeds.size()));
  for (std::size_t k = 1; k < ms.size(); ++k) {
    out.check(mean[k] <= mean[k - 1] + pooled_se, "mean regret rises at M=" + std::to_string(ms[k]));
  }
  out.check(run.seconds <= 7200.0, "runtime " + fmt(run.seconds) + " s");
  out.detail = "mean regret M=1/3/5/10 " + join(mean) + ", pooled SE " + fmt(pooled_se, 3) + ", " +
               fmt(run.seconds, 4) + " s" + (out.detail.empty() ? "" : "; " + out.detail);
  return out;
}

// ln 2 from its series sum 1 / (k 2^k) and a Newton square root, kept apart
// from the library's std::log / std::sqrt path.
double reference_rademacher(std::size_t m) {
  long double ln2 = 0.0L, pow2 = 1.0L;
  for (int k = 1; k < 80; ++k) {
    pow2 *= 2.0L;
    ln2 += 1.0L / (static_cast<long double>(k) * pow2);
  }
  const long double target = (1.0L + ln2) * 2.0L * static_cast<long double>(m);
  long double r = target > 1.0L ? target : 1.0L;
  for (int it = 0; it < 100; ++it) r = 0.5L * (r + target / r);
  return static_cast<double>(r);
}

Outcome criterion8() {
  Outcome out;
  const auto basic = Scenario::parse("basic");
  const Policy control{{}, false, 2};
  const Policy treat{{}, true, 2};
  const auto v_control = policy_value_mc(control, basic, 1000000, 8008);
  const auto v_treat = policy_value_mc(treat, basic, 1000000, 8008);
  out.check(std::abs(v_control.value - 7.0 / 6.0) <= 3.0 * v_control.std_error,
            "V(-1) = " + fmt(v_control.value, 8));
  out.check(std::abs(v_treat.value - 5.0 / 6.0) <= 3.0 * v_treat.std_error, "V(+1) = " + fmt(v_treat.value, 8));

  // The regret4d optimum treats where an odd number of coordinates is
  // negative: eight orthant boxes.
  const auto r4 = Scenario::parse("regret4d");
  Policy optimum{{}, false, 4};
  for (int mask = 0; mask < 16; ++mask) {
    if (__builtin_popcount(mask) % 2 == 0) continue;
    std::vector<double> lo(4), hi(4);
    for (int t = 0; t < 4; ++t) {
      lo[t] = (mask >> t & 1) ? -1.0 : 0.0;
      hi[t] = (mask >> t & 1) ? 0.0 : 1.0;
    }
    optimum.boxes.push_back(Hyperbox(lo, hi));
  }
  const auto zero = regret(optimum, r4, 1000000, 8008);
  out.check(zero.value == 0.0, "optimal policy regret " + fmt(zero.value));

  const double bound = rademacher_bound(2);
  const double reference = reference_rademacher(2);
  out.check(std::abs(bound - reference) <= 1e-4, "rademacher_bound(2) = " + fmt(bound, 8));
  out.detail = "V(-1) " + fmt(v_control.value, 7) + " (se " + fmt(v_control.std_error, 2) + "), V(+1) " +
               fmt(v_treat.value, 7) + ", optimal regret " + fmt(zero.value) + ", rademacher_bound(2) " +
               fmt(bound, 8) + " vs reference " + fmt(reference, 8) + (out.detail.empty() ? "" : "; " + out.detail);
  return out;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome criterion9(const std::string& cli) {
  Outcome out;
  if (cli.empty() || !std::filesystem::exists(cli)) {
    out.check(false, "command-line tool not found at '" + cli + "'");
    return out;
  }
  const auto dir = std::filesystem::temp_directory_path() / ("boxpolicy_acceptance_" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  const auto path = [&](const std::string& name) { return (dir / name).string(); };
  // Runs `args` with stdout captured to `name`; returns the exit status.
  const auto run = [&](const std::string& args, const std::string& name) {
    const std::string cmd = "\"" + cli + "\" " + args + " > \"" + path(name) + "\" 2> \"" + path(name + ".err") + "\"";
    return std::system(cmd.c_str());
  };

  const std::vector<std::pair<std::string, std::string>> steps{
      {"simulate --scenario basic --n 80 --seed 9 --out " + path("data_a.csv"), "sim_a"},
      {"simulate --scenario basic --n 80 --seed 9 --out " + path("data_b.csv"), "sim_b"},
      {"fit --data " + path("data_a.csv") + " --method dr --max-boxes 2 --out " + path("pol_a.json"), "fit_a"},
      {"fit --data " + path("data_a.csv") + " --method dr --max-boxes 2 --out " + path("pol_b.json"), "fit_b"},
      {"fit --data " + path("data_a.csv") + " --method ips --nuisance exact:basic --max-boxes 3 --penalty 0.01 --flip"
                                             " --out " + path("pol_c.json"),
       "fit_c"},
      {"fit --data " + path("data_a.csv") + " --method ips --nuisance exact:basic --max-boxes 3 --penalty 0.01 --flip"
                                             " --out " + path("pol_d.json"),
       "fit_d"},
      {"eval --policy " + path("pol_a.json") + " --data " + path("data_a.csv"), "eval_a"},
      {"eval --policy " + path("pol_a.json") + " --data " + path("data_a.csv"), "eval_b"},
      {"eval --policy " + path("pol_a.json") + " --scenario basic --mc 20000 --seed 4", "mc_a"},
      {"eval --policy " + path("pol_a.json") + " --scenario basic --mc 20000 --seed 4", "mc_b"},
  };
  for (const auto& [args, name] : steps) out.check(run(args, name) == 0, "`" + args + "` failed");

  const std::vector<std::pair<std::string, std::string>> same{
      {"data_a.csv", "data_b.csv"}, {"pol_a.json", "pol_b.json"}, {"fit_a", "fit_b"}, {"pol_c.json", "pol_d.json"},
      {"fit_c", "fit_d"},           {"eval_a", "eval_b"},         {"mc_a", "mc_b"},   {"sim_a", "sim_b"}};
  for (const auto& [a, b] : same) {
    const auto x = slurp(dir / a), y = slurp(dir / b);
    out.check(!x.empty() || a.rfind("sim", 0) == 0, a + " is empty");
    out.check(x == y, a + " and " + b + " differ");
  }
  std::filesystem::remove_all(dir);
  out.detail = std::to_string(steps.size()) + " invocations, " + std::to_string(same.size()) + " byte comparisons" +
               (out.detail.empty() ? "" : "; " + out.detail);
  return out;
}

Outcome criterion10() {
  Outcome out;
  // Constructed instance: treated positives spread on a line, with a
  // negative in between.
  std::vector<Sample> samples;
  std::vector<double> psi;
  for (int i = 0; i < 8; ++i) {
    samples.push_back({{double(i), double(i % 3)}, i % 2 ? Treatment::kControl : Treatment::kTreat, 0.0});
    psi.push_back(i % 3 == 1 ? -0.7 : 1.0 + 0.1 * i);
  }
  const Dataset data(samples, 2);
  const auto scores = scores_from_values(psi);
  const auto pi = PolicyInstance::build(data, scores);

  // Largest positive coefficient mass any pricing problem sees while column
  // generation runs without a penalty.
  double mass = 0.0;
  {
    MasterProblem problem(pi, 2, 0.0);
    problem.add_box(bounding_box(pi.data));
    for (int round = 0; round < 100; ++round) {
      const auto sol = solve_relaxed(problem);
      const auto pricing = build_pricing(pi, sol.duals, 0.0);
      double positive = 0.0;
      for (double c : pricing.coeff) positive += std::max(c, 0.0);
      mass = std::max(mass, positive);
      const auto best = solve_pricing(pricing);
      if (!best.box || best.objective <= 1e-9) break;
      const auto members = problem.members_of(*best.box);
      if (problem.find_members(members) >= 0) break;
      problem.add_box(span_of(pi.data, members));
    }
  }
  double psi_mass = 0.0;
  for (double v : psi) psi_mass += std::abs(v);
  const double omega = std::max(mass, psi_mass / static_cast<double>(pi.n())) + 0.5;
  BnPConfig heavy;
  heavy.m_max = 2;
  heavy.omega = omega;
  const auto empty = fit(data, scores, heavy);
  out.check(empty.policy.boxes.empty(), "large penalty kept " + std::to_string(empty.policy.boxes.size()) + " boxes");
  MasterProblem check(pi, 2, omega);
  check.add_box(bounding_box(pi.data));
  BnPConfig cg_cfg = heavy;
  out.check(column_generation(check, cg_cfg).columns_added == 0, "large penalty still generated columns");

  // omega = 0 reproduces the optimality suite.
  for (const auto& [inst, m] : optimality_suite()) {
    BnPConfig cfg;
    cfg.m_max = m;
    cfg.omega = 0.0;
    const auto r = fit(inst.data, inst.scores, cfg);
    const auto oracle = exhaustive_search(PolicyInstance::build(inst.data, inst.scores), m);
    out.check(std::abs(r.objective - oracle.objective) <= 1e-9, "omega = 0 misses the optimum");
    out.check(r.penalized_objective == r.objective, "omega = 0 penalized objective differs");
  }

  // Equal box sets: the master with and without a penalty differs by omega |D|.
  std::mt19937_64 rng(10010);
  double worst = 0.0;
  for (int rep = 0; rep < 40; ++rep) {
    const auto inst = boxpolicy::testing::random_instance(rng, 4 + rep % 6, 1 + rep % 2);
    const auto rpi = PolicyInstance::build(inst.data, inst.scores);
    const double w = 0.05 + 0.01 * (rep % 7);
    MasterProblem plain(rpi, 3, 0.0), penalized(rpi, 3, w);
    std::vector<Cut> cuts;
    std::size_t count = 0;
    for (int k = 0; k < 4; ++k) {
      std::vector<std::size_t> rows;
      for (std::size_t i = 0; i < rpi.n(); ++i) {
        if (rng() % 2) rows.push_back(i);
      }
      if (rows.empty()) continue;
      auto box = span_of(rpi.data, rows);
      if (plain.find_box(box) >= 0) continue;
      plain.add_box(box);
      penalized.add_box(box);
      const bool one = count < 3 && rng() % 2 == 0;
      count += one;
      cuts.push_back({plain.working_set().size() - 1, one});
    }
    plain.set_cuts(cuts);
    penalized.set_cuts(cuts);
    const auto a = solve_integer(plain, kInf);
    const auto b = solve_integer(penalized, kInf);
    if (a.status != LpStatus::kOptimal || b.status != LpStatus::kOptimal) {
      out.check(false, "fixed master not optimal");
      continue;
    }
    const double gap = std::abs(b.objective - a.objective - w * static_cast<double>(count));
    worst = std::max(worst, gap);
    out.check(gap <= 1e-12, "penalty difference off by " + fmt(gap));

    BnPConfig cfg;
    cfg.m_max = 2;
    cfg.omega = w;
    const auto r = fit(inst.data, inst.scores, cfg);
    out.check(std::abs(r.penalized_objective - r.objective - w * static_cast<double>(r.policy.boxes.size())) <= 1e-12,
              "fit penalized objective is not objective + omega |D|");
  }
  out.detail = "omega " + fmt(omega, 4) + " > positive dual mass " + fmt(mass, 4) + " gives " +
               std::to_string(empty.policy.boxes.size()) + " boxes; max penalty gap " + fmt(worst) +
               (out.detail.empty() ? "" : "; " + out.detail);
  return out;
}

const char* kNames[] = {"",
                        "exact optimality vs exhaustive search",
                        "pricing exactness vs brute force",
                        "MILP and EBCP equivalence",
                        "dual and reduced-cost consistency",
                        "LP core duality and binary search",
                        "nestedness and regret trend (basic)",
                        "scaled regret study (regret4d)",
                        "analytic golden values",
                        "CLI determinism",
                        "penalty method"};

}  // namespace

int main(int argc, char** argv) {
  std::string cli = BOXPOLICY_CLI_PATH;
  std::set<int> selected;
  for (int a = 1; a < argc; ++a) {
    const std::string arg = argv[a];
    if (arg == "--cli" && a + 1 < argc) {
      cli = argv[++a];
    } else {
      const int k = std::atoi(arg.c_str());
      if (k < 1 || k > 10) {
        std::cerr << "usage: acceptance [--cli PATH] [criterion 1-10 ...]\n";
        return 2;
      }
      selected.insert(k);
    }
  }
  if (selected.empty()) {
    for (int k = 1; k <= 10; ++k) selected.insert(k);
  }

  const std::function<Outcome()> runs[] = {
      [] { return Outcome{}; }, criterion1, criterion2, criterion3, criterion4, criterion5, criterion6,
      criterion7,               criterion8, [&] { return criterion9(cli); }, criterion10};
  bool all = true;
  for (int k : selected) {
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = runs[k]();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    all = all && o.pass;
    std::cout << "CRITERION " << k << ' ' << (o.pass ? "PASS" : "FAIL") << " | " << kNames[k] << " | " << o.detail
              << " | " << fmt(seconds_since(t0), 4) << " s" << std::endl;
  }
  return all ? 0 : 1;
}
