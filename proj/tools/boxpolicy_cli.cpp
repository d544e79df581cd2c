// Command-line front end: simulate, fit, eval, render, oracle.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "boxpolicy/bnp.hpp"
#include "boxpolicy/errors.hpp"
#include "boxpolicy/eval.hpp"
#include "boxpolicy/nuisance.hpp"
#include "boxpolicy/policy_io.hpp"
#include "boxpolicy/render.hpp"
#include "boxpolicy/scores.hpp"
#include "boxpolicy/simgen.hpp"
#include "json.hpp"

using namespace boxpolicy;
using Json = nlohmann::ordered_json;

namespace {

enum Exit { kOk = 0, kUsage = 1, kData = 2, kBudget = 3 };

// Writes to `path`, or stdout when it is empty or "-".
void emit(const std::string& text, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << text << std::flush;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  out << text;
}

Json box_json(const Hyperbox& box) { return Json{{"lower", box.lower()}, {"upper", box.upper()}}; }

struct ScoreFlags {
  std::string data;
  std::string method = "dr";
  std::string nuisance = "kernel+logistic";
  bool scale_psi = false;
  bool zero_one = false;

  void add_to(CLI::App& app, bool method_required) {
    app.add_option("--data", data, "Input CSV with header x0,...,x{d-1},t,y")->required();
    auto* m = app.add_option("--method", method, "Score formula")->check(CLI::IsMember({"dm", "ips", "dr"}));
    if (method_required) m->required();
    app.add_option("--nuisance", nuisance, "kernel+logistic or exact:<scenario>");
    app.add_flag("--scale-psi", scale_psi, "Divide scores by their standard deviation");
    app.add_flag("--zero-one-labels", zero_one, "Read treatment labels as 0/1");
  }

  ScoreVector scores(const Dataset& dataset) const {
    auto s = compute_scores(dataset, make_nuisance(nuisance, dataset), parse_score_method(method));
    return scale_psi ? scale_scores(s) : s;
  }
};

int run_simulate(const std::string& scenario, std::size_t n, std::uint64_t seed, const std::string& out) {
  emit(to_csv(generate(Scenario::parse(scenario), n, seed)), out);
  return kOk;
}

struct FitFlags {
  ScoreFlags score;
  std::size_t max_boxes = 1;
  double penalty = 0.0;
  bool flip = false;
  std::size_t max_nodes = 50;
  double pricing_limit = kDefaultPricingTimeLimit;
  double milp_limit = kInf;
  double time_limit = kInf;
  std::string feature_names;
  std::string out;
  bool progress = false;
};

int run_fit(const FitFlags& f) {
  const auto dataset = load_csv(f.score.data, f.score.zero_one);
  const auto scores = f.score.scores(dataset);
  BnPConfig cfg;
  cfg.m_max = f.max_boxes;
  cfg.omega = f.penalty;
  cfg.flip = f.flip;
  cfg.max_nodes = f.max_nodes;
  cfg.pricing_time_limit = f.pricing_limit;
  cfg.milp_time_limit = f.milp_limit;
  cfg.time_limit = f.time_limit;
  ProgressSink sink;
  if (f.progress) {
    sink = [](const NodeRecord& r) {
      Json j{{"node", r.node}, {"relaxed", r.relaxed}, {"columns_added", r.columns_added}};
      j["incumbent"] = std::isfinite(r.incumbent) ? Json(r.incumbent) : Json(nullptr);
      std::cerr << j.dump() << '\n';
    };
  }
  const auto result = fit(dataset, scores, cfg, sink);
  if (!result.has_incumbent) {
    std::cerr << "error: budget exhausted before any incumbent was found\n";
    return kBudget;
  }

  PolicyDocument doc;
  doc.d = dataset.d();
  doc.method = f.score.method;
  doc.m_max = f.max_boxes;
  doc.omega = f.penalty;
  doc.flipped = result.policy.flipped;
  doc.objective = result.objective;
  doc.boxes = result.policy.boxes;
  doc.nuisance = f.score.nuisance;
  doc.scale_psi = f.score.scale_psi;
  if (dataset.n() > 0) doc.observed = bounding_box(dataset);
  if (!f.feature_names.empty()) {
    std::vector<std::string> names;
    std::stringstream ss(f.feature_names);
    for (std::string name; std::getline(ss, name, ',');) names.push_back(name);
    if (names.size() != doc.d) throw PreconditionError("--feature-names needs one name per covariate");
    doc.feature_names = names;
  }
  if (f.out.empty() || f.out == "-") {
    std::cout << to_json(doc);
  } else {
    save_policy(doc, f.out);
  }

  Json summary{{"objective", result.objective},
               {"penalized_objective", result.penalized_objective},
               {"relaxation_bound", result.relaxation_bound},
               {"boxes", result.policy.boxes.size()},
               {"nodes_explored", result.nodes_explored},
               {"columns_generated", result.columns_generated},
               {"status", to_string(result.status)},
               {"certified", result.certified}};
  (f.out.empty() || f.out == "-" ? std::cerr : std::cout) << summary.dump() << '\n';
  return kOk;
}

struct EvalFlags {
  std::string policy;
  std::string data;
  std::optional<std::string> method, nuisance;
  bool scale_psi = false;
  bool zero_one = false;
  std::string scenario;
  std::size_t mc = 100000;
  std::uint64_t seed = 0;
};

int run_eval(const EvalFlags& f) {
  if (f.data.empty() && f.scenario.empty()) throw CLI::ValidationError("eval needs --data or --scenario");
  const auto doc = load_policy(f.policy);
  const auto policy = doc.policy();
  Json report;
  if (!f.data.empty()) {
    const auto dataset = load_csv(f.data, f.zero_one);
    if (dataset.d() != doc.d) throw DataError("policy and data dimensions differ");
    ScoreFlags s;
    s.method = f.method.value_or(doc.method);
    s.nuisance = f.nuisance.value_or(doc.nuisance.value_or("kernel+logistic"));
    s.scale_psi = f.scale_psi || doc.scale_psi.value_or(false);
    report["empirical_objective"] = empirical_objective(policy, dataset, s.scores(dataset));
  }
  if (!f.scenario.empty()) {
    const auto scenario = Scenario::parse(f.scenario);
    if (scenario.d != doc.d) throw DataError("policy and scenario dimensions differ");
    const auto value = policy_value_mc(policy, scenario, f.mc, f.seed);
    const auto r = regret(policy, scenario, f.mc, f.seed);
    report["policy_value"] = value.value;
    report["policy_value_std_error"] = value.std_error;
    report["regret"] = r.value;
    report["regret_std_error"] = r.std_error;
    report["mc_samples"] = f.mc;
    report["seed"] = f.seed;
  }
  std::cout << report.dump() << '\n';
  return kOk;
}

int run_render(const std::string& policy_path, const std::string& format, std::size_t points, const std::string& out) {
  const auto doc = load_policy(policy_path);
  if (format == "text") {
    emit(render_text(doc), out);
  } else if (format == "dot") {
    emit(render_dot(doc), out);
  } else if (format == "json") {
    emit(to_json(doc), out);
  } else {
    // The simulation support when the document carries no observed range.
    const auto region = doc.observed.value_or(
        Hyperbox(std::vector<double>(doc.d, -1.0), std::vector<double>(doc.d, 1.0)));
    emit(render_grid(doc, region, points), out);
  }
  return kOk;
}

int run_oracle(const ScoreFlags& s, std::size_t max_boxes, double penalty) {
  const auto dataset = load_csv(s.data, s.zero_one);
  const auto instance = PolicyInstance::build(dataset, s.scores(dataset));
  const auto best = exhaustive_search(instance, max_boxes, penalty);
  Json boxes = Json::array();
  for (const auto& b : best.boxes) boxes.push_back(box_json(b));
  Json report{{"objective", best.objective},
              {"penalized_objective", best.penalized_objective},
              {"boxes", boxes},
              {"distinct_boxes", best.distinct_boxes}};
  std::cout << report.dump() << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Interpretable box-union treatment policies by branch and price"};
  app.require_subcommand(1);

  std::string sim_scenario, sim_out;
  std::size_t sim_n = 0;
  std::uint64_t sim_seed = 0;
  auto* simulate = app.add_subcommand("simulate", "Draw a synthetic dataset");
  simulate->add_option("--scenario", sim_scenario, "basic, complex, very_complex, regret4d or simple4d")->required();
  simulate->add_option("--n", sim_n, "Sample count")->required()->check(CLI::PositiveNumber);
  simulate->add_option("--seed", sim_seed, "Generator seed")->required();
  simulate->add_option("--out", sim_out, "Output CSV (stdout when omitted)");

  FitFlags fit_flags;
  auto* fit_cmd = app.add_subcommand("fit", "Fit a policy with at most M boxes");
  fit_flags.score.add_to(*fit_cmd, true);
  fit_cmd->add_option("--max-boxes", fit_flags.max_boxes, "M, the largest number of boxes")->required();
  fit_cmd->add_option("--penalty", fit_flags.penalty, "Per-box penalty omega")->check(CLI::NonNegativeNumber);
  fit_cmd->add_flag("--flip", fit_flags.flip, "Learn the no-treatment region instead");
  fit_cmd->add_option("--max-bnb-iters", fit_flags.max_nodes, "Branch-and-bound node limit")
      ->check(CLI::PositiveNumber);
  fit_cmd->add_option("--pricing-time-limit", fit_flags.pricing_limit, "Seconds per pricing problem")
      ->check(CLI::PositiveNumber);
  fit_cmd->add_option("--milp-time-limit", fit_flags.milp_limit, "Seconds per restricted integer solve")
      ->check(CLI::PositiveNumber);
  fit_cmd->add_option("--time-limit", fit_flags.time_limit, "Seconds for the whole fit")->check(CLI::PositiveNumber);
  fit_cmd->add_option("--feature-names", fit_flags.feature_names, "Comma-separated covariate names");
  fit_cmd->add_option("--out", fit_flags.out, "Policy JSON (stdout when omitted)");
  fit_cmd->add_flag("--progress", fit_flags.progress, "Print one JSON record per node to stderr");

  EvalFlags eval_flags;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a policy on data or a scenario");
  eval_cmd->add_option("--policy", eval_flags.policy, "Policy JSON")->required();
  eval_cmd->add_option("--data", eval_flags.data, "CSV for the empirical objective");
  eval_cmd->add_option("--method", eval_flags.method, "Score formula (default: the policy's)")
      ->check(CLI::IsMember({"dm", "ips", "dr"}));
  eval_cmd->add_option("--nuisance", eval_flags.nuisance, "Nuisance models (default: the policy's)");
  eval_cmd->add_flag("--scale-psi", eval_flags.scale_psi, "Divide scores by their standard deviation");
  eval_cmd->add_flag("--zero-one-labels", eval_flags.zero_one, "Read treatment labels as 0/1");
  eval_cmd->add_option("--scenario", eval_flags.scenario, "Scenario for Monte Carlo value and regret");
  eval_cmd->add_option("--mc", eval_flags.mc, "Monte Carlo draws")->check(CLI::PositiveNumber);
  eval_cmd->add_option("--seed", eval_flags.seed, "Monte Carlo seed");

  std::string render_policy, render_format = "text", render_out;
  std::size_t grid_points = 101;
  auto* render = app.add_subcommand("render", "Print a policy as rules, DOT, JSON or a decision grid");
  render->add_option("--policy", render_policy, "Policy JSON")->required();
  render->add_option("--format", render_format, "text, dot, json or grid")
      ->check(CLI::IsMember({"text", "dot", "json", "grid"}));
  render->add_option("--grid-points", grid_points, "Lattice points per dimension")->check(CLI::PositiveNumber);
  render->add_option("--out", render_out, "Output file (stdout when omitted)");

  ScoreFlags oracle_flags;
  std::size_t oracle_boxes = 1;
  double oracle_penalty = 0.0;
  auto* oracle = app.add_subcommand("oracle", "Exhaustive search over spanned boxes (at most 14 samples)");
  oracle_flags.add_to(*oracle, true);
  oracle->add_option("--max-boxes", oracle_boxes, "M")->required();
  oracle->add_option("--penalty", oracle_penalty, "Per-box penalty omega")->check(CLI::NonNegativeNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return kUsage;
  }

  try {
    if (*simulate) return run_simulate(sim_scenario, sim_n, sim_seed, sim_out);
    if (*fit_cmd) return run_fit(fit_flags);
    if (*eval_cmd) return run_eval(eval_flags);
    if (*render) return run_render(render_policy, render_format, grid_points, render_out);
    if (*oracle) return run_oracle(oracle_flags, oracle_boxes, oracle_penalty);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kData;
  } catch (const PreconditionError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kData;
  } catch (const BudgetError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kBudget;
  }
  return kUsage;
}
