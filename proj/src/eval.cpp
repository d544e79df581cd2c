#include "boxpolicy/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <unordered_map>

#include "boxpolicy/errors.hpp"

namespace boxpolicy {

namespace {

// Welford running mean and standard error.
class Moments {
 public:
  void add(double v) {
    ++n_;
    const double delta = v - mean_;
    mean_ += delta / static_cast<double>(n_);
    m2_ += delta * (v - mean_);
  }
  McEstimate estimate() const {
    McEstimate out;
    out.value = mean_;
    out.samples = n_;
    if (n_ > 1) out.std_error = std::sqrt(m2_ / static_cast<double>(n_ - 1) / static_cast<double>(n_));
    return out;
  }

 private:
  std::size_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

void check_dims(const Policy& policy, const Scenario& scenario) {
  if (policy.d != scenario.d) {
    throw PreconditionError("policy dimension " + std::to_string(policy.d) + " does not match scenario " +
                            scenario.name() + " (d=" + std::to_string(scenario.d) + ")");
  }
}

double gap(const Policy& policy, const Scenario& scenario, std::span<const double> x) {
  return true_mean(scenario, x, policy_decide(policy, x)) - true_mean(scenario, x, optimal_decision(scenario, x));
}

}  // namespace

double empirical_objective(const Policy& policy, const Dataset& dataset, const ScoreVector& scores) {
  if (scores.psi.size() != scores.kept.size() || scores.psi.empty()) {
    throw PreconditionError("score vector is empty or misaligned");
  }
  double total = 0.0;
  for (std::size_t k = 0; k < scores.psi.size(); ++k) {
    if (scores.kept[k] >= dataset.n()) throw PreconditionError("score row outside the dataset");
    const auto& s = dataset[scores.kept[k]];
    if (policy_decide(policy, s.x) != s.t) total += scores.psi[k];
  }
  return total / static_cast<double>(scores.psi.size());
}

McEstimate policy_value_mc(const Policy& policy, const Scenario& scenario, std::size_t n_mc, std::uint64_t seed) {
  check_dims(policy, scenario);
  Moments m;
  for (std::size_t k = 0; k < n_mc; ++k) {
    const auto x = draw_covariates(scenario, seed, k, Stream::kEvaluation);
    m.add(true_mean(scenario, x, policy_decide(policy, x)));
  }
  return m.estimate();
}

McEstimate regret(const Policy& policy, const Scenario& scenario, std::size_t n_mc, std::uint64_t seed) {
  check_dims(policy, scenario);
  Moments m;
  for (std::size_t k = 0; k < n_mc; ++k) m.add(gap(policy, scenario, draw_covariates(scenario, seed, k, Stream::kEvaluation)));
  return m.estimate();
}

McEstimate regret_on_points(const Policy& policy, const Scenario& scenario,
                            const std::vector<std::vector<double>>& points) {
  check_dims(policy, scenario);
  Moments m;
  for (const auto& x : points) {
    if (x.size() != scenario.d) throw PreconditionError("evaluation point has wrong dimension");
    m.add(gap(policy, scenario, x));
  }
  return m.estimate();
}

double rademacher_bound(std::size_t m_max) {
  return std::sqrt(1.0 + std::numbers::ln2) * std::sqrt(2.0 * static_cast<double>(m_max));
}

OracleResult exhaustive_search(const PolicyInstance& instance, std::size_t m_max, double omega, std::size_t max_n) {
  const auto n = instance.n();
  if (n > max_n || n > 20) {
    throw PreconditionError("exhaustive search is limited to " + std::to_string(std::min<std::size_t>(max_n, 20)) +
                            " retained samples, got " + std::to_string(n));
  }
  const auto boxes = spanned_boxes(instance.data, max_n);
  // Distinct coverage masks, first box kept for each.
  std::vector<std::uint32_t> masks;
  std::vector<std::size_t> owner;
  std::unordered_map<std::uint32_t, std::size_t> seen;
  for (std::size_t b = 0; b < boxes.size(); ++b) {
    std::uint32_t mask = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (boxes[b].contains(instance.data[i].x)) mask |= 1u << i;
    }
    if (seen.emplace(mask, masks.size()).second) {
      masks.push_back(mask);
      owner.push_back(b);
    }
  }

  const std::size_t states = std::size_t{1} << n;
  // J of the policy treating exactly the samples in the mask.
  std::vector<double> value(states, 0.0);
  for (std::size_t s = 0; s < states; ++s) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto decision = (s >> i) & 1u ? Treatment::kTreat : Treatment::kControl;
      if (decision != instance.data[i].t) total += instance.psi[i];
    }
    value[s] = total / static_cast<double>(n);
  }

  constexpr auto kUnreached = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> depth(states, kUnreached);
  std::vector<std::pair<std::uint32_t, std::size_t>> parent(states);  // (previous union, mask index)
  depth[0] = 0;
  std::vector<std::uint32_t> frontier{0};
  for (std::size_t k = 1; k <= m_max && !frontier.empty(); ++k) {
    std::vector<std::uint32_t> next;
    for (auto u : frontier) {
      for (std::size_t b = 0; b < masks.size(); ++b) {
        const auto v = u | masks[b];
        if (depth[v] != kUnreached) continue;
        depth[v] = k;
        parent[v] = {u, b};
        next.push_back(v);
      }
    }
    frontier = std::move(next);
  }

  std::uint32_t best = 0;
  double best_value = value[0];
  for (std::size_t s = 1; s < states; ++s) {
    if (depth[s] == kUnreached) continue;
    const double v = value[s] + omega * static_cast<double>(depth[s]);
    if (v < best_value) {
      best_value = v;
      best = static_cast<std::uint32_t>(s);
    }
  }
  OracleResult out;
  out.penalized_objective = best_value;
  out.objective = value[best];
  out.distinct_boxes = masks.size();
  for (auto s = best; s != 0; s = parent[s].first) out.boxes.push_back(boxes[owner[parent[s].second]]);
  std::reverse(out.boxes.begin(), out.boxes.end());
  return out;
}

}  // namespace boxpolicy
