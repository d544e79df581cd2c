#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "boxpolicy/data.hpp"
#include "boxpolicy/master.hpp"
#include "boxpolicy/scores.hpp"
#include "boxpolicy/simgen.hpp"

namespace boxpolicy {

struct McEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t samples = 0;
};

struct EvalReport {
  double empirical_objective = 0.0;
  double policy_value = 0.0;
  double regret = 0.0;
  double regret_std_error = 0.0;
  std::size_t mc_samples = 0;
  std::uint64_t seed = 0;
};

// (1/n') sum psi_i I(T_i != pi(x_i)) over the rows listed in scores.kept.
double empirical_objective(const Policy& policy, const Dataset& dataset, const ScoreVector& scores);

// Mean of the noise-free outcome m(x, pi(x)) over n_mc covariate draws taken
// from the evaluation stream of `seed`.
McEstimate policy_value_mc(const Policy& policy, const Scenario& scenario, std::size_t n_mc, std::uint64_t seed);

// V(pi) - V(optimal) on the same draws.
McEstimate regret(const Policy& policy, const Scenario& scenario, std::size_t n_mc, std::uint64_t seed);

// Same on a fixed set of covariate points, e.g. an evaluation pool.
McEstimate regret_on_points(const Policy& policy, const Scenario& scenario,
                            const std::vector<std::vector<double>>& points);

// sqrt(1 + ln 2) * sqrt(2 M).
double rademacher_bound(std::size_t m_max);

struct OracleResult {
  double objective = 0.0;            // J_n of the best union
  double penalized_objective = 0.0;  // objective + omega * box count
  std::vector<Hyperbox> boxes;
  std::size_t distinct_boxes = 0;
};

// Exhaustive minimum of J_n + omega |D| over every set D of at most m_max
// boxes spanned by retained samples. Throws PreconditionError beyond max_n
// retained samples.
OracleResult exhaustive_search(const PolicyInstance& instance, std::size_t m_max, double omega = 0.0,
                               std::size_t max_n = 14);

}  // namespace boxpolicy
