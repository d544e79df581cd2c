#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "boxpolicy/data.hpp"
#include "boxpolicy/nuisance.hpp"

namespace boxpolicy {

enum class ScoreMethod { kDM, kIPS, kDR };

ScoreMethod parse_score_method(std::string_view name);
std::string to_string(ScoreMethod method);

inline constexpr double kZeroScore = 1e-12;

// Per-sample weights of the weighted-mismatch objective. `kept[k]` is the
// dataset row behind psi[k]; rows with |psi| < 1e-12 are absent.
struct ScoreVector {
  std::vector<double> psi;
  std::vector<std::size_t> kept;
  ScoreMethod method = ScoreMethod::kDR;
  std::vector<std::size_t> dropped;

  std::size_t size() const { return psi.size(); }
};

double psi_dm(Treatment t, double mu_minus, double mu_plus);
double psi_ips(double y, double e_t);
double psi_dr(Treatment t, double y, double mu_minus, double mu_plus, double e_t);

ScoreVector compute_scores(const Dataset& data, const NuisanceModel& model, ScoreMethod method);

// Divides by the population standard deviation; no centering.
ScoreVector scale_scores(const ScoreVector& scores);

// Scores taken verbatim (e.g. from tests); zero entries are dropped as above.
ScoreVector scores_from_values(std::vector<double> psi, ScoreMethod method = ScoreMethod::kDR);

}  // namespace boxpolicy
