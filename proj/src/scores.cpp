#include "boxpolicy/scores.hpp"

#include <cmath>

#include "boxpolicy/errors.hpp"

namespace boxpolicy {

namespace {

void check_propensity(double e_t) {
  constexpr double slack = 1e-12;
  if (!(e_t >= kPropensityClip - slack && e_t <= 1.0 - kPropensityClip + slack)) {
    throw PreconditionError("propensity " + std::to_string(e_t) + " outside [0.01, 0.99]");
  }
}

}  // namespace

ScoreMethod parse_score_method(std::string_view name) {
  if (name == "dm") return ScoreMethod::kDM;
  if (name == "ips") return ScoreMethod::kIPS;
  if (name == "dr") return ScoreMethod::kDR;
  throw PreconditionError("unknown score method '" + std::string(name) + "'");
}

std::string to_string(ScoreMethod method) {
  switch (method) {
    case ScoreMethod::kDM: return "dm";
    case ScoreMethod::kIPS: return "ips";
    case ScoreMethod::kDR: return "dr";
  }
  return "unknown";
}

double psi_dm(Treatment t, double mu_minus, double mu_plus) { return as_real(t) * (mu_minus - mu_plus); }

double psi_ips(double y, double e_t) {
  check_propensity(e_t);
  return -y / e_t;
}

double psi_dr(Treatment t, double y, double mu_minus, double mu_plus, double e_t) {
  const double mu_t = t == Treatment::kTreat ? mu_plus : mu_minus;
  return psi_dm(t, mu_minus, mu_plus) + psi_ips(y, e_t) + mu_t / e_t;
}

ScoreVector compute_scores(const Dataset& data, const NuisanceModel& model, ScoreMethod method) {
  ScoreVector out;
  out.method = method;
  for (std::size_t i = 0; i < data.n(); ++i) {
    const auto& s = data[i];
    double v = 0.0;
    switch (method) {
      case ScoreMethod::kDM:
        v = psi_dm(s.t, model.mu(Treatment::kControl, s.x), model.mu(Treatment::kTreat, s.x));
        break;
      case ScoreMethod::kIPS:
        v = psi_ips(s.y, model.e(s.t, s.x));
        break;
      case ScoreMethod::kDR:
        v = psi_dr(s.t, s.y, model.mu(Treatment::kControl, s.x), model.mu(Treatment::kTreat, s.x),
                   model.e(s.t, s.x));
        break;
    }
    if (!std::isfinite(v)) throw DataError("non-finite score at row " + std::to_string(i + 1));
    if (std::abs(v) < kZeroScore) {
      out.dropped.push_back(i);
      continue;
    }
    out.psi.push_back(v);
    out.kept.push_back(i);
  }
  if (out.psi.empty()) throw DataError("every score is zero; nothing to optimize");
  return out;
}

ScoreVector scale_scores(const ScoreVector& scores) {
  const auto n = scores.psi.size();
  if (n < 2) throw PreconditionError("scaling needs at least two scores");
  double mean = 0.0;
  for (double v : scores.psi) mean += v;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double v : scores.psi) ss += (v - mean) * (v - mean);
  const double sigma = std::sqrt(ss / static_cast<double>(n));
  if (!(sigma > 0.0)) throw PreconditionError("scores have zero standard deviation");
  ScoreVector out = scores;
  for (double& v : out.psi) v /= sigma;
  return out;
}

ScoreVector scores_from_values(std::vector<double> psi, ScoreMethod method) {
  ScoreVector out;
  out.method = method;
  for (std::size_t i = 0; i < psi.size(); ++i) {
    if (std::abs(psi[i]) < kZeroScore) {
      out.dropped.push_back(i);
      continue;
    }
    out.psi.push_back(psi[i]);
    out.kept.push_back(i);
  }
  if (out.psi.empty()) throw DataError("every score is zero; nothing to optimize");
  return out;
}

}  // namespace boxpolicy
