#include "boxpolicy/nuisance.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <string>

#include "boxpolicy/errors.hpp"

namespace boxpolicy {

namespace {

constexpr double kBandwidthFloor = 1e-3;
constexpr double kMinKernelMass = 1e-12;

KernelRegression::Arm collect_arm(const Dataset& data, Treatment t) {
  KernelRegression::Arm arm;
  for (const auto& s : data) {
    if (s.t != t) continue;
    arm.x.push_back(s.x);
    arm.y.push_back(s.y);
  }
  if (arm.y.size() < 2) {
    throw DataError("kernel regression needs at least 2 samples with treatment " +
                    std::to_string(as_int(t)));
  }
  arm.mean = std::accumulate(arm.y.begin(), arm.y.end(), 0.0) / static_cast<double>(arm.y.size());
  return arm;
}

double log_sigmoid(double z) { return z >= 0 ? -std::log1p(std::exp(-z)) : z - std::log1p(std::exp(z)); }

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double ez = std::exp(z);
  return ez / (1.0 + ez);
}

}  // namespace

double silverman_bandwidth(const std::vector<std::vector<double>>& x) {
  const auto n = x.size();
  if (n < 2) return 1.0;
  const auto d = x.front().size();
  double mean_sd = 0.0;
  for (std::size_t t = 0; t < d; ++t) {
    double m = 0.0;
    for (const auto& row : x) m += row[t];
    m /= static_cast<double>(n);
    double ss = 0.0;
    for (const auto& row : x) ss += (row[t] - m) * (row[t] - m);
    mean_sd += std::sqrt(ss / static_cast<double>(n - 1));
  }
  mean_sd /= static_cast<double>(std::max<std::size_t>(d, 1));
  const double dd = static_cast<double>(d);
  const double h = mean_sd * std::pow(4.0 / ((dd + 2.0) * static_cast<double>(n)), 1.0 / (dd + 4.0));
  return std::max(h, kBandwidthFloor);
}

KernelRegression::KernelRegression(Arm treated, Arm control)
    : treated_(std::move(treated)), control_(std::move(control)) {}

double KernelRegression::predict(Treatment t, std::span<const double> x) const {
  const auto& a = arm(t);
  const double inv = 1.0 / (2.0 * a.bandwidth * a.bandwidth);
  double mass = 0.0;
  double acc = 0.0;
  for (std::size_t i = 0; i < a.y.size(); ++i) {
    if (a.x[i].size() != x.size()) throw PreconditionError("dimension mismatch in kernel regression");
    double dist2 = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) dist2 += (a.x[i][k] - x[k]) * (a.x[i][k] - x[k]);
    const double w = std::exp(-dist2 * inv);
    mass += w;
    acc += w * a.y[i];
  }
  return mass < kMinKernelMass ? a.mean : acc / mass;
}

KernelRegression fit_kernel_regression(const Dataset& data, std::optional<double> bandwidth) {
  auto treated = collect_arm(data, Treatment::kTreat);
  auto control = collect_arm(data, Treatment::kControl);
  if (bandwidth) {
    if (!(*bandwidth > 0.0)) throw PreconditionError("kernel bandwidth must be positive");
    treated.bandwidth = control.bandwidth = *bandwidth;
  } else {
    treated.bandwidth = silverman_bandwidth(treated.x);
    control.bandwidth = silverman_bandwidth(control.x);
  }
  return KernelRegression(std::move(treated), std::move(control));
}

LogisticPropensity::LogisticPropensity(double intercept, std::vector<double> weights, bool separated,
                                       int iterations)
    : intercept_(intercept), weights_(std::move(weights)), separated_(separated), iterations_(iterations) {}

double LogisticPropensity::prob_treated(std::span<const double> x) const {
  if (x.size() != weights_.size()) throw PreconditionError("dimension mismatch in propensity model");
  double z = intercept_;
  for (std::size_t k = 0; k < x.size(); ++k) z += weights_[k] * x[k];
  return std::clamp(sigmoid(z), kPropensityClip, 1.0 - kPropensityClip);
}

double LogisticPropensity::prob(Treatment t, std::span<const double> x) const {
  const double p = prob_treated(x);
  return t == Treatment::kTreat ? p : 1.0 - p;
}

LogisticPropensity fit_logistic(const Dataset& data, int max_iter, double tol) {
  const auto n = static_cast<Eigen::Index>(data.n());
  const auto p = static_cast<Eigen::Index>(data.d()) + 1;
  Eigen::MatrixXd z(n, p);
  Eigen::VectorXd label(n);
  std::size_t treated = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& s = data[static_cast<std::size_t>(i)];
    z(i, 0) = 1.0;
    for (Eigen::Index k = 1; k < p; ++k) z(i, k) = s.x[static_cast<std::size_t>(k - 1)];
    label(i) = s.t == Treatment::kTreat ? 1.0 : 0.0;
    treated += s.t == Treatment::kTreat;
  }
  if (treated == 0 || treated == data.n()) {
    throw DataError("logistic propensity fit needs both treatment labels");
  }

  auto log_lik = [&](const Eigen::VectorXd& beta) {
    const Eigen::VectorXd eta = z * beta;
    double ll = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) ll += label(i) > 0.5 ? log_sigmoid(eta(i)) : log_sigmoid(-eta(i));
    return ll;
  };

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  double ll = log_lik(beta);
  int iter = 0;
  for (; iter < max_iter; ++iter) {
    const Eigen::VectorXd eta = z * beta;
    Eigen::VectorXd mu(n), w(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      mu(i) = sigmoid(eta(i));
      w(i) = mu(i) * (1.0 - mu(i));
    }
    const Eigen::VectorXd grad = z.transpose() * (label - mu);
    if (grad.norm() < tol) break;
    Eigen::MatrixXd hess = z.transpose() * w.asDiagonal() * z;
    hess.diagonal().array() += 1e-10;
    const Eigen::VectorXd step = hess.ldlt().solve(grad);
    double scale = 1.0;
    bool improved = false;
    for (int halving = 0; halving < 40; ++halving, scale *= 0.5) {
      const Eigen::VectorXd trial = beta + scale * step;
      const double trial_ll = log_lik(trial);
      if (std::isfinite(trial_ll) && trial_ll >= ll) {
        beta = trial;
        ll = trial_ll;
        improved = true;
        break;
      }
    }
    if (!improved) break;
  }

  const bool separated = ll > -1e-6 * static_cast<double>(n) || beta.cwiseAbs().maxCoeff() > 1e4;
  std::vector<double> weights(beta.data() + 1, beta.data() + p);
  return LogisticPropensity(beta(0), std::move(weights), separated, iter);
}

NuisanceModel make_model(KernelRegression outcome, LogisticPropensity propensity) {
  auto mu = std::make_shared<const KernelRegression>(std::move(outcome));
  auto e = std::make_shared<const LogisticPropensity>(std::move(propensity));
  return NuisanceModel{
      [mu](Treatment t, std::span<const double> x) { return mu->predict(t, x); },
      [e](Treatment t, std::span<const double> x) { return e->prob(t, x); },
  };
}

NuisanceModel exact_nuisance(const Scenario& scenario) {
  return NuisanceModel{
      [scenario](Treatment t, std::span<const double> x) { return true_mean(scenario, x, t); },
      [d = scenario.d](Treatment, std::span<const double> x) {
        if (x.size() != d) throw PreconditionError("dimension mismatch in exact propensity");
        return 0.5;
      },
  };
}

NuisanceModel make_nuisance(std::string_view spec, const Dataset& data) {
  if (spec == "kernel+logistic") return make_model(fit_kernel_regression(data), fit_logistic(data));
  constexpr std::string_view exact = "exact:";
  if (spec.substr(0, exact.size()) == exact) {
    const auto scenario = Scenario::parse(spec.substr(exact.size()));
    if (scenario.d != data.d()) throw PreconditionError("scenario dimension does not match the data");
    return exact_nuisance(scenario);
  }
  throw PreconditionError("unknown nuisance '" + std::string(spec) + "'");
}

}  // namespace boxpolicy
