#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "boxpolicy/data.hpp"
#include "boxpolicy/simgen.hpp"

namespace boxpolicy {

inline constexpr double kPropensityClip = 0.01;

// Outcome regressions mu_t(x) and propensities e_t(x).
struct NuisanceModel {
  std::function<double(Treatment, std::span<const double>)> mu;
  // Probability of receiving `t`; e(+1, x) + e(-1, x) = 1.
  std::function<double(Treatment, std::span<const double>)> e;
};

// Nadaraya-Watson regression with a Gaussian kernel, one estimator per arm.
class KernelRegression {
 public:
  struct Arm {
    std::vector<std::vector<double>> x;
    std::vector<double> y;
    double bandwidth = 1.0;
    double mean = 0.0;
  };

  KernelRegression(Arm treated, Arm control);

  double predict(Treatment t, std::span<const double> x) const;
  double bandwidth(Treatment t) const { return arm(t).bandwidth; }

 private:
  const Arm& arm(Treatment t) const { return t == Treatment::kTreat ? treated_ : control_; }

  Arm treated_;
  Arm control_;
};

// Silverman's rule of thumb, averaged over dimensions, floored at 1e-3.
double silverman_bandwidth(const std::vector<std::vector<double>>& x);

// `bandwidth` empty selects Silverman per arm.
KernelRegression fit_kernel_regression(const Dataset& data, std::optional<double> bandwidth = {});

// Logistic model of P(T = +1 | x), clipped to [0.01, 0.99].
class LogisticPropensity {
 public:
  LogisticPropensity(double intercept, std::vector<double> weights, bool separated, int iterations);

  double prob_treated(std::span<const double> x) const;
  double prob(Treatment t, std::span<const double> x) const;

  double intercept() const { return intercept_; }
  const std::vector<double>& weights() const { return weights_; }
  // Set when the likelihood kept improving with diverging weights.
  bool separation_warning() const { return separated_; }
  int iterations() const { return iterations_; }

 private:
  double intercept_;
  std::vector<double> weights_;
  bool separated_;
  int iterations_;
};

// Damped Newton on the log-likelihood until the gradient norm drops below tol.
LogisticPropensity fit_logistic(const Dataset& data, int max_iter = 100, double tol = 1e-8);

NuisanceModel make_model(KernelRegression outcome, LogisticPropensity propensity);
// True means of a built-in scenario with e = 1/2.
NuisanceModel exact_nuisance(const Scenario& scenario);

// "kernel+logistic" fits both models on `data`; "exact:<scenario>" uses the
// scenario's true means. Anything else throws PreconditionError.
NuisanceModel make_nuisance(std::string_view spec, const Dataset& data);

}  // namespace boxpolicy
