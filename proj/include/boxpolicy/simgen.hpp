#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "boxpolicy/data.hpp"
#include "boxpolicy/random.hpp"

namespace boxpolicy {

// Built-in data-generating processes. Covariates are U[-1,1]^d, treatment is
// a fair coin, and Y = m(X,T) + 0.1 * N(0,1).
enum class ScenarioId { kBasic, kComplex, kVeryComplex, kRegret4d, kSimple4d };

struct Scenario {
  ScenarioId id = ScenarioId::kBasic;
  std::size_t d = 2;
  double sigma = 0.1;

  static Scenario from_id(ScenarioId id);
  // Accepts basic, complex, very_complex, regret4d, simple4d.
  static Scenario parse(std::string_view name);
  std::string name() const;
};

// Noise-free mean m(x, t); sign(0) = 0.
double true_mean(const Scenario& scenario, std::span<const double> x, Treatment t);
// argmin over t of true_mean; ties go to kControl.
Treatment optimal_decision(const Scenario& scenario, std::span<const double> x);

// Reproducible draw of n samples. Sample i uses Philox blocks
// (i, b, kCovariates) for its covariates (two per block), (i, 0, kTreatment)
// for the coin and (i, 0, kNoise) for the Box-Muller noise.
Dataset generate(const Scenario& scenario, std::size_t n, std::uint64_t seed);

// Covariate i drawn exactly as `generate` would draw it, on the given stream.
std::vector<double> draw_covariates(const Scenario& scenario, std::uint64_t seed,
                                    std::uint64_t index, Stream stream);

}  // namespace boxpolicy
