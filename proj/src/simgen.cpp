#include "boxpolicy/simgen.hpp"

#include <algorithm>
#include <cmath>

#include "boxpolicy/errors.hpp"

namespace boxpolicy {

namespace {

double sign(double v) { return static_cast<double>((v > 0.0) - (v < 0.0)); }

// Treatment interaction f(x, t) of the 2D scenarios, divided by t.
double basic_effect(double x0, double x1) { return -2.0 * (x1 - 0.5 * x0 * x0 + 0.25); }

double complex_effect(double x0, double x1) {
  const double r2 = x0 * x0 + x1 * x1;
  return -2.0 * (0.4 * 0.4 - r2) * (r2 - 0.9 * 0.9);
}

double very_complex_effect(double x0, double x1) {
  const double a = 3.0 * (1.0 - x0) * (1.0 - x0) * std::exp(-x0 * x0 - (x1 + 1.0) * (x1 + 1.0));
  const double b = 10.0 * (x0 / 5.0 - x0 * x0 * x0 - std::pow(x1, 5)) * std::exp(-x0 * x0 - x1 * x1);
  const double c = std::exp(-(x0 + 1.0) * (x0 + 1.0) - x1 * x1) / 3.0;
  return -(a - b - c - 1.0);
}

}  // namespace

Scenario Scenario::from_id(ScenarioId id) {
  Scenario s;
  s.id = id;
  s.d = (id == ScenarioId::kRegret4d || id == ScenarioId::kSimple4d) ? 4 : 2;
  return s;
}

Scenario Scenario::parse(std::string_view name) {
  if (name == "basic") return from_id(ScenarioId::kBasic);
  if (name == "complex") return from_id(ScenarioId::kComplex);
  if (name == "very_complex") return from_id(ScenarioId::kVeryComplex);
  if (name == "regret4d") return from_id(ScenarioId::kRegret4d);
  if (name == "simple4d") return from_id(ScenarioId::kSimple4d);
  throw PreconditionError("unknown scenario '" + std::string(name) + "'");
}

std::string Scenario::name() const {
  switch (id) {
    case ScenarioId::kBasic: return "basic";
    case ScenarioId::kComplex: return "complex";
    case ScenarioId::kVeryComplex: return "very_complex";
    case ScenarioId::kRegret4d: return "regret4d";
    case ScenarioId::kSimple4d: return "simple4d";
  }
  return "unknown";
}

double true_mean(const Scenario& scenario, std::span<const double> x, Treatment t) {
  if (x.size() != scenario.d) throw PreconditionError("dimension mismatch for scenario " + scenario.name());
  const double tv = as_real(t);
  switch (scenario.id) {
    case ScenarioId::kBasic:
      return 1.0 + 2.0 * x[0] + x[1] + tv * basic_effect(x[0], x[1]);
    case ScenarioId::kComplex:
      return 1.0 + 2.0 * x[0] + x[1] + tv * complex_effect(x[0], x[1]);
    case ScenarioId::kVeryComplex:
      return 1.0 + 2.0 * x[0] + x[1] + tv * very_complex_effect(x[0], x[1]);
    case ScenarioId::kRegret4d:
      return std::max(x[2] + x[3], 0.0) + 0.5 * tv * sign(x[0] * x[1] * x[2] * x[3]);
    case ScenarioId::kSimple4d:
      return std::max(x[2] + x[3], 0.0) + 0.5 * tv * sign(x[0] * x[1]);
  }
  throw PreconditionError("unknown scenario");
}

Treatment optimal_decision(const Scenario& scenario, std::span<const double> x) {
  return true_mean(scenario, x, Treatment::kTreat) < true_mean(scenario, x, Treatment::kControl)
             ? Treatment::kTreat
             : Treatment::kControl;
}

std::vector<double> draw_covariates(const Scenario& scenario, std::uint64_t seed,
                                    std::uint64_t index, Stream stream) {
  const StreamSampler sampler(seed);
  std::vector<double> x(scenario.d);
  for (std::size_t t = 0; t < scenario.d; t += 2) {
    const auto u = sampler.uniform_pair(index, static_cast<std::uint32_t>(t / 2), stream);
    x[t] = 2.0 * u[0] - 1.0;
    if (t + 1 < scenario.d) x[t + 1] = 2.0 * u[1] - 1.0;
  }
  return x;
}

Dataset generate(const Scenario& scenario, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw PreconditionError("generate needs n >= 1");
  const StreamSampler sampler(seed);
  std::vector<Sample> samples(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto& s = samples[i];
    s.x = draw_covariates(scenario, seed, i, Stream::kCovariates);
    s.t = sampler.uniform_pair(i, 0, Stream::kTreatment)[0] < 0.5 ? Treatment::kTreat
                                                                   : Treatment::kControl;
    s.y = true_mean(scenario, s.x, s.t) + scenario.sigma * sampler.normal(i, 0, Stream::kNoise);
  }
  return Dataset(std::move(samples), scenario.d);
}

}  // namespace boxpolicy
