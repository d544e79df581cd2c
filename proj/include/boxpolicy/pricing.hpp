#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "boxpolicy/data.hpp"
#include "boxpolicy/master.hpp"

namespace boxpolicy {

inline constexpr double kZeroCoefficient = 1e-12;
inline constexpr double kDefaultPricingTimeLimit = 180.0;

// Hyperbox search over samples with nonzero coefficient. Covering a sample adds
// its coefficient; positive ones may be left out, negative ones inside the box
// are always counted.
struct PricingInstance {
  std::size_t d = 0;
  std::vector<std::size_t> sample;          // master sample index of each entry
  std::vector<double> coeff;
  std::vector<std::vector<double>> x;
  std::vector<std::vector<double>> values;  // per dimension: sorted distinct coordinates
  std::vector<std::vector<std::uint32_t>> rank;  // rank[i][t] indexes values[t]
  double lambda = 0.0;
  double omega = 0.0;

  std::size_t n() const { return coeff.size(); }
};

// Drops entries with |coeff| < kZeroCoefficient and builds the rank tables.
PricingInstance make_pricing_instance(std::size_t d, const std::vector<std::vector<double>>& x,
                                      const std::vector<double>& coeff, const std::vector<std::size_t>& sample,
                                      double lambda, double omega);

// Coefficients +mu1, -sum mu2, -sum mu3, +mu4 by sample class.
PricingInstance build_pricing(const PolicyInstance& instance, const MasterDuals& duals, double omega);

struct PricingSolution {
  std::vector<std::size_t> delta;  // master sample indices inside the box
  std::optional<Hyperbox> box;     // empty when no sample is selected
  double objective = 0.0;          // covered coefficient mass - lambda - omega
  double reduced_cost = 0.0;       // -objective
  // Boxes the search held as incumbent before `box`, best first, each with a
  // positive objective. Empty for the brute force.
  std::vector<Hyperbox> runners_up;
  bool timed_out = false;
  std::size_t nodes = 0;           // search nodes (exact) or candidates (brute force)
};

PricingSolution solve_pricing(const PricingInstance& instance, double time_limit_seconds = kDefaultPricingTimeLimit);

// Tries every tuple of per-dimension rank intervals; throws PreconditionError
// when their number exceeds `guard`.
PricingSolution solve_pricing_bruteforce(const PricingInstance& instance, std::size_t guard = 1000000);

// Coefficient mass of the entries inside `box`, minus lambda and omega.
double pricing_value(const PricingInstance& instance, const Hyperbox& box);

}  // namespace boxpolicy
