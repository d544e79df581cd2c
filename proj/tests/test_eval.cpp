#include <cmath>
#include <random>

#include "boxpolicy/errors.hpp"
#include "boxpolicy/eval.hpp"
#include "doctest.h"
#include "instance_fixtures.hpp"

using namespace boxpolicy;

namespace {

Policy always(bool treat, std::size_t d) {
  Policy p{{}, false, d};
  if (treat) p.flipped = true;  // the empty union negated treats everyone
  return p;
}

}  // namespace

TEST_CASE("empirical objective") {
  const auto inst = boxpolicy::testing::two_sample_instance();
  CHECK(empirical_objective(always(false, 1), inst.data, inst.scores) == doctest::Approx(0.5));
  const Policy fitted{{Hyperbox({0.0}, {1.0})}, false, 1};
  CHECK(empirical_objective(fitted, inst.data, inst.scores) == doctest::Approx(-0.5));
  const Policy matching{{Hyperbox({0.0}, {0.0})}, false, 1};
  CHECK(empirical_objective(matching, inst.data, inst.scores) == 0.0);

  auto misaligned = inst.scores;
  misaligned.kept.pop_back();
  CHECK_THROWS_AS(empirical_objective(fitted, inst.data, misaligned), PreconditionError);
  auto outside = inst.scores;
  outside.kept[1] = 9;
  CHECK_THROWS_AS(empirical_objective(fitted, inst.data, outside), PreconditionError);

  // Agrees with the master's objective on random policies.
  std::mt19937_64 rng(4);
  for (int rep = 0; rep < 50; ++rep) {
    const auto r = boxpolicy::testing::random_instance(rng, 8, 2);
    const auto pi = PolicyInstance::build(r.data, r.scores);
    const auto boxes = spanned_boxes(pi.data);
    const Policy p{{boxes[rng() % boxes.size()]}, false, 2};
    CHECK(empirical_objective(p, r.data, r.scores) == doctest::Approx(pi.objective(p)).epsilon(1e-12));
  }
}

TEST_CASE("analytic policy values on the basic scenario") {
  const auto sc = Scenario::parse("basic");
  const std::size_t n_mc = 1000000;
  const auto control = policy_value_mc(always(false, 2), sc, n_mc, 2024);
  const auto treat = policy_value_mc(always(true, 2), sc, n_mc, 2024);
  CHECK(std::abs(control.value - 7.0 / 6.0) <= 3.0 * control.std_error);
  CHECK(std::abs(treat.value - 5.0 / 6.0) <= 3.0 * treat.std_error);
  CHECK(control.samples == n_mc);
  CHECK(control.std_error > 0.0);
}

TEST_CASE("regret") {
  const auto sc = Scenario::parse("basic");
  // The analytic optimum is the region x1 >= x0^2/2 - 1/4; a policy can only
  // approximate it, so check the optimal decision pointwise instead.
  const auto pool_seed = 12;
  std::vector<std::vector<double>> pool;
  for (int k = 0; k < 2000; ++k) pool.push_back(draw_covariates(sc, pool_seed, k, Stream::kEvaluation));
  const auto r_control = regret_on_points(always(false, 2), sc, pool);
  const auto r_treat = regret_on_points(always(true, 2), sc, pool);
  CHECK(r_control.value >= 0.0);
  CHECK(r_treat.value >= 0.0);
  // Same draws as the pool through the seeded path.
  const auto direct = regret(always(false, 2), sc, 2000, pool_seed);
  CHECK(direct.value == r_control.value);

  // A policy equal to the optimum on every draw has zero regret exactly. On
  // regret4d the optimum treats where x0 x1 x2 x3 < 0; the box [-1,0]x[0,1]x
  // [0,1]x[0,1] and its sign patterns cover it.
  const auto r4 = Scenario::parse("regret4d");
  Policy opt{{}, false, 4};
  for (int mask = 0; mask < 16; ++mask) {
    if (__builtin_popcount(mask) % 2 == 0) continue;  // odd number of negative coordinates
    std::vector<double> lo(4), hi(4);
    for (int t = 0; t < 4; ++t) {
      lo[t] = (mask >> t & 1) ? -1.0 : 0.0;
      hi[t] = (mask >> t & 1) ? 0.0 : 1.0;
    }
    opt.boxes.push_back(Hyperbox(lo, hi));
  }
  const auto zero = regret(opt, r4, 100000, 3);
  CHECK(zero.value == 0.0);

  // Regret is nonnegative for arbitrary policies under common random numbers.
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int rep = 0; rep < 20; ++rep) {
    const double a = u(rng), b = u(rng), c = u(rng), d = u(rng);
    const Policy p{{Hyperbox({std::min(a, b), std::min(c, d)}, {std::max(a, b), std::max(c, d)})}, false, 2};
    CHECK(regret(p, sc, 5000, rep).value >= 0.0);
  }

  // Treating everyone on the basic scenario: E[-2 g I(g < 0)] * 2 with
  // g = x1 - x0^2/2 + 1/4, from a midpoint-rule integral on a fine grid.
  double integral = 0.0;
  const int grid = 2000;
  for (int i = 0; i < grid; ++i) {
    for (int j = 0; j < grid; ++j) {
      const double x0 = -1.0 + 2.0 * (i + 0.5) / grid;
      const double x1 = -1.0 + 2.0 * (j + 0.5) / grid;
      const double g = x1 - 0.5 * x0 * x0 + 0.25;
      if (g < 0.0) integral += -4.0 * g;
    }
  }
  integral /= static_cast<double>(grid) * grid;
  const auto r_all = regret(always(true, 2), sc, 1000000, 77);
  CHECK(std::abs(r_all.value - integral) <= 3.0 * r_all.std_error + 1e-5);

  CHECK_THROWS_AS(regret(always(true, 3), sc, 10, 1), PreconditionError);
}

TEST_CASE("single Monte Carlo draw") {
  const auto sc = Scenario::parse("basic");
  const Policy p{{Hyperbox({-1.0, 0.0}, {1.0, 1.0})}, false, 2};
  const auto one = policy_value_mc(p, sc, 1, 31);
  const auto x = draw_covariates(sc, 31, 0, Stream::kEvaluation);
  CHECK(one.value == true_mean(sc, x, policy_decide(p, x)));
  CHECK(one.samples == 1);
}

TEST_CASE("rademacher bound") {
  CHECK(rademacher_bound(0) == 0.0);
  // Reference values evaluated independently: sqrt((1 + ln 2) * 4) and
  // sqrt((1 + ln 2) * 16) with ln 2 = 0.693147180559945309.
  CHECK(std::abs(rademacher_bound(2) - 2.6024198) < 1e-6);
  CHECK(std::abs(rademacher_bound(8) - 5.2048396) < 1e-6);
  for (std::size_t m : {1, 3, 5, 10}) CHECK(std::abs(rademacher_bound(4 * m) - 2.0 * rademacher_bound(m)) < 1e-9);
}

TEST_CASE("exhaustive search") {
  const auto inst = boxpolicy::testing::two_sample_instance();
  const auto pi = PolicyInstance::build(inst.data, inst.scores);
  const auto best = exhaustive_search(pi, 1);
  CHECK(best.objective == doctest::Approx(-0.5));
  REQUIRE(best.boxes.size() == 1);
  CHECK(best.boxes[0] == Hyperbox({0.0}, {1.0}));
  CHECK(exhaustive_search(pi, 0).objective == doctest::Approx(0.5));
  // A penalty above the gain keeps the class empty.
  CHECK(exhaustive_search(pi, 1, 2.0).boxes.empty());

  std::vector<Sample> many;
  for (int i = 0; i < 15; ++i) many.push_back({{double(i)}, Treatment::kTreat, 0.0});
  std::vector<double> psi(15, 1.0);
  const auto big = PolicyInstance::build(Dataset(many, 1), scores_from_values(psi));
  CHECK_THROWS_AS(exhaustive_search(big, 1), PreconditionError);
}
