// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "rsbb/cutting_set.hpp"
#include "rsbb/rsbb.hpp"
#include "rsbb/toy.hpp"
#include "test_support.hpp"

using namespace rsbb;

TEST_CASE("infeasibility test replays the node-2 story") {
  const auto toy = make_toy_problem();
  auto store = SampleStore::for_problem(toy.problem);
  const VariableBox box({0.5, 0.0}, {1.0, 1.0});

  // Nominal local optimum (-0.45) violates the constraint at u = 6.
  const std::vector<double> x_star{0.74666, 0.30212};
  CuttingOptions opts;
  const auto result = infeasibility_test(toy.problem, x_star, store, toy.set, box, opts);

  CHECK(result.certified);
  REQUIRE(result.rounds.size() == 1);
  CHECK(result.samples_added == 1);
  REQUIRE(result.rounds[0].violated_constraints.size() == 1);
  CHECK(result.rounds[0].violated_constraints[0].xi_star[0] == doctest::Approx(1.0));
  CHECK(result.objective == doctest::Approx(-0.3607).epsilon(2e-3));
  CHECK(store.samples(0).size() == 2);
  CHECK(store.samples(0)[1][0] == doctest::Approx(1.0));
}

TEST_CASE("trivial point passes with zero rounds") {
  const auto toy = make_toy_problem();
  auto store = SampleStore::for_problem(toy.problem);
  // x1*x2 = 0 makes the uncertain row independent of xi and slack.
  const std::vector<double> x_star{0.0, 0.0};
  const auto result = infeasibility_test(toy.problem, x_star, store, toy.set,
                                         toy.problem.box, {});
  CHECK(result.certified);
  CHECK(result.rounds.empty());
  CHECK(result.samples_added == 0);
  CHECK(store.total_samples() == 1);
}

TEST_CASE("vanishing set size means no cuts for nominal-feasible points") {
  const auto toy = make_toy_problem();
  auto store = SampleStore::for_problem(toy.problem);
  UncertaintySet tiny = toy.set;
  tiny.size = 1e-12;
  const std::vector<double> x_star{0.74666, 0.30212};  // nominal-tight point
  const auto result =
      infeasibility_test(toy.problem, x_star, store, tiny, toy.problem.box, {});
  CHECK(result.certified);
  CHECK(result.rounds.empty());
}

TEST_CASE("objective is non-decreasing across cut rounds") {
  const auto toy = make_toy_problem();
  auto store = SampleStore::for_problem(toy.problem);
  const VariableBox box({0.5, 0.0}, {1.0, 1.0});
  const std::vector<double> x_star{0.74666, 0.30212};
  const auto result = infeasibility_test(toy.problem, x_star, store, toy.set, box, {});
  double prev = -1e300;
  for (const auto& r : result.rounds) {
    CHECK(r.objective_after >= prev - 1e-9);
    prev = r.objective_after;
  }
}

TEST_CASE("round cap is an error, not silent acceptance") {
  const auto toy = make_toy_problem();
  auto store = SampleStore::for_problem(toy.problem);
  const VariableBox box({0.5, 0.0}, {1.0, 1.0});
  const std::vector<double> x_star{0.74666, 0.30212};  // violates at u = 6
  CuttingOptions opts;
  opts.max_rounds = 0;
  CHECK_THROWS_AS(
      infeasibility_test(toy.problem, x_star, store, toy.set, box, opts),
      std::runtime_error);
}

TEST_CASE("materialize_samples turns stored xi into certain rows") {
  const auto toy = make_toy_problem();
  auto store = SampleStore::for_problem(toy.problem);
  store.add_sample(0, std::vector<double>{1.0}, toy.set);
  const auto det = materialize_samples(toy.problem, store);
  CHECK(det.uncertain_constraints.empty());
  CHECK(det.certain_constraints.size() == toy.problem.certain_constraints.size() + 2);
  // The u = 6 row at the robust optimum is tight.
  const std::vector<double> x{0.70220, 0.25681};
  double worst = -1e300;
  for (const auto& c : det.certain_constraints) worst = std::max(worst, c.expr.eval(x));
  CHECK(worst == doctest::Approx(0.0).epsilon(1e-3));
}

TEST_CASE("robust cutting set, local inner solves, certifies the toy") {
  const auto toy = make_toy_problem();
  const auto result = robust_cutting_set(toy.problem, toy.set, 1e-6, false);
  REQUIRE(!result.robust_infeasible);
  // Local variant yields a robust feasible point (not necessarily optimal).
  double a0 = 0.0;
  std::vector<double> a;
  for (std::size_t ci = 0; ci < toy.problem.uncertain_constraints.size(); ++ci) {
    extract_affine(toy.problem.uncertain_constraints[ci], result.point, 1, a0, a);
    CHECK(worst_case(a0, a, toy.set).value <= 1e-6);
  }
}

TEST_CASE("robust cutting set, global inner solves, finds the robust optimum") {
  const auto toy = make_toy_problem();
  const auto result = robust_cutting_set(toy.problem, toy.set, 1e-6, true);
  REQUIRE(!result.robust_infeasible);
  CHECK(result.objective == doctest::Approx(-0.3607).epsilon(5e-3));
}

TEST_CASE("problem with no uncertain constraints: one inner solve, zero rounds") {
  auto toy = make_toy_problem();
  const auto nominal = nominalize(toy.problem);
  CHECK(nominal.uncertain_constraints.empty());
  const auto result = robust_cutting_set(nominal, toy.set, 1e-6, false);
  CHECK(result.rounds.empty());
  CHECK(!result.robust_infeasible);
}

TEST_CASE("certification property: oracle-clean points survive dense sampling") {
  const auto toy = make_toy_problem();
  const auto result = robust_cutting_set(toy.problem, toy.set, 1e-6, true);
  REQUIRE(!result.robust_infeasible);
  testing::Rng rng(4);
  for (int s = 0; s < 10000; ++s) {
    const std::vector<double> xi{rng.uniform(-1, 1)};
    for (const auto& uc : toy.problem.uncertain_constraints) {
      CHECK(eval_uncertain(uc, result.point, xi) <= 1e-6 + 1e-9);
    }
  }
}
