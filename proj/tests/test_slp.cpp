// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "rsbb/mccormick.hpp"
#include "rsbb/simplex.hpp"
#include "rsbb/slp.hpp"
#include "rsbb/toy.hpp"
#include "test_support.hpp"

using namespace rsbb;

namespace {

// Sub-box where the nominal optimum lives; the local solves here reproduce
// the -0.45 / -0.36 node values.
VariableBox right_half_box() { return VariableBox({0.5, 0.0}, {1.0, 1.0}); }

std::vector<std::vector<double>> starts_from_relaxation(const ToyProblem& toy,
                                                        const VariableBox& box,
                                                        const SampleStore& store) {
  const auto rlp = relax(toy.problem, box, store, toy.set);
  SimplexSolver solver;
  const auto out = solver.solve(rlp.lp);
  std::vector<std::vector<double>> starts;
  if (out.status == LpStatus::Optimal) {
    starts.push_back({out.point[0], out.point[1]});
  }
  starts.push_back({box.midpoint(0), box.midpoint(1)});
  return starts;
}

}  // namespace

TEST_CASE("toy nominal local optimum on the hosting sub-box is -0.45") {
  const auto toy = make_toy_problem();
  const auto store = SampleStore::for_problem(toy.problem);
  const auto box = right_half_box();
  const auto result = solve_local_multistart(toy.problem, box, store,
                                             starts_from_relaxation(toy, box, store));
  REQUIRE(result.status == LocalStatus::LocalOptimal);
  CHECK(result.objective == doctest::Approx(-0.4512).epsilon(2e-3));
  CHECK(result.max_violation <= 1e-6);
}

TEST_CASE("toy with the u=6 sample gives -0.36") {
  const auto toy = make_toy_problem();
  auto store = SampleStore::for_problem(toy.problem);
  store.add_sample(0, std::vector<double>{1.0}, toy.set);
  const auto box = right_half_box();
  const auto result = solve_local_multistart(toy.problem, box, store,
                                             starts_from_relaxation(toy, box, store));
  REQUIRE(result.status == LocalStatus::LocalOptimal);
  CHECK(result.objective == doctest::Approx(-0.3607).epsilon(2e-3));
}

TEST_CASE("polishing from a near-optimal start reaches the nominal optimum") {
  const auto toy = make_toy_problem();
  const auto store = SampleStore::for_problem(toy.problem);
  const std::vector<double> start{0.75, 0.3};
  const auto result = solve_local(toy.problem, toy.problem.box, store, start);
  REQUIRE(result.status == LocalStatus::LocalOptimal);
  CHECK(result.objective == doctest::Approx(-0.45119).epsilon(1e-3));
}

TEST_CASE("degenerate single-point box returns the point") {
  const auto toy = make_toy_problem();
  const auto store = SampleStore::for_problem(toy.problem);
  VariableBox point_box({0.3, 0.2}, {0.3, 0.2});
  const std::vector<double> start{0.3, 0.2};
  const auto result = solve_local(toy.problem, point_box, store, start);
  CHECK(result.point[0] == 0.3);
  CHECK(result.point[1] == 0.2);
  CHECK(result.objective == doctest::Approx(-2.0 * 0.3 * 0.2));
  CHECK(result.status == LocalStatus::LocalOptimal);  // feasible point
}

TEST_CASE("returned objective matches a fresh evaluation") {
  const auto toy = make_toy_problem();
  const auto store = SampleStore::for_problem(toy.problem);
  const auto box = right_half_box();
  const auto result = solve_local_multistart(toy.problem, box, store,
                                             starts_from_relaxation(toy, box, store));
  CHECK(result.objective ==
        doctest::Approx(eval_expr(toy.problem.objective, result.point)).epsilon(1e-10));
}

TEST_CASE("feasibility certificate holds on the returned point") {
  const auto toy = make_toy_problem();
  const auto store = SampleStore::for_problem(toy.problem);
  const auto box = right_half_box();
  const auto result = solve_local_multistart(toy.problem, box, store,
                                             starts_from_relaxation(toy, box, store));
  REQUIRE(result.status == LocalStatus::LocalOptimal);
  double worst = -1e300;
  for (const auto& c : toy.problem.certain_constraints)
    worst = std::max(worst, c.expr.eval(result.point));
  for (std::size_t ci = 0; ci < toy.problem.uncertain_constraints.size(); ++ci) {
    for (const auto& xi : store.samples(ci)) {
      worst = std::max(worst,
                       eval_uncertain(toy.problem.uncertain_constraints[ci],
                                      result.point, xi));
    }
  }
  CHECK(worst <= 1e-6);
  CHECK(std::max(worst, 0.0) == doctest::Approx(result.max_violation).epsilon(1e-12));
}

TEST_CASE("local value dominates the node relaxation bound") {
  const auto toy = make_toy_problem();
  const auto store = SampleStore::for_problem(toy.problem);
  const auto box = right_half_box();
  const auto rlp = relax(toy.problem, box, store, toy.set);
  SimplexSolver solver;
  const auto lb = solver.solve(rlp.lp);
  REQUIRE(lb.status == LpStatus::Optimal);
  const auto local = solve_local_multistart(toy.problem, box, store,
                                            starts_from_relaxation(toy, box, store));
  REQUIRE(local.status == LocalStatus::LocalOptimal);
  CHECK(local.objective >= relaxed_objective(rlp, lb) - 1e-6);
}

TEST_CASE("merit log: accepted steps never increase the merit at fixed penalty") {
  const auto toy = make_toy_problem();
  const auto store = SampleStore::for_problem(toy.problem);
  const std::vector<double> start{0.6, 0.25};
  const auto result = solve_local(toy.problem, toy.problem.box, store, start);
  REQUIRE(!result.merit_log.empty());
  for (const auto& e : result.merit_log) {
    if (e.accepted) CHECK(e.merit_after <= e.merit_before + 1e-9);
  }
}

TEST_CASE("stall at the disk center is reported, not mislabeled") {
  // The midpoint sits exactly where the ring constraint's gradient vanishes;
  // no linearized step can reduce the violation, so the solver must report an
  // infeasible stationary point rather than loop.
  const auto toy = make_toy_problem();
  const auto store = SampleStore::for_problem(toy.problem);
  const std::vector<double> start{0.5, 0.5};
  const auto result = solve_local(toy.problem, toy.problem.box, store, start);
  CHECK(result.status == LocalStatus::InfeasiblePoint);
  CHECK(result.max_violation > 1e-6);
}

TEST_CASE("start outside dimension throws") {
  const auto toy = make_toy_problem();
  const auto store = SampleStore::for_problem(toy.problem);
  CHECK_THROWS_AS(
      solve_local(toy.problem, toy.problem.box, store, std::vector<double>{0.5}),
      std::invalid_argument);
}
