// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "rsbb/simplex.hpp"
#include "test_support.hpp"

using namespace rsbb;

TEST_CASE("bound-only problems") {
  LinearProgram lp;
  lp.add_var(0.0, 1.0, -1.0);
  SimplexSolver s;
  const auto out = s.solve(lp);
  REQUIRE(out.status == LpStatus::Optimal);
  CHECK(out.point[0] == doctest::Approx(1.0));
  CHECK(out.objective == doctest::Approx(-1.0));
}

TEST_CASE("infeasible row detected") {
  LinearProgram lp;
  lp.add_var(0.0, 1.0, 0.0);
  lp.add_row_le({{0, 1.0}}, -1.0);  // x <= -1 with x in [0,1]
  SimplexSolver s;
  CHECK(s.solve(lp).status == LpStatus::Infeasible);
}

TEST_CASE("small LP with rows") {
  // min -x - 2y st x + y <= 1.5, x,y in [0,1]
  LinearProgram lp;
  lp.add_var(0.0, 1.0, -1.0);
  lp.add_var(0.0, 1.0, -2.0);
  lp.add_row_le({{0, 1.0}, {1, 1.0}}, 1.5);
  SimplexSolver s;
  const auto out = s.solve(lp);
  REQUIRE(out.status == LpStatus::Optimal);
  CHECK(out.objective == doctest::Approx(-2.5));
  CHECK(out.point[1] == doctest::Approx(1.0));
  CHECK(out.point[0] == doctest::Approx(0.5));
}

TEST_CASE("equality range rows") {
  // min x + y st x + y = 1, x in [0, 0.25]
  LinearProgram lp;
  lp.add_var(0.0, 0.25, 1.0);
  lp.add_var(0.0, 2.0, 1.0);
  lp.add_row_range({{0, 1.0}, {1, 1.0}}, 1.0, 1.0);
  SimplexSolver s;
  const auto out = s.solve(lp);
  REQUIRE(out.status == LpStatus::Optimal);
  CHECK(out.objective == doctest::Approx(1.0));
  CHECK(out.point[0] + out.point[1] == doctest::Approx(1.0));
}

TEST_CASE("unbounded detection") {
  LinearProgram lp;
  lp.add_var(0.0, kInf, -1.0);
  SimplexSolver s;
  CHECK(s.solve(lp).status == LpStatus::Unbounded);

  LinearProgram lp2;
  lp2.add_var(0.0, kInf, -1.0);
  lp2.add_row_le({{0, -1.0}}, 5.0);  // -x <= 5, still unbounded above
  CHECK(s.solve(lp2).status == LpStatus::Unbounded);
}

namespace {

LinearProgram random_lp(testing::Rng& rng, int max_vars, int max_rows) {
  LinearProgram lp;
  const int n = rng.uniform_int(1, max_vars);
  for (int i = 0; i < n; ++i) {
    const double lo = rng.uniform(-3, 1);
    lp.add_var(lo, lo + rng.uniform(0, 4), rng.uniform(-2, 2));
  }
  const int m = rng.uniform_int(0, max_rows);
  for (int r = 0; r < m; ++r) {
    LinearProgram::Row row;
    for (int i = 0; i < n; ++i) {
      if (rng.uniform(0, 1) < 0.6) row.terms.push_back({i, rng.uniform(-2, 2)});
    }
    const int sense = rng.uniform_int(0, 2);
    const double rhs = rng.uniform(-3, 3);
    if (sense == 0) {
      row.upper = rhs;
    } else if (sense == 1) {
      row.lower = rhs;
    } else {
      row.lower = rhs;
      row.upper = rhs + rng.uniform(0, 1);
    }
    lp.add_row(std::move(row));
  }
  return lp;
}

// KKT certificate: primal feasibility, dual feasibility (via reported
// residuals), and objective equal to the Lagrangian bound.
void check_optimal(const LinearProgram& lp, const LpOutcome& out) {
  REQUIRE(out.status == LpStatus::Optimal);
  CHECK(out.max_primal_residual <= 1e-7);
  CHECK(out.max_dual_residual <= 1e-6);
  CHECK(out.objective == doctest::Approx(out.dual_bound).epsilon(1e-6).scale(1.0));
  for (int i = 0; i < lp.num_vars; ++i) {
    CHECK(out.point[i] >= lp.lower[i] - 1e-9);
    CHECK(out.point[i] <= lp.upper[i] + 1e-9);
  }
}

}  // namespace

TEST_CASE("fuzz: terminates with a certificate on 1000 random LPs") {
  testing::Rng rng(20240808);
  int optimal = 0, infeasible = 0, unbounded = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const LinearProgram lp = random_lp(rng, 6, 8);
    SimplexSolver s;
    const auto out = s.solve(lp);
    REQUIRE(out.status != LpStatus::IterationLimit);
    if (out.status == LpStatus::Optimal) {
      check_optimal(lp, out);
      ++optimal;
    } else if (out.status == LpStatus::Infeasible) {
      ++infeasible;
    } else {
      ++unbounded;
    }
  }
  // All three outcomes should occur on this distribution.
  CHECK(optimal > 0);
  CHECK(infeasible > 0);
}

TEST_CASE("fuzz: larger LPs stay within tolerance") {
  testing::Rng rng(555);
  for (int trial = 0; trial < 60; ++trial) {
    const LinearProgram lp = random_lp(rng, 50, 40);
    SimplexSolver s;
    const auto out = s.solve(lp);
    REQUIRE(out.status != LpStatus::IterationLimit);
    if (out.status == LpStatus::Optimal) check_optimal(lp, out);
  }
}

TEST_CASE("determinism: identical input gives identical outcome") {
  testing::Rng rng(31415);
  for (int trial = 0; trial < 50; ++trial) {
    const LinearProgram lp = random_lp(rng, 10, 10);
    SimplexSolver s1, s2;
    const auto a = s1.solve(lp);
    const auto b = s2.solve(lp);
    REQUIRE(a.status == b.status);
    if (a.status == LpStatus::Optimal) {
      CHECK(a.objective == b.objective);  // bit-identical
      CHECK(a.point == b.point);
      CHECK(a.iterations == b.iterations);
    }
  }
}

TEST_CASE("warm start from a previous basis") {
  LinearProgram lp;
  lp.add_var(0.0, 2.0, -1.0);
  lp.add_var(0.0, 2.0, -1.0);
  lp.add_row_le({{0, 1.0}, {1, 1.0}}, 2.0);
  SimplexSolver s;
  const auto cold = s.solve(lp);
  REQUIRE(cold.status == LpStatus::Optimal);
  const auto warm = s.solve(lp, &cold.basis);
  REQUIRE(warm.status == LpStatus::Optimal);
  CHECK(warm.objective == doctest::Approx(cold.objective));
  CHECK(warm.iterations <= cold.iterations);
}
