// SPDX-License-Identifier: Apache-2.0

#include "rsbb/toy.hpp"

namespace rsbb {

ToyProblem make_toy_problem(bool alt_second_reading) {
  ToyProblem toy;
  QcqpProblem& p = toy.problem;
  const int x1 = p.add_variable("x1", 0.0, 1.0);
  const int x2 = p.add_variable("x2", 0.0, 1.0);

  p.objective.add_bilinear(x1, x2, -2.0);

  UncertainConstraint uc;
  uc.name = "budget";
  uc.group_id = 0;
  uc.base.add_bilinear(x1, x2, 4.0);
  uc.base.add_linear(x1, 2.0);
  uc.base.add_linear(x2, 2.0);
  uc.base.add_constant(-3.0);
  QuadExpr pert;
  pert.add_bilinear(x1, x2, 2.0);
  uc.perturbation_terms.emplace_back(0, pert);
  p.uncertain_constraints.push_back(uc);
  p.xi_group_dims[0] = 1;

  // 0.1 - (x1-0.5)^2 - (x2-0.5)^2 <= 0, expanded.
  QuadExpr ring;
  ring.add_bilinear(x1, x1, -1.0);
  ring.add_bilinear(x2, x2, -1.0);
  ring.add_linear(x1, 1.0);
  ring.add_linear(x2, 1.0);
  ring.add_constant(-0.4);
  p.add_inequality(ring, "ring");

  QuadExpr cap;
  cap.add_linear(x2, 1.0);
  if (alt_second_reading) {
    cap.add_linear(x1, -0.09);
  } else {
    cap.add_linear(x2, -0.09);
  }
  cap.add_constant(-0.5);
  p.add_inequality(cap, "cap");

  toy.set = UncertaintySet{SetKind::Box, 1.0, 1};
  return toy;
}

}  // namespace rsbb
