// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "rsbb/expr.hpp"
#include "rsbb/uncertainty.hpp"

namespace rsbb {

/// Built-in two-variable bilinear test problem:
///   min  -2 x1 x2
///   s.t. (4 + 2 xi) x1 x2 + 2 x1 + 2 x2 - 3 <= 0,   xi in [-1, 1]
///        0.1 - (x1 - 0.5)^2 - (x2 - 0.5)^2 <= 0
///        x2 - 0.09 x2 - 0.5 <= 0            (alt_second_reading: 0.09 x1)
///        x in [0, 1]^2
/// The uncertain coefficient is the interval [2, 6] re-centered at its
/// nominal value 4 with half-range 2, so the matching set is a box of size 1.
struct ToyProblem {
  QcqpProblem problem;
  UncertaintySet set;  // box, size 1, dim 1
};

ToyProblem make_toy_problem(bool alt_second_reading = false);

}  // namespace rsbb
