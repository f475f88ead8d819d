// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <utility>
#include <vector>

#include "rsbb/expr.hpp"
#include "rsbb/simplex.hpp"
#include "rsbb/uncertainty.hpp"

namespace rsbb {

/// LP relaxation of a QCQP over a node box: one auxiliary column per distinct
/// bilinear pair, four envelope rows per pair, one row per certain constraint
/// and per (uncertain constraint, stored sample) combination.
struct RelaxedLp {
  LinearProgram lp;
  int n_orig = 0;
  double obj_constant = 0.0;
  std::vector<std::pair<int, int>> pairs;           // aux order
  std::map<std::pair<int, int>, int> pair_index;    // (b,j) -> lp column

  int n_total() const { return lp.num_vars; }
};

/// Builds the relaxation. Envelope bounds come from `box` (the node box, not
/// the problem's root box). Every sample in `store` instantiates one row per
/// uncertain constraint. `set` is used only to sanity-check stored samples.
RelaxedLp relax(const QcqpProblem& problem, const VariableBox& box,
                const SampleStore& store, const UncertaintySet& set);

/// |y_bj - x_b * x_j| per pair at an LP solution (length n_total).
std::map<std::pair<int, int>, double> approximation_errors(
    std::span<const double> lp_solution,
    const std::map<std::pair<int, int>, int>& pair_index);

/// Relaxation value including the objective constant.
double relaxed_objective(const RelaxedLp& rlp, const LpOutcome& outcome);

}  // namespace rsbb
