// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <vector>

#include "rsbb/expr.hpp"
#include "rsbb/uncertainty.hpp"

namespace rsbb {

enum class LocalStatus { LocalOptimal, InfeasiblePoint, StallLimit };

struct SlpOptions {
  double feas_tol = 1e-6;        // delta_feas
  double trust_init_frac = 0.25; // of the box width, per dimension
  double trust_min = 1e-8;
  double trust_shrink = 0.5;
  double trust_expand = 1.5;
  double expand_ratio = 0.75;
  double penalty_cap = 1e8;
  int max_iterations = 400;
};

struct MeritLogEntry {
  int iteration = 0;
  double merit_before = 0.0;
  double merit_after = 0.0;
  double penalty = 0.0;
  bool accepted = false;
};

struct LocalOutcome {
  LocalStatus status = LocalStatus::StallLimit;
  std::vector<double> point;
  double objective = 0.0;
  double max_violation = 0.0;
  std::vector<MeritLogEntry> merit_log;
};

/// Successive linear programming with an l1 merit function and a per-dimension
/// trust region, on the sampled problem over `box`: all certain constraints
/// plus every uncertain constraint instantiated at each stored sample.
LocalOutcome solve_local(const QcqpProblem& problem, const VariableBox& box,
                         const SampleStore& store, std::span<const double> start,
                         const SlpOptions& options = {});

/// Runs solve_local from each start and keeps the best feasible result
/// (lowest objective); falls back to the least-infeasible one.
LocalOutcome solve_local_multistart(const QcqpProblem& problem,
                                    const VariableBox& box,
                                    const SampleStore& store,
                                    const std::vector<std::vector<double>>& starts,
                                    const SlpOptions& options = {});

}  // namespace rsbb
