// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "rsbb/expr.hpp"
#include "rsbb/slp.hpp"
#include "rsbb/uncertainty.hpp"

namespace rsbb {

struct CutRoundLog {
  struct Violation {
    int constraint_id = -1;
    std::vector<double> xi_star;
    double violation = 0.0;
  };
  int round = 0;
  std::vector<Violation> violated_constraints;
  double objective_after = 0.0;
};

struct InfeasibilityTestResult {
  std::vector<double> point;
  double objective = 0.0;      // +inf when a re-solve came back infeasible
  std::vector<CutRoundLog> rounds;
  int samples_added = 0;
  bool certified = false;      // final point passed the oracle on every row
  bool cap_hit = false;
};

struct CuttingOptions {
  double delta = 1e-6;
  int max_rounds = 200;
  SlpOptions slp;
};

/// Per-node robust cutting loop: certifies x_star against the worst-case
/// oracle, appending every violating xi* to `store` and re-solving the
/// sampled problem locally from the previous point until no uncertain
/// constraint exceeds delta. Throws std::runtime_error when the round cap is
/// hit (finite termination is guaranteed; the cap guards implementation bugs).
InfeasibilityTestResult infeasibility_test(const QcqpProblem& problem,
                                           std::span<const double> x_star,
                                           SampleStore& store,
                                           const UncertaintySet& set,
                                           const VariableBox& node_box,
                                           const CuttingOptions& options);

struct RobustCuttingResult {
  std::vector<double> point;
  double objective = 0.0;
  std::vector<CutRoundLog> rounds;
  int samples_added = 0;
  bool robust_infeasible = false;
  SampleStore store;
};

/// Standalone robust cutting set baseline. With use_global the inner solve of
/// each round is a full deterministic-global solve of the sampled problem
/// (defined in rsbb.cpp to keep the solver dependency one-way); otherwise a
/// single local solve from the box midpoint, warm-started across rounds.
RobustCuttingResult robust_cutting_set(const QcqpProblem& problem,
                                       const UncertaintySet& set,
                                       double delta, bool use_global,
                                       const CuttingOptions& options = {});

/// Copy of `problem` with every uncertain constraint replaced by one certain
/// row per stored sample. The result has no uncertain constraints.
QcqpProblem materialize_samples(const QcqpProblem& problem,
                                const SampleStore& store);

}  // namespace rsbb
