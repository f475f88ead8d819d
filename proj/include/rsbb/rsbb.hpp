// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "rsbb/cutting_set.hpp"
#include "rsbb/expr.hpp"
#include "rsbb/mccormick.hpp"
#include "rsbb/slp.hpp"
#include "rsbb/trace.hpp"
#include "rsbb/uncertainty.hpp"

namespace rsbb {

enum class NodeState { Waiting, Current, Fathomed, Closed };

struct Node {
  long id = 0;
  VariableBox box;
  double lb = -kInf;  // relaxation value z~_n, +inf if relaxation infeasible
  long parent = -1;
  int depth = 0;
  NodeState state = NodeState::Waiting;
  std::vector<double> relax_point;  // LP solution over original + aux columns
  std::map<std::pair<int, int>, int> pair_index;
  Basis lp_basis;  // warm start for re-solves and children
};

struct SolveConfig {
  double tol = 1e-6;              // node selection band
  double epsilon = 1e-4;          // relative fathoming tolerance
  double delta = 1e-6;            // oracle feasibility tolerance
  double branch_error_tol = 1e-6;
  long max_nodes = 100000;
  int max_cut_rounds = 200;
  double time_limit_s = 3600.0;
  int strong_branch_cap = 8;
  // Literal reading of the pseudoscore rule for infeasible children (lower
  // bound 0) instead of treating a prune-revealing branch as maximally
  // attractive.
  bool literal_infeasible_pseudoscore = false;
  SlpOptions slp;
};

enum class Termination { Optimal, TimeLimit, NodeLimit, RobustInfeasible };

std::string to_string(Termination t);

struct NodeLocalRecord {
  long node_id = -1;
  double pre_cut = kInf;   // local objective before the infeasibility test
  double post_cut = kInf;  // after the test's re-solves (equal when 0 rounds)
  int rounds = 0;
};

struct RobustSolution {
  std::vector<double> point;
  double objective = kInf;   // z^BF
  double lb = -kInf;         // best remaining bound
  double gap = kInf;         // |UB-LB|/|LB|
  SampleStore store;
  ConvergenceTrace trace;
  Termination termination = Termination::RobustInfeasible;
  long nodes_explored = 0;
  int cut_rounds = 0;
  int samples_added = 0;
  // Per-node local objectives; the CSV trace schema only carries global
  // bounds, so the per-node values live here for diagnostics.
  std::vector<NodeLocalRecord> node_locals;
};

/// Best-first selection: all waiting nodes within `tol` of the least lower
/// bound, in id order. Returned nodes are the caller's to mark Current.
std::vector<long> select_current(const std::vector<Node>& pool, double tol);

struct BranchDecision {
  int variable = -1;
  double point = 0.0;
  bool exhausted = false;  // all candidate intervals below 1e-9
};

/// Robust spatial branch-and-bound (cutting planes inside best-first sBB).
RobustSolution solve_rsbb(const QcqpProblem& problem, const UncertaintySet& set,
                          const SolveConfig& config = {});

/// Copy of `problem` with uncertain constraints pinned at xi = 0 as certain
/// rows; the zero-size-uncertainty (nominal) problem.
QcqpProblem nominalize(const QcqpProblem& problem);

}  // namespace rsbb
