// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <limits>
#include <span>
#include <vector>

namespace rsbb {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Generic LP in bounded-variable form:
///   min c^T x   s.t.  row.lower <= a_r^T x <= row.upper,  lo <= x <= hi.
struct LinearProgram {
  struct Row {
    std::vector<std::pair<int, double>> terms;
    double lower = -kInf;
    double upper = kInf;
  };

  int num_vars = 0;
  std::vector<double> cost;
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<Row> rows;

  int add_var(double lo, double hi, double c);
  void add_row(Row row) { rows.push_back(std::move(row)); }
  void add_row_le(std::vector<std::pair<int, double>> terms, double rhs);
  void add_row_range(std::vector<std::pair<int, double>> terms, double lo, double hi);
};

enum class LpStatus { Optimal, Infeasible, Unbounded, IterationLimit };

/// Basis snapshot for warm starts: column indices of the basic set followed
/// by the bound flag of every column (0 = at lower, 1 = at upper).
struct Basis {
  std::vector<int> basic;
  std::vector<unsigned char> at_upper;
};

struct LpOutcome {
  LpStatus status = LpStatus::Infeasible;
  std::vector<double> point;      // structural variables, when Optimal
  double objective = 0.0;         // when Optimal
  Basis basis;                    // reusable for warm starts
  double dual_bound = 0.0;        // Lagrangian bound from final multipliers
  double max_primal_residual = 0.0;
  double max_dual_residual = 0.0;
  int iterations = 0;
};

/// Tolerances follow the documented defaults: primal 1e-7, dual 1e-7,
/// pivot 1e-9.
struct SimplexOptions {
  double primal_tol = 1e-7;
  double dual_tol = 1e-7;
  double pivot_tol = 1e-9;
  int max_iterations = 50000;
  int bland_trigger = 50;  // degenerate-pivot streak before Bland's rule
  int refactor_every = 60;
};

/// Deterministic dense revised simplex with explicit bounded variables and a
/// composite (infeasibility-minimizing) phase 1. One instance per solve;
/// instances hold only their own working memory.
class SimplexSolver {
 public:
  explicit SimplexSolver(SimplexOptions options = {}) : opts_(options) {}

  LpOutcome solve(const LinearProgram& lp, const Basis* warm_start = nullptr);

 private:
  SimplexOptions opts_;
};

}  // namespace rsbb
