// SPDX-License-Identifier: Apache-2.0

#include "rsbb/mccormick.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>

namespace rsbb {

namespace {

void collect_pairs(const QuadExpr& e, std::map<std::pair<int, int>, int>& pairs) {
  for (const auto& [key, c] : e.bilinear()) {
    if (c != 0.0) pairs.emplace(key, 0);
  }
}

/// Adds `expr` (<= 0 form) as one LP row, substituting aux columns for
/// bilinear terms.
void add_linearized_row(const QuadExpr& expr,
                        const std::map<std::pair<int, int>, int>& pair_index,
                        LinearProgram& lp) {
  std::map<int, double> coef;
  for (const auto& [i, c] : expr.linear()) coef[i] += c;
  for (const auto& [key, c] : expr.bilinear()) coef[pair_index.at(key)] += c;
  LinearProgram::Row row;
  row.terms.assign(coef.begin(), coef.end());
  row.lower = -kInf;
  row.upper = -expr.constant();
  lp.add_row(std::move(row));
}

}  // namespace

RelaxedLp relax(const QcqpProblem& problem, const VariableBox& box,
                const SampleStore& store, [[maybe_unused]] const UncertaintySet& set) {
  RelaxedLp out;
  out.n_orig = problem.n_vars;

  std::map<std::pair<int, int>, int> pairs;
  collect_pairs(problem.objective, pairs);
  for (const auto& c : problem.certain_constraints) collect_pairs(c.expr, pairs);
  for (const auto& uc : problem.uncertain_constraints) {
    collect_pairs(uc.base, pairs);
    for (const auto& [k, e] : uc.perturbation_terms) collect_pairs(e, pairs);
  }

  // Original columns over the node box, then one aux column per pair bounded
  // by the extreme corner products.
  for (int i = 0; i < problem.n_vars; ++i) {
    out.lp.add_var(box.lower[i], box.upper[i], 0.0);
  }
  for (auto& [key, col] : pairs) {
    const auto [b, j] = key;
    const double lb = box.lower[b], ub = box.upper[b];
    const double lj = box.lower[j], uj = box.upper[j];
    double lo, hi;
    if (b == j) {
      hi = std::max(lb * lb, ub * ub);
      lo = (lb <= 0.0 && ub >= 0.0) ? 0.0 : std::min(lb * lb, ub * ub);
    } else {
      const double p[4] = {lb * lj, lb * uj, ub * lj, ub * uj};
      lo = *std::min_element(p, p + 4);
      hi = *std::max_element(p, p + 4);
    }
    col = out.lp.add_var(lo, hi, 0.0);
    out.pairs.push_back(key);
  }
  out.pair_index = pairs;

  // Objective.
  out.obj_constant = problem.objective.constant();
  for (const auto& [i, c] : problem.objective.linear()) out.lp.cost[i] += c;
  for (const auto& [key, c] : problem.objective.bilinear())
    out.lp.cost[pairs.at(key)] += c;

  // Certain rows.
  for (const auto& c : problem.certain_constraints)
    add_linearized_row(c.expr, pairs, out.lp);

  // One row per (uncertain constraint, stored sample).
  for (std::size_t ci = 0; ci < problem.uncertain_constraints.size(); ++ci) {
    const auto& uc = problem.uncertain_constraints[ci];
    for (const auto& xi : store.samples(ci)) {
      assert(set.contains(xi, 1e-6));
      QuadExpr inst = uc.base;
      for (const auto& [k, e] : uc.perturbation_terms) {
        if (xi[static_cast<std::size_t>(k)] == 0.0) continue;
        QuadExpr scaled = e;
        scaled *= xi[static_cast<std::size_t>(k)];
        inst += scaled;
      }
      add_linearized_row(inst, pairs, out.lp);
    }
  }

  // Four envelope rows per pair; for squares two of them coincide.
  for (const auto& [key, col] : pairs) {
    const auto [b, j] = key;
    const double lb = box.lower[b], ub = box.upper[b];
    const double lj = box.lower[j], uj = box.upper[j];
    auto envelope = [&](double cb, double cj, double rhs, bool under) {
      // under: cb*x_b + cj*x_j - y <= rhs ; over: y - cb*x_b - cj*x_j <= -rhs
      std::map<int, double> coef;
      if (under) {
        coef[b] += cb;
        coef[j] += cj;
        coef[col] -= 1.0;
      } else {
        coef[col] += 1.0;
        coef[b] -= cb;
        coef[j] -= cj;
      }
      LinearProgram::Row row;
      row.terms.assign(coef.begin(), coef.end());
      row.lower = -kInf;
      row.upper = under ? rhs : -rhs;
      out.lp.add_row(std::move(row));
    };
    envelope(lj, lb, lb * lj, true);    // y >= lb*x_j + lj*x_b - lb*lj
    envelope(lj, ub, ub * lj, false);   // y <= ub*x_j + lj*x_b - ub*lj
    envelope(uj, ub, ub * uj, true);    // y >= ub*x_j + uj*x_b - ub*uj
    envelope(uj, lb, lb * uj, false);   // y <= lb*x_j + uj*x_b - lb*uj
  }

  return out;
}

std::map<std::pair<int, int>, double> approximation_errors(
    std::span<const double> lp_solution,
    const std::map<std::pair<int, int>, int>& pair_index) {
  std::map<std::pair<int, int>, double> errors;
  for (const auto& [key, col] : pair_index) {
    const auto [b, j] = key;
    errors[key] = std::abs(lp_solution[col] - lp_solution[b] * lp_solution[j]);
  }
  return errors;
}

double relaxed_objective(const RelaxedLp& rlp, const LpOutcome& outcome) {
  return outcome.objective + rlp.obj_constant;
}

}  // namespace rsbb
