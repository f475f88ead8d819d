// SPDX-License-Identifier: Apache-2.0

#include "rsbb/slp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "rsbb/simplex.hpp"

namespace rsbb {

namespace {

/// Sampled problem constraints as plain quadratic rows (<= 0).
std::vector<QuadExpr> gather_constraints(const QcqpProblem& problem,
                                         const SampleStore& store) {
  std::vector<QuadExpr> rows;
  for (const auto& c : problem.certain_constraints) rows.push_back(c.expr);
  for (std::size_t ci = 0; ci < problem.uncertain_constraints.size(); ++ci) {
    const auto& uc = problem.uncertain_constraints[ci];
    for (const auto& xi : store.samples(ci)) {
      QuadExpr inst = uc.base;
      for (const auto& [k, e] : uc.perturbation_terms) {
        if (xi[static_cast<std::size_t>(k)] == 0.0) continue;
        QuadExpr scaled = e;
        scaled *= xi[static_cast<std::size_t>(k)];
        inst += scaled;
      }
      rows.push_back(std::move(inst));
    }
  }
  return rows;
}

double total_violation(const std::vector<QuadExpr>& rows,
                       std::span<const double> x, double* max_viol = nullptr) {
  double sum = 0.0, mx = 0.0;
  for (const auto& g : rows) {
    const double v = std::max(0.0, g.eval(x));
    sum += v;
    mx = std::max(mx, v);
  }
  if (max_viol) *max_viol = mx;
  return sum;
}

}  // namespace

LocalOutcome solve_local(const QcqpProblem& problem, const VariableBox& box,
                         const SampleStore& store, std::span<const double> start,
                         const SlpOptions& options) {
  const int n = problem.n_vars;
  if (static_cast<int>(start.size()) != n) {
    throw std::invalid_argument("solve_local: start dimension mismatch");
  }

  const std::vector<QuadExpr> rows = gather_constraints(problem, store);
  const int m = static_cast<int>(rows.size());

  // Project the start into the box.
  std::vector<double> x(start.begin(), start.end());
  for (int i = 0; i < n; ++i) x[i] = std::clamp(x[i], box.lower[i], box.upper[i]);

  LocalOutcome out;

  // Degenerate box: nothing to optimize.
  double max_width = 0.0;
  for (int i = 0; i < n; ++i) max_width = std::max(max_width, box.width(i));
  if (max_width < 1e-12) {
    out.point = x;
    out.objective = problem.objective.eval(x);
    total_violation(rows, x, &out.max_violation);
    out.status = out.max_violation <= options.feas_tol ? LocalStatus::LocalOptimal
                                                       : LocalStatus::InfeasiblePoint;
    return out;
  }

  std::vector<double> trust(n);
  for (int i = 0; i < n; ++i) trust[i] = options.trust_init_frac * box.width(i);

  double mu = 10.0 * (1.0 + std::abs(problem.objective.eval(x)));
  double viol_sum = total_violation(rows, x);
  double merit = problem.objective.eval(x) + mu * viol_sum;
  double prev_viol = viol_sum;
  int stagnant_infeasible = 0;

  std::vector<double> grad_obj(n), grad_row(n);
  SimplexSolver lp_solver;
  Basis warm;
  bool have_warm = false;

  for (int iter = 0; iter < options.max_iterations; ++iter) {
    double trust_max = 0.0;
    for (int i = 0; i < n; ++i) trust_max = std::max(trust_max, trust[i]);
    if (trust_max < options.trust_min) break;  // stationary

    // LP in the step d with one violation slack per constraint:
    //   min grad_f.d + mu * sum s   s.t.  g_i(x) + grad_g_i.d - s_i <= 0.
    LinearProgram lp;
    for (int i = 0; i < n; ++i) {
      const double lo = std::max(box.lower[i] - x[i], -trust[i]);
      const double hi = std::min(box.upper[i] - x[i], trust[i]);
      lp.add_var(std::min(lo, 0.0), std::max(hi, 0.0), 0.0);
    }
    std::fill(grad_obj.begin(), grad_obj.end(), 0.0);
    problem.objective.add_gradient(x, 1.0, grad_obj);
    for (int i = 0; i < n; ++i) lp.cost[i] = grad_obj[i];
    for (int r = 0; r < m; ++r) {
      const int slack = lp.add_var(0.0, kInf, mu);
      std::fill(grad_row.begin(), grad_row.end(), 0.0);
      rows[r].add_gradient(x, 1.0, grad_row);
      LinearProgram::Row row;
      for (int i = 0; i < n; ++i) {
        // Gradient entries below 1e-9 are evaluation noise at near-zero
        // variables; keeping them only degrades the LP basis conditioning.
        if (std::abs(grad_row[i]) > 1e-9) row.terms.push_back({i, grad_row[i]});
      }
      row.terms.push_back({slack, -1.0});
      row.lower = -kInf;
      row.upper = -rows[r].eval(x);
      lp.add_row(std::move(row));
    }

    const LpOutcome sol = lp_solver.solve(lp, have_warm ? &warm : nullptr);
    if (sol.status != LpStatus::Optimal) {
      // The slack formulation is always feasible; treat solver trouble as a stall.
      out.status = LocalStatus::StallLimit;
      break;
    }
    warm = sol.basis;
    have_warm = true;

    const double fx = problem.objective.eval(x);
    double model_slacks = 0.0;
    for (int r = 0; r < m; ++r) model_slacks += sol.point[n + r];
    double grad_dot = 0.0;
    for (int i = 0; i < n; ++i) grad_dot += grad_obj[i] * sol.point[i];
    const double model_merit = fx + grad_dot + mu * model_slacks;
    const double predicted = merit - model_merit;

    if (predicted <= 1e-12 * (1.0 + std::abs(merit))) {
      // No linearized descent within the trust box.
      if (viol_sum > options.feas_tol && model_slacks > 0.5 * viol_sum && mu < options.penalty_cap) {
        mu = std::min(mu * 2.0, options.penalty_cap);
        merit = fx + mu * viol_sum;
        continue;
      }
      for (int i = 0; i < n; ++i) trust[i] *= options.trust_shrink;
      continue;
    }

    std::vector<double> cand(x);
    for (int i = 0; i < n; ++i) {
      cand[i] = std::clamp(x[i] + sol.point[i], box.lower[i], box.upper[i]);
    }
    const double cand_viol = total_violation(rows, cand);
    const double cand_merit = problem.objective.eval(cand) + mu * cand_viol;
    const double actual = merit - cand_merit;
    const double ratio = actual / predicted;

    MeritLogEntry log{iter, merit, cand_merit, mu, false};
    if (actual > 0.0) {
      log.accepted = true;
      x = cand;
      viol_sum = cand_viol;
      merit = cand_merit;
      if (ratio > options.expand_ratio) {
        for (int i = 0; i < n; ++i)
          trust[i] = std::min(trust[i] * options.trust_expand, box.width(i));
      } else if (actual < 1e-10 * (1.0 + std::abs(merit))) {
        // Accepted but essentially stalled; force the trust region down so the
        // stationarity test can fire instead of dribbling to the iteration cap.
        for (int i = 0; i < n; ++i) trust[i] *= options.trust_shrink;
      }
      // Persistent infeasibility: violations not shrinking under this penalty.
      if (viol_sum > options.feas_tol && viol_sum > 0.9 * prev_viol) {
        if (++stagnant_infeasible >= 3 && mu < options.penalty_cap) {
          mu = std::min(mu * 2.0, options.penalty_cap);
          merit = problem.objective.eval(x) + mu * viol_sum;
          stagnant_infeasible = 0;
        }
      } else {
        stagnant_infeasible = 0;
      }
      prev_viol = viol_sum;
    } else {
      for (int i = 0; i < n; ++i) trust[i] *= options.trust_shrink;
    }
    out.merit_log.push_back(log);
  }

  out.point = x;
  out.objective = problem.objective.eval(x);
  total_violation(rows, x, &out.max_violation);
  double trust_max = 0.0;
  for (int i = 0; i < n; ++i) trust_max = std::max(trust_max, trust[i]);
  const bool stationary = trust_max < options.trust_min;
  if (out.max_violation <= options.feas_tol) {
    out.status = stationary ? LocalStatus::LocalOptimal : LocalStatus::StallLimit;
  } else {
    out.status = stationary ? LocalStatus::InfeasiblePoint : LocalStatus::StallLimit;
  }
  return out;
}

LocalOutcome solve_local_multistart(const QcqpProblem& problem,
                                    const VariableBox& box,
                                    const SampleStore& store,
                                    const std::vector<std::vector<double>>& starts,
                                    const SlpOptions& options) {
  LocalOutcome best;
  bool have_best = false;
  for (const auto& s : starts) {
    LocalOutcome r = solve_local(problem, box, store, s, options);
    if (!have_best) {
      best = r;
      have_best = true;
      continue;
    }
    const bool r_feas = r.status == LocalStatus::LocalOptimal;
    const bool b_feas = best.status == LocalStatus::LocalOptimal;
    if (r_feas && (!b_feas || r.objective < best.objective - 1e-12)) {
      best = r;
    } else if (!r_feas && !b_feas && r.max_violation < best.max_violation) {
      best = r;
    }
  }
  if (!have_best) throw std::invalid_argument("solve_local_multistart: no starts");
  return best;
}

}  // namespace rsbb
