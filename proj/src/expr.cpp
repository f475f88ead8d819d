// SPDX-License-Identifier: Apache-2.0

#include "rsbb/expr.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rsbb {

bool VariableBox::contains(std::span<const double> x, double tol) const {
  if (x.size() != lower.size()) return false;
  for (std::size_t i = 0; i < lower.size(); ++i) {
    if (x[i] < lower[i] - tol || x[i] > upper[i] + tol) return false;
  }
  return true;
}

VariableBox VariableBox::restricted(std::size_t i, double lo, double hi) const {
  VariableBox b = *this;
  b.lower[i] = std::max(b.lower[i], lo);
  b.upper[i] = std::min(b.upper[i], hi);
  return b;
}

void QuadExpr::add_linear(int var, double coef) {
  if (coef == 0.0) return;
  linear_[var] += coef;
}

void QuadExpr::add_bilinear(int var_b, int var_j, double coef) {
  if (coef == 0.0) return;
  if (var_b > var_j) std::swap(var_b, var_j);
  bilinear_[{var_b, var_j}] += coef;
}

bool QuadExpr::empty() const {
  return constant_ == 0.0 && linear_.empty() && bilinear_.empty();
}

int QuadExpr::max_var_index() const {
  int mx = -1;
  if (!linear_.empty()) mx = std::max(mx, linear_.rbegin()->first);
  for (const auto& [key, c] : bilinear_) mx = std::max(mx, key.second);
  return mx;
}

void QuadExpr::canonicalize() {
  std::erase_if(linear_, [](const auto& kv) { return kv.second == 0.0; });
  std::erase_if(bilinear_, [](const auto& kv) { return kv.second == 0.0; });
}

double QuadExpr::eval(std::span<const double> x) const {
  double v = constant_;
  for (const auto& [i, c] : linear_) v += c * x[i];
  for (const auto& [key, c] : bilinear_) v += c * x[key.first] * x[key.second];
  return v;
}

void QuadExpr::add_gradient(std::span<const double> x, double scale,
                            std::span<double> grad) const {
  for (const auto& [i, c] : linear_) grad[i] += scale * c;
  for (const auto& [key, c] : bilinear_) {
    const auto [b, j] = key;
    if (b == j) {
      grad[b] += scale * 2.0 * c * x[b];
    } else {
      grad[b] += scale * c * x[j];
      grad[j] += scale * c * x[b];
    }
  }
}

void QuadExpr::linearize_at(std::span<const double> x0, double& c0,
                            std::vector<double>& coef) const {
  coef.assign(x0.size(), 0.0);
  add_gradient(x0, 1.0, coef);
  double gx = 0.0;
  for (std::size_t i = 0; i < coef.size(); ++i) gx += coef[i] * x0[i];
  c0 = eval(x0) - gx;
}

QuadExpr& QuadExpr::operator*=(double s) {
  constant_ *= s;
  for (auto& [i, c] : linear_) c *= s;
  for (auto& [k, c] : bilinear_) c *= s;
  return *this;
}

QuadExpr& QuadExpr::operator+=(const QuadExpr& other) {
  constant_ += other.constant_;
  for (const auto& [i, c] : other.linear_) linear_[i] += c;
  for (const auto& [k, c] : other.bilinear_) bilinear_[k] += c;
  return *this;
}

QuadExpr QuadExpr::negated() const {
  QuadExpr e = *this;
  e *= -1.0;
  return e;
}

int UncertainConstraint::xi_dim() const {
  int mx = -1;
  for (const auto& [k, expr] : perturbation_terms) mx = std::max(mx, k);
  return mx + 1;
}

int QcqpProblem::add_variable(const std::string& name, double lo, double hi) {
  var_names.push_back(name);
  box.lower.push_back(lo);
  box.upper.push_back(hi);
  return n_vars++;
}

void QcqpProblem::add_equality(const QuadExpr& expr, const std::string& name) {
  int tag = 0;
  for (const auto& c : certain_constraints) tag = std::max(tag, c.equality_tag + 1);
  certain_constraints.push_back({expr, tag, name + "/le"});
  certain_constraints.push_back({expr.negated(), tag, name + "/ge"});
}

void QcqpProblem::add_inequality(const QuadExpr& expr, const std::string& name) {
  certain_constraints.push_back({expr, -1, name});
}

int QcqpProblem::xi_dim_of(const UncertainConstraint& c) const {
  auto it = xi_group_dims.find(c.group_id);
  if (it != xi_group_dims.end()) return it->second;
  return c.xi_dim();
}

namespace {

void check_expr_indices(const QuadExpr& e, int n_vars, const std::string& where,
                        std::vector<std::string>& report) {
  if (e.max_var_index() >= n_vars) {
    report.push_back(where + ": index out of range (" +
                     std::to_string(e.max_var_index()) + " >= " +
                     std::to_string(n_vars) + ")");
  }
  for (const auto& [key, c] : e.bilinear()) {
    if (key.first > key.second) {
      report.push_back(where + ": non-canonical bilinear key");
    }
  }
}

}  // namespace

std::vector<std::string> validate(const QcqpProblem& problem) {
  std::vector<std::string> report;
  const auto n = static_cast<std::size_t>(problem.n_vars);
  if (problem.box.lower.size() != n || problem.box.upper.size() != n) {
    report.push_back("box: size mismatch with n_vars");
    return report;
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double lo = problem.box.lower[i];
    const double hi = problem.box.upper[i];
    if (!std::isfinite(lo) || !std::isfinite(hi)) {
      report.push_back("variable " + std::to_string(i) + ": non-compact domain");
    } else if (lo > hi) {
      report.push_back("variable " + std::to_string(i) + ": lower > upper");
    }
  }
  check_expr_indices(problem.objective, problem.n_vars, "objective", report);
  for (std::size_t c = 0; c < problem.certain_constraints.size(); ++c) {
    check_expr_indices(problem.certain_constraints[c].expr, problem.n_vars,
                       "constraint " + std::to_string(c), report);
  }
  for (std::size_t c = 0; c < problem.uncertain_constraints.size(); ++c) {
    const auto& uc = problem.uncertain_constraints[c];
    const std::string where = "uncertain constraint " + std::to_string(c);
    check_expr_indices(uc.base, problem.n_vars, where, report);
    int dim = problem.xi_dim_of(uc);
    for (const auto& [k, expr] : uc.perturbation_terms) {
      check_expr_indices(expr, problem.n_vars, where, report);
      if (k < 0 || k >= dim) report.push_back(where + ": xi index out of range");
    }
  }
  return report;
}

double eval_expr(const QuadExpr& expr, std::span<const double> point) {
  if (expr.max_var_index() >= static_cast<int>(point.size())) {
    throw std::invalid_argument("eval_expr: point dimension mismatch");
  }
  return expr.eval(point);
}

double eval_uncertain(const UncertainConstraint& c, std::span<const double> point,
                      std::span<const double> xi) {
  if (static_cast<int>(xi.size()) < c.xi_dim()) {
    throw std::invalid_argument("eval_uncertain: xi dimension mismatch");
  }
  double v = eval_expr(c.base, point);
  for (const auto& [k, expr] : c.perturbation_terms) {
    if (xi[k] != 0.0) v += xi[k] * eval_expr(expr, point);
  }
  return v;
}

}  // namespace rsbb
