// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace rsbb {

/// Box domain for the decision variables. All bounds must be finite for a
/// well-posed problem (compactness); validate() reports violations.
struct VariableBox {
  std::vector<double> lower;
  std::vector<double> upper;

  VariableBox() = default;
  VariableBox(std::vector<double> lo, std::vector<double> hi)
      : lower(std::move(lo)), upper(std::move(hi)) {}

  std::size_t size() const { return lower.size(); }
  double width(std::size_t i) const { return upper[i] - lower[i]; }
  double midpoint(std::size_t i) const { return 0.5 * (lower[i] + upper[i]); }

  bool contains(std::span<const double> x, double tol = 1e-9) const;

  /// Sub-box with variable `i` restricted to [lo, hi].
  VariableBox restricted(std::size_t i, double lo, double hi) const;
};

/// Quadratic expression: constant + sum of linear terms + sum of bilinear
/// terms. Bilinear keys are canonical (b <= j); b == j encodes a square.
class QuadExpr {
 public:
  using PairKey = std::pair<int, int>;

  QuadExpr() = default;
  explicit QuadExpr(double constant) : constant_(constant) {}

  double constant() const { return constant_; }
  void set_constant(double c) { constant_ = c; }

  void add_constant(double c) { constant_ += c; }
  void add_linear(int var, double coef);
  void add_bilinear(int var_b, int var_j, double coef);

  const std::map<int, double>& linear() const { return linear_; }
  const std::map<PairKey, double>& bilinear() const { return bilinear_; }

  bool is_linear() const { return bilinear_.empty(); }
  bool empty() const;

  /// Largest variable index referenced, or -1 for a constant expression.
  int max_var_index() const;

  /// Drops terms with coefficient exactly zero. Keys are canonical by
  /// construction, so this is idempotent.
  void canonicalize();

  double eval(std::span<const double> x) const;

  /// Gradient accumulated into `grad` (sized n_vars, caller-zeroed or not:
  /// values are += accumulated scaled by `scale`).
  void add_gradient(std::span<const double> x, double scale,
                    std::span<double> grad) const;

  /// f(x0) + grad(x0)^T (x - x0) as (constant, dense coefficient vector).
  void linearize_at(std::span<const double> x0, double& c0,
                    std::vector<double>& coef) const;

  QuadExpr& operator*=(double s);
  QuadExpr& operator+=(const QuadExpr& other);
  QuadExpr negated() const;

 private:
  double constant_ = 0.0;
  std::map<int, double> linear_;
  std::map<PairKey, double> bilinear_;
};

/// Inequality constraint whose coefficients depend affinely on a vector of
/// uncertain parameters xi: base(x) + sum_k xi[k] * perturbation[k](x) <= 0.
/// The nominal realization is xi = 0.
struct UncertainConstraint {
  QuadExpr base;
  std::vector<std::pair<int, QuadExpr>> perturbation_terms;  // (xi index, expr)
  int group_id = 0;
  std::string name;

  /// Number of xi components this constraint references (max index + 1).
  int xi_dim() const;
};

/// Certain constraint expr <= 0. Equalities are stored as two opposing
/// inequalities sharing an equality_tag (>= 0); standalone rows use -1.
struct CertainConstraint {
  QuadExpr expr;
  int equality_tag = -1;
  std::string name;
};

struct QcqpProblem {
  int n_vars = 0;
  VariableBox box;
  QuadExpr objective;  // minimized
  std::vector<CertainConstraint> certain_constraints;
  std::vector<UncertainConstraint> uncertain_constraints;
  std::vector<std::string> var_names;
  std::map<int, int> xi_group_dims;  // group id -> xi dimension

  int add_variable(const std::string& name, double lo, double hi);

  /// Adds expr == 0 as a pair of inequalities with a fresh shared tag.
  void add_equality(const QuadExpr& expr, const std::string& name);

  void add_inequality(const QuadExpr& expr, const std::string& name);

  int xi_dim_of(const UncertainConstraint& c) const;
};

/// Structural validation against the model assumptions: finite bounds,
/// indices in range, canonical expressions. Returns human-readable findings;
/// empty means valid.
std::vector<std::string> validate(const QcqpProblem& problem);

double eval_expr(const QuadExpr& expr, std::span<const double> point);

/// base(x) + sum_k xi[k] * perturbation_k(x). `xi` must have the group's
/// dimension; throws std::invalid_argument on mismatch.
double eval_uncertain(const UncertainConstraint& c, std::span<const double> point,
                      std::span<const double> xi);

}  // namespace rsbb
