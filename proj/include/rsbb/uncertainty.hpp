// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "rsbb/expr.hpp"

namespace rsbb {

enum class SetKind { Box, Ellipsoidal, Polyhedral };

std::string to_string(SetKind kind);
SetKind set_kind_from_string(const std::string& s);

/// Convex uncertainty set for a dimensionless, zero-centered xi vector.
/// Box: |xi_k| <= size (inf-norm ball), Ellipsoidal: ||xi||_2 <= size,
/// Polyhedral: ||xi||_1 <= size (budget set).
struct UncertaintySet {
  SetKind kind = SetKind::Box;
  double size = 1.0;
  int dim = 1;

  bool contains(std::span<const double> xi, double tol = 1e-9) const;
};

struct WorstCase {
  std::vector<double> xi_star;
  double value = 0.0;
};

/// Exact maximizer of a0 + a^T xi over the set. Closed forms:
///   Box:        a0 + size * sum |a_k|,   xi*_k = size * sign(a_k)
///   Ellipsoid:  a0 + size * ||a||_2,     xi* = size * a / ||a||_2
///   Polyhedral: a0 + size * max |a_k|,   xi* = size * sign(a_m) e_m,
///               m = argmax |a_k| (lowest index wins ties)
WorstCase worst_case(double a0, std::span<const double> a,
                     const UncertaintySet& set);

/// Affine-in-xi view of an uncertain constraint at a fixed point:
/// a0 = base(point), a_k = perturbation_k(point).
void extract_affine(const UncertainConstraint& c, std::span<const double> point,
                    int xi_dim, double& a0, std::vector<double>& a);

/// Per-constraint lists of sampled xi vectors. The first entry is always the
/// nominal xi = 0; duplicates within 1e-9 (sup-norm) are rejected.
class SampleStore {
 public:
  SampleStore() = default;

  /// One empty-but-nominal list per uncertain constraint of `problem`.
  static SampleStore for_problem(const QcqpProblem& problem);

  std::size_t num_constraints() const { return samples_.size(); }
  const std::vector<std::vector<double>>& samples(std::size_t constraint_id) const {
    return samples_.at(constraint_id);
  }

  /// Appends xi unless a duplicate exists. Returns true iff added.
  /// Throws std::domain_error if xi lies outside `set` (beyond 1e-9).
  bool add_sample(std::size_t constraint_id, std::span<const double> xi,
                  const UncertaintySet& set);

  std::size_t total_samples() const;

  static constexpr double kDuplicateTol = 1e-9;

 private:
  std::vector<std::vector<std::vector<double>>> samples_;
};

struct EllipsoidalNotRepresentableError : std::domain_error {
  EllipsoidalNotRepresentableError()
      : std::domain_error(
            "ellipsoidal dual counterpart is not bilinear-representable") {}
};

struct SignAmbiguousError : std::domain_error {
  explicit SignAmbiguousError(const std::string& what) : std::domain_error(what) {}
};

/// Deterministic counterpart rows for one uncertain constraint. Box yields a
/// single row base + size * sum_k |pert_k| <= 0 with |.| dropped because each
/// perturbation keeps one sign over the box. Polyhedral introduces one
/// epigraph variable t (rows |pert_k| - t <= 0 for all k, then
/// base + size * t <= 0). Requesting an epigraph variable is communicated via
/// `aux_request`: the caller allocates it and passes its index.
struct DualRows {
  bool needs_epigraph = false;
  /// Rows in <= 0 form over the original variables plus (for polyhedral) the
  /// epigraph variable appended by the caller at index `epigraph_var`.
  std::vector<QuadExpr> rows;
};

/// Builds the rows. For polyhedral, `epigraph_var` must be a valid fresh
/// variable index; for box it is ignored. `box` is the variable domain used
/// to certify perturbation sign-constancy (coefficient test; all terms of a
/// perturbation must share one sign given nonnegative variables).
DualRows dual_rho_rows(const UncertainConstraint& c, const UncertaintySet& set,
                       const VariableBox& box, int epigraph_var);

}  // namespace rsbb
