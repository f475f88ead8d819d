// SPDX-License-Identifier: Apache-2.0

#include "rsbb/uncertainty.hpp"

#include <algorithm>
#include <cmath>

namespace rsbb {

std::string to_string(SetKind kind) {
  switch (kind) {
    case SetKind::Box: return "box";
    case SetKind::Ellipsoidal: return "ellipsoidal";
    case SetKind::Polyhedral: return "polyhedral";
  }
  return "?";
}

SetKind set_kind_from_string(const std::string& s) {
  if (s == "box") return SetKind::Box;
  if (s == "ellipsoidal") return SetKind::Ellipsoidal;
  if (s == "polyhedral") return SetKind::Polyhedral;
  throw std::invalid_argument("unknown uncertainty set kind: " + s);
}

bool UncertaintySet::contains(std::span<const double> xi, double tol) const {
  switch (kind) {
    case SetKind::Box: {
      for (double v : xi)
        if (std::abs(v) > size + tol) return false;
      return true;
    }
    case SetKind::Ellipsoidal: {
      double s = 0.0;
      for (double v : xi) s += v * v;
      return std::sqrt(s) <= size + tol;
    }
    case SetKind::Polyhedral: {
      double s = 0.0;
      for (double v : xi) s += std::abs(v);
      return s <= size + tol;
    }
  }
  return false;
}

WorstCase worst_case(double a0, std::span<const double> a,
                     const UncertaintySet& set) {
  if (static_cast<int>(a.size()) != set.dim) {
    throw std::invalid_argument("worst_case: coefficient dimension mismatch");
  }
  if (!(set.size > 0.0)) {
    throw std::invalid_argument("worst_case: nonpositive set size");
  }
  WorstCase wc;
  wc.xi_star.assign(a.size(), 0.0);
  switch (set.kind) {
    case SetKind::Box: {
      double sum = 0.0;
      for (std::size_t k = 0; k < a.size(); ++k) {
        sum += std::abs(a[k]);
        if (a[k] > 0.0)
          wc.xi_star[k] = set.size;
        else if (a[k] < 0.0)
          wc.xi_star[k] = -set.size;
      }
      wc.value = a0 + set.size * sum;
      break;
    }
    case SetKind::Ellipsoidal: {
      double norm = 0.0;
      for (double v : a) norm += v * v;
      norm = std::sqrt(norm);
      if (norm > 0.0) {
        for (std::size_t k = 0; k < a.size(); ++k)
          wc.xi_star[k] = set.size * a[k] / norm;
      }
      wc.value = a0 + set.size * norm;
      break;
    }
    case SetKind::Polyhedral: {
      std::size_t m = 0;
      double best = -1.0;
      for (std::size_t k = 0; k < a.size(); ++k) {
        if (std::abs(a[k]) > best) {  // strict: lowest index wins ties
          best = std::abs(a[k]);
          m = k;
        }
      }
      if (!a.empty() && best > 0.0) {
        wc.xi_star[m] = a[m] > 0.0 ? set.size : -set.size;
        wc.value = a0 + set.size * best;
      } else {
        wc.value = a0;
      }
      break;
    }
  }
  return wc;
}

void extract_affine(const UncertainConstraint& c, std::span<const double> point,
                    int xi_dim, double& a0, std::vector<double>& a) {
  a0 = eval_expr(c.base, point);
  a.assign(static_cast<std::size_t>(xi_dim), 0.0);
  for (const auto& [k, expr] : c.perturbation_terms) {
    a[static_cast<std::size_t>(k)] += eval_expr(expr, point);
  }
}

SampleStore SampleStore::for_problem(const QcqpProblem& problem) {
  SampleStore store;
  store.samples_.resize(problem.uncertain_constraints.size());
  for (std::size_t i = 0; i < store.samples_.size(); ++i) {
    const int dim = problem.xi_dim_of(problem.uncertain_constraints[i]);
    store.samples_[i].push_back(std::vector<double>(dim, 0.0));  // nominal
  }
  return store;
}

bool SampleStore::add_sample(std::size_t constraint_id, std::span<const double> xi,
                             const UncertaintySet& set) {
  if (!set.contains(xi, kDuplicateTol)) {
    throw std::domain_error("add_sample: xi outside the uncertainty set");
  }
  auto& list = samples_.at(constraint_id);
  for (const auto& existing : list) {
    if (existing.size() != xi.size()) continue;
    double dist = 0.0;
    for (std::size_t k = 0; k < xi.size(); ++k) {
      dist = std::max(dist, std::abs(existing[k] - xi[k]));
    }
    if (dist <= kDuplicateTol) return false;
  }
  list.emplace_back(xi.begin(), xi.end());
  return true;
}

std::size_t SampleStore::total_samples() const {
  std::size_t n = 0;
  for (const auto& list : samples_) n += list.size();
  return n;
}

namespace {

/// Interval range of a QuadExpr over a box (standard interval arithmetic;
/// exact for linear terms, corner-product enclosure for bilinear ones).
std::pair<double, double> expr_range(const QuadExpr& e, const VariableBox& box) {
  double lo = e.constant(), hi = e.constant();
  for (const auto& [i, c] : e.linear()) {
    const double a = c * box.lower[i], b = c * box.upper[i];
    lo += std::min(a, b);
    hi += std::max(a, b);
  }
  for (const auto& [key, c] : e.bilinear()) {
    const auto [b, j] = key;
    const double p[4] = {box.lower[b] * box.lower[j], box.lower[b] * box.upper[j],
                         box.upper[b] * box.lower[j], box.upper[b] * box.upper[j]};
    double pmin = p[0], pmax = p[0];
    if (b == j) {
      // square term: range of x^2 over [l, u]
      const double l = box.lower[b], u = box.upper[b];
      pmax = std::max(l * l, u * u);
      pmin = (l <= 0.0 && u >= 0.0) ? 0.0 : std::min(l * l, u * u);
    } else {
      for (double v : p) {
        pmin = std::min(pmin, v);
        pmax = std::max(pmax, v);
      }
    }
    lo += std::min(c * pmin, c * pmax);
    hi += std::max(c * pmin, c * pmax);
  }
  return {lo, hi};
}

}  // namespace

DualRows dual_rho_rows(const UncertainConstraint& c, const UncertaintySet& set,
                       const VariableBox& box, int epigraph_var) {
  if (set.kind == SetKind::Ellipsoidal) throw EllipsoidalNotRepresentableError();

  // Orient every perturbation so that |pert_k| = sign_k * pert_k over the box.
  std::vector<QuadExpr> magnitudes;
  magnitudes.reserve(c.perturbation_terms.size());
  for (const auto& [k, expr] : c.perturbation_terms) {
    auto [lo, hi] = expr_range(expr, box);
    if (lo >= -1e-12) {
      magnitudes.push_back(expr);
    } else if (hi <= 1e-12) {
      magnitudes.push_back(expr.negated());
    } else {
      throw SignAmbiguousError("dual_rho_rows: perturbation term for xi[" +
                               std::to_string(k) +
                               "] changes sign over the variable box");
    }
  }

  DualRows out;
  switch (set.kind) {
    case SetKind::Box: {
      QuadExpr row = c.base;
      for (auto& m : magnitudes) {
        QuadExpr scaled = m;
        scaled *= set.size;
        row += scaled;
      }
      row.canonicalize();
      out.rows.push_back(std::move(row));
      break;
    }
    case SetKind::Polyhedral: {
      out.needs_epigraph = true;
      if (epigraph_var < 0) {
        throw std::invalid_argument("dual_rho_rows: polyhedral set needs an epigraph variable");
      }
      for (auto& m : magnitudes) {
        QuadExpr row = m;
        row.add_linear(epigraph_var, -1.0);
        row.canonicalize();
        out.rows.push_back(std::move(row));
      }
      QuadExpr row = c.base;
      row.add_linear(epigraph_var, set.size);
      row.canonicalize();
      out.rows.push_back(std::move(row));
      break;
    }
    case SetKind::Ellipsoidal:
      break;  // unreachable
  }
  return out;
}

}  // namespace rsbb
