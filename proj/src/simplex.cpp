// SPDX-License-Identifier: Apache-2.0

#include "rsbb/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <cstdlib>
#include <cstdio>
#include <stdexcept>

namespace rsbb {

int LinearProgram::add_var(double lo, double hi, double c) {
  lower.push_back(lo);
  upper.push_back(hi);
  cost.push_back(c);
  return num_vars++;
}

void LinearProgram::add_row_le(std::vector<std::pair<int, double>> terms, double rhs) {
  rows.push_back({std::move(terms), -kInf, rhs});
}

void LinearProgram::add_row_range(std::vector<std::pair<int, double>> terms,
                                  double lo, double hi) {
  rows.push_back({std::move(terms), lo, hi});
}

namespace {

// Working state for one solve. Columns 0..n-1 are structural, n..n+m-1 are
// row logicals s_r with a_r^T x + s_r = 0, s_r in [-row.upper, -row.lower].
struct Work {
  int n = 0;  // structural
  int m = 0;  // rows
  int total = 0;

  std::vector<double> dense;  // m x n structural matrix, row-major
  std::vector<double> lo, hi, cost;

  std::vector<int> basis;              // size m, column index per basis slot
  std::vector<int> position;           // column -> basis slot or -1
  std::vector<unsigned char> at_upper; // nonbasic bound flag
  std::vector<double> value;           // all columns

  std::vector<double> binv;  // m x m, row-major

  double a(int r, int c) const {
    return c < n ? dense[static_cast<std::size_t>(r) * n + c] : (c - n == r ? 1.0 : 0.0);
  }

  void column(int c, std::vector<double>& out) const {
    out.assign(m, 0.0);
    if (c < n) {
      for (int r = 0; r < m; ++r) out[r] = dense[static_cast<std::size_t>(r) * n + c];
    } else {
      out[c - n] = 1.0;
    }
  }
};

// Dense inversion of the basis matrix via Gauss-Jordan with partial pivoting.
// Returns false on singularity.
bool invert_basis(const Work& w, std::vector<double>& binv) {
  const int m = w.m;
  std::vector<double> mat(static_cast<std::size_t>(m) * m, 0.0);
  for (int slot = 0; slot < m; ++slot) {
    const int c = w.basis[slot];
    if (c < w.n) {
      for (int r = 0; r < m; ++r)
        mat[static_cast<std::size_t>(r) * m + slot] = w.dense[static_cast<std::size_t>(r) * w.n + c];
    } else {
      mat[static_cast<std::size_t>(c - w.n) * m + slot] = 1.0;
    }
  }
  binv.assign(static_cast<std::size_t>(m) * m, 0.0);
  for (int i = 0; i < m; ++i) binv[static_cast<std::size_t>(i) * m + i] = 1.0;

  for (int col = 0; col < m; ++col) {
    int piv = col;
    double best = std::abs(mat[static_cast<std::size_t>(col) * m + col]);
    for (int r = col + 1; r < m; ++r) {
      const double v = std::abs(mat[static_cast<std::size_t>(r) * m + col]);
      if (v > best) {
        best = v;
        piv = r;
      }
    }
    if (best < 1e-12) return false;
    if (piv != col) {
      for (int k = 0; k < m; ++k) {
        std::swap(mat[static_cast<std::size_t>(piv) * m + k], mat[static_cast<std::size_t>(col) * m + k]);
        std::swap(binv[static_cast<std::size_t>(piv) * m + k], binv[static_cast<std::size_t>(col) * m + k]);
      }
    }
    const double d = mat[static_cast<std::size_t>(col) * m + col];
    for (int k = 0; k < m; ++k) {
      mat[static_cast<std::size_t>(col) * m + k] /= d;
      binv[static_cast<std::size_t>(col) * m + k] /= d;
    }
    for (int r = 0; r < m; ++r) {
      if (r == col) continue;
      const double f = mat[static_cast<std::size_t>(r) * m + col];
      if (f == 0.0) continue;
      for (int k = 0; k < m; ++k) {
        mat[static_cast<std::size_t>(r) * m + k] -= f * mat[static_cast<std::size_t>(col) * m + k];
        binv[static_cast<std::size_t>(r) * m + k] -= f * binv[static_cast<std::size_t>(col) * m + k];
      }
    }
  }
  return true;
}

// Replaces linearly dependent basis columns with logicals of rows no pivot
// reached, kicking the displaced columns to their nearer bound. Returns false
// when no consistent replacement exists.
bool repair_basis(Work& w) {
  const int m = w.m;
  std::vector<double> mat(static_cast<std::size_t>(m) * m, 0.0);
  for (int slot = 0; slot < m; ++slot) {
    const int c = w.basis[slot];
    if (c < w.n) {
      for (int r = 0; r < m; ++r)
        mat[static_cast<std::size_t>(r) * m + slot] = w.dense[static_cast<std::size_t>(r) * w.n + c];
    } else {
      mat[static_cast<std::size_t>(c - w.n) * m + slot] = 1.0;
    }
  }
  std::vector<char> row_used(m, 0);
  std::vector<int> defective;
  for (int col = 0; col < m; ++col) {
    int piv = -1;
    double best = 1e-9;
    for (int r = 0; r < m; ++r) {
      if (!row_used[r] && std::abs(mat[static_cast<std::size_t>(r) * m + col]) > best) {
        best = std::abs(mat[static_cast<std::size_t>(r) * m + col]);
        piv = r;
      }
    }
    if (piv < 0) {
      defective.push_back(col);
      continue;
    }
    row_used[piv] = 1;
    const double d = mat[static_cast<std::size_t>(piv) * m + col];
    for (int r = 0; r < m; ++r) {
      if (r == piv) continue;
      const double f = mat[static_cast<std::size_t>(r) * m + col] / d;
      if (f == 0.0) continue;
      for (int k = col; k < m; ++k) {
        mat[static_cast<std::size_t>(r) * m + k] -= f * mat[static_cast<std::size_t>(piv) * m + k];
      }
    }
  }
  if (defective.empty()) return false;
  std::vector<int> unused;
  for (int r = 0; r < m; ++r)
    if (!row_used[r]) unused.push_back(r);
  std::size_t u = 0;
  for (const int slot : defective) {
    int row = -1;
    while (u < unused.size()) {
      const int cand = unused[u++];
      if (w.position[w.n + cand] < 0) {
        row = cand;
        break;
      }
    }
    if (row < 0) return false;
    const int out = w.basis[slot];
    w.basis[slot] = w.n + row;
    w.position[w.n + row] = slot;
    w.position[out] = -1;
    const double lo = w.lo[out], hi = w.hi[out];
    bool upper;
    if (std::isfinite(lo) && std::isfinite(hi)) {
      upper = std::abs(w.value[out] - hi) < std::abs(w.value[out] - lo);
    } else if (std::isfinite(lo)) {
      upper = false;
    } else if (std::isfinite(hi)) {
      upper = true;
    } else {
      upper = false;
    }
    w.at_upper[out] = upper ? 1 : 0;
    w.value[out] = upper ? hi : (std::isfinite(lo) ? lo : 0.0);
  }
  return true;
}

// Recomputes basic values from the nonbasic bound values: x_B = -Binv * A_N x_N.
void recompute_basics(Work& w) {
  std::vector<double> rhs(w.m, 0.0);
  for (int c = 0; c < w.total; ++c) {
    if (w.position[c] >= 0) continue;
    const double v = w.value[c];
    if (v == 0.0) continue;
    if (c < w.n) {
      for (int r = 0; r < w.m; ++r) rhs[r] -= w.dense[static_cast<std::size_t>(r) * w.n + c] * v;
    } else {
      rhs[c - w.n] -= v;
    }
  }
  for (int slot = 0; slot < w.m; ++slot) {
    double v = 0.0;
    const double* row = &w.binv[static_cast<std::size_t>(slot) * w.m];
    for (int r = 0; r < w.m; ++r) v += row[r] * rhs[r];
    w.value[w.basis[slot]] = v;
  }
}

double infeasibility(const Work& w, double tol) {
  double sum = 0.0;
  for (int slot = 0; slot < w.m; ++slot) {
    const int c = w.basis[slot];
    const double v = w.value[c];
    if (v < w.lo[c] - tol) sum += w.lo[c] - v;
    else if (v > w.hi[c] + tol) sum += v - w.hi[c];
  }
  return sum;
}

}  // namespace

LpOutcome SimplexSolver::solve(const LinearProgram& lp, const Basis* warm_start) {
  Work w;
  w.n = lp.num_vars;
  w.m = static_cast<int>(lp.rows.size());
  w.total = w.n + w.m;

  w.dense.assign(static_cast<std::size_t>(w.m) * w.n, 0.0);
  for (int r = 0; r < w.m; ++r) {
    for (const auto& [c, v] : lp.rows[r].terms) {
      if (c < 0 || c >= w.n) throw std::invalid_argument("simplex: bad column index in row");
      w.dense[static_cast<std::size_t>(r) * w.n + c] += v;
    }
  }
  // Row equilibration: scale each row to unit max coefficient. Only the
  // logical columns see the scaling (s_r = -a_r.x / k_r); structural values
  // are untouched and callers never observe it.
  std::vector<double> row_scale(w.m, 1.0);
  for (int r = 0; r < w.m; ++r) {
    double mx = 0.0;
    for (int c = 0; c < w.n; ++c)
      mx = std::max(mx, std::abs(w.dense[static_cast<std::size_t>(r) * w.n + c]));
    if (mx > 1e-12) {
      row_scale[r] = 1.0 / mx;
      for (int c = 0; c < w.n; ++c)
        w.dense[static_cast<std::size_t>(r) * w.n + c] *= row_scale[r];
    }
  }
  w.lo = lp.lower;
  w.hi = lp.upper;
  w.cost = lp.cost;
  w.lo.resize(w.total);
  w.hi.resize(w.total);
  w.cost.resize(w.total, 0.0);
  for (int r = 0; r < w.m; ++r) {
    w.lo[w.n + r] = -lp.rows[r].upper * row_scale[r];
    w.hi[w.n + r] = -lp.rows[r].lower * row_scale[r];
  }

  w.position.assign(w.total, -1);
  w.at_upper.assign(w.total, 0);
  w.value.assign(w.total, 0.0);

  const bool warm = warm_start != nullptr &&
                    static_cast<int>(warm_start->basic.size()) == w.m &&
                    static_cast<int>(warm_start->at_upper.size()) == w.total;
  if (warm) {
    w.basis = warm_start->basic;
    for (int slot = 0; slot < w.m; ++slot) {
      const int c = w.basis[slot];
      if (c < 0 || c >= w.total || w.position[c] >= 0) {
        throw std::invalid_argument("simplex: invalid warm-start basis");
      }
      w.position[c] = slot;
    }
    w.at_upper = warm_start->at_upper;
  } else {
    w.basis.resize(w.m);
    for (int r = 0; r < w.m; ++r) {
      w.basis[r] = w.n + r;
      w.position[w.n + r] = r;
    }
  }

  // Nonbasic columns rest on the bound nearest zero (deterministic choice).
  for (int c = 0; c < w.total; ++c) {
    if (w.position[c] >= 0) continue;
    const double lo = w.lo[c], hi = w.hi[c];
    bool upper;
    if (std::isfinite(lo) && std::isfinite(hi)) {
      upper = warm ? (w.at_upper[c] != 0) : std::abs(hi) < std::abs(lo);
    } else if (std::isfinite(lo)) {
      upper = false;
    } else if (std::isfinite(hi)) {
      upper = true;
    } else {
      upper = false;  // free at zero
    }
    w.at_upper[c] = upper ? 1 : 0;
    w.value[c] = upper ? hi : (std::isfinite(lo) ? lo : 0.0);
  }

  // Resets to the all-logical basis with structurals at their near-zero
  // bound; used at start and as a deterministic recovery from numerical
  // basis degeneration.
  const auto reset_basis = [&w]() {
    w.position.assign(w.total, -1);
    for (int r = 0; r < w.m; ++r) {
      w.basis[r] = w.n + r;
      w.position[w.n + r] = r;
    }
    for (int c = 0; c < w.n; ++c) {
      const double lo = w.lo[c], hi = w.hi[c];
      bool upper;
      if (std::isfinite(lo) && std::isfinite(hi)) upper = std::abs(hi) < std::abs(lo);
      else if (std::isfinite(lo)) upper = false;
      else if (std::isfinite(hi)) upper = true;
      else upper = false;
      w.at_upper[c] = upper ? 1 : 0;
      w.value[c] = upper ? hi : (std::isfinite(lo) ? lo : 0.0);
    }
    if (!invert_basis(w, w.binv)) throw std::runtime_error("simplex: identity basis singular");
  };

  int refactor_now = opts_.refactor_every;
  LpOutcome out;
  if (w.m == 0) {
    // Pure bound problem: each variable sits at its cheaper bound.
    out.point.assign(w.n, 0.0);
    double obj = 0.0;
    for (int c = 0; c < w.n; ++c) {
      double v;
      if (w.cost[c] > 0.0) v = w.lo[c];
      else if (w.cost[c] < 0.0) v = w.hi[c];
      else v = std::isfinite(w.lo[c]) ? w.lo[c] : 0.0;
      if (!std::isfinite(v)) {
        out.status = LpStatus::Unbounded;
        return out;
      }
      out.point[c] = v;
      obj += w.cost[c] * v;
    }
    out.status = LpStatus::Optimal;
    out.objective = obj;
    out.dual_bound = obj;
    out.basis.at_upper = w.at_upper;
    return out;
  }

  if (!invert_basis(w, w.binv)) {
    reset_basis();  // degenerate warm basis
  }
  recompute_basics(w);
  int recoveries = 0;

  std::vector<double> y(w.m), d(w.total), wcol(w.m), acol(w.m);
  int degenerate_streak = 0;
  bool bland = false;
  int since_refactor = 0;
  const double feas_tol = opts_.primal_tol;

  for (out.iterations = 0; out.iterations < opts_.max_iterations; ++out.iterations) {
    const bool phase1 = infeasibility(w, feas_tol) > feas_tol;

    // Phase-dependent objective: composite infeasibility costs in phase 1.
    std::vector<double> cphase(w.total, 0.0);
    if (phase1) {
      for (int slot = 0; slot < w.m; ++slot) {
        const int c = w.basis[slot];
        if (w.value[c] > w.hi[c] + feas_tol) cphase[c] = 1.0;
        else if (w.value[c] < w.lo[c] - feas_tol) cphase[c] = -1.0;
      }
    } else {
      cphase = w.cost;
    }

    // y = c_B^T Binv ; d_j = c_j - y^T A_j for nonbasic j.
    for (int r = 0; r < w.m; ++r) {
      double v = 0.0;
      for (int slot = 0; slot < w.m; ++slot) {
        const double cb = cphase[w.basis[slot]];
        if (cb != 0.0) v += cb * w.binv[static_cast<std::size_t>(slot) * w.m + r];
      }
      y[r] = v;
    }
    int enter = -1;
    double best_score = 0.0;
    int enter_dir = +1;
    for (int c = 0; c < w.total; ++c) {
      if (w.position[c] >= 0) continue;
      double dj = cphase[c];
      if (c < w.n) {
        for (int r = 0; r < w.m; ++r) dj -= y[r] * w.dense[static_cast<std::size_t>(r) * w.n + c];
      } else {
        dj -= y[c - w.n];
      }
      d[c] = dj;
      if (w.lo[c] == w.hi[c]) continue;  // fixed column can never improve
      const bool atl = w.at_upper[c] == 0;
      const bool free_col = !std::isfinite(w.lo[c]) && !std::isfinite(w.hi[c]);
      int dir = 0;
      if (free_col) {
        if (dj < -opts_.dual_tol) dir = +1;
        else if (dj > opts_.dual_tol) dir = -1;
      } else if (atl && dj < -opts_.dual_tol) {
        dir = +1;
      } else if (!atl && dj > opts_.dual_tol) {
        dir = -1;
      }
      if (dir == 0) continue;
      if (bland) {
        enter = c;
        enter_dir = dir;
        break;
      }
      const double score = std::abs(dj);
      if (score > best_score + 1e-15) {
        best_score = score;
        enter = c;
        enter_dir = dir;
      }
    }

    if (enter < 0) {
      if (phase1) {
        out.status = LpStatus::Infeasible;
        out.basis.basic = w.basis;
        out.basis.at_upper = w.at_upper;
        return out;
      }
      break;  // optimal
    }

    w.column(enter, acol);
    for (int r = 0; r < w.m; ++r) {
      double v = 0.0;
      const double* row = &w.binv[static_cast<std::size_t>(r) * w.m];
      for (int k = 0; k < w.m; ++k) v += row[k] * acol[k];
      wcol[r] = v;
    }

    // Two-pass ratio test: entering moves t >= 0 in direction enter_dir;
    // basic slot i changes by -enter_dir * wcol[i] * t. Infeasible basics
    // block at the bound they currently violate (composite phase-1 rule).
    // The first pass finds the tightest step; the second picks, among the
    // blockers within tolerance of it, the largest pivot magnitude so that
    // repeated near-zero pivots cannot erode the basis determinant. Bland's
    // rule replaces that choice with the lowest blocking column index.
    double flip_dist = kInf;
    if (std::isfinite(w.lo[enter]) && std::isfinite(w.hi[enter])) {
      flip_dist = w.hi[enter] - w.lo[enter];
    }
    struct Blocker {
      int slot;
      double limit;
      double target;
    };
    std::vector<Blocker> blockers;
    double t_min = flip_dist;
    for (int slot = 0; slot < w.m; ++slot) {
      const double delta = -enter_dir * wcol[slot];
      if (std::abs(delta) <= opts_.pivot_tol) continue;
      const int c = w.basis[slot];
      const double v = w.value[c];
      double target;
      if (delta > 0.0) {  // value increases; blocks at the upper side
        if (v > w.hi[c] + feas_tol) continue;  // moving further out: no block
        target = (v < w.lo[c] - feas_tol) ? w.lo[c] : w.hi[c];
      } else {  // value decreases; blocks at the lower side
        if (v < w.lo[c] - feas_tol) continue;
        target = (v > w.hi[c] + feas_tol) ? w.hi[c] : w.lo[c];
      }
      if (!std::isfinite(target)) continue;
      double limit = (target - v) / delta;
      if (limit < 0.0) limit = 0.0;
      blockers.push_back({slot, limit, target});
      t_min = std::min(t_min, limit);
    }

    int leave_slot = -1;
    double leave_target = 0.0;
    double t_max = flip_dist;
    const double ratio_tol = 1e-9 * (1.0 + std::abs(t_min));
    if (flip_dist > t_min - ratio_tol) {  // a basic blocks before the flip
      double best_piv = 0.0;
      for (const auto& b : blockers) {
        if (b.limit > t_min + ratio_tol) continue;
        const double piv_mag = std::abs(wcol[b.slot]);
        bool better;
        if (bland) {
          better = leave_slot < 0 || w.basis[b.slot] < w.basis[leave_slot];
        } else {
          better = piv_mag > best_piv;
        }
        if (better) {
          best_piv = piv_mag;
          leave_slot = b.slot;
          leave_target = b.target;
          t_max = std::min(b.limit, flip_dist);
        }
      }
    }
    if (leave_slot < 0) t_max = flip_dist;  // entering flips bound to bound

    if (!std::isfinite(t_max)) {
      out.status = phase1 ? LpStatus::Infeasible : LpStatus::Unbounded;
      out.basis.basic = w.basis;
      out.basis.at_upper = w.at_upper;
      return out;
    }

    const double step = t_max;
    if (step <= 1e-11) {
      ++degenerate_streak;
      if (degenerate_streak >= opts_.bland_trigger) bland = true;
    } else {
      degenerate_streak = 0;
      bland = false;
    }

    // Apply the step incrementally; a full recompute happens at refactors.
    const double move = enter_dir * step;
    w.value[enter] += move;
    if (step != 0.0) {
      for (int slot = 0; slot < w.m; ++slot) {
        w.value[w.basis[slot]] -= enter_dir * wcol[slot] * step;
      }
    }

    if (leave_slot < 0) {
      // Entering flipped bound to bound; basis unchanged.
      w.at_upper[enter] = w.at_upper[enter] ? 0 : 1;
      continue;
    }

    const int leave = w.basis[leave_slot];
    // Snap the leaving variable onto the bound it blocked at.
    w.at_upper[leave] =
        (leave_target == w.hi[leave] && w.lo[leave] != w.hi[leave]) ? 1 : 0;
    w.value[leave] = leave_target;

    w.basis[leave_slot] = enter;
    w.position[enter] = leave_slot;
    w.position[leave] = -1;

    // Product-form update of Binv, with periodic refactorization. A singular
    // refactor means accumulated drift let a near-dependent column in; reset
    // deterministically instead of aborting.
    const double piv = wcol[leave_slot];
    if (std::abs(piv) < opts_.pivot_tol || ++since_refactor >= refactor_now) {
      if (!invert_basis(w, w.binv)) {
        // Escalate: verify (and repair) the basis after every pivot once the
        // factorization shows signs of collapse on this instance.
        ++recoveries;
        if (recoveries >= 2) refactor_now = 1;
        if (recoveries > 30 || !(repair_basis(w) && invert_basis(w, w.binv))) {
          if (recoveries > 40) {
            throw std::runtime_error("simplex: basis repeatedly singular");
          }
          reset_basis();
        }
        degenerate_streak = 0;
        bland = false;
      }
      since_refactor = 0;
      recompute_basics(w);
    } else {
      double* prow = &w.binv[static_cast<std::size_t>(leave_slot) * w.m];
      for (int k = 0; k < w.m; ++k) prow[k] /= piv;
      for (int r = 0; r < w.m; ++r) {
        if (r == leave_slot) continue;
        const double f = wcol[r];
        if (f == 0.0) continue;
        double* row = &w.binv[static_cast<std::size_t>(r) * w.m];
        for (int k = 0; k < w.m; ++k) row[k] -= f * prow[k];
      }
    }
  }

  if (out.iterations >= opts_.max_iterations) {
    out.status = LpStatus::IterationLimit;
    out.basis.basic = w.basis;
    out.basis.at_upper = w.at_upper;
    return out;
  }

  // Optimal: refresh values from a clean factorization, then report the
  // point, objective, residuals and the Lagrangian bound.
  if (invert_basis(w, w.binv)) recompute_basics(w);
  out.status = LpStatus::Optimal;
  out.point.assign(w.value.begin(), w.value.begin() + w.n);
  double obj = 0.0;
  for (int c = 0; c < w.n; ++c) obj += lp.cost[c] * w.value[c];
  out.objective = obj;
  out.basis.basic = w.basis;
  out.basis.at_upper = w.at_upper;

  for (int r = 0; r < w.m; ++r) {
    double act = 0.0;
    for (const auto& [c, v] : lp.rows[r].terms) act += v * w.value[c];
    const double viol = std::max(act - lp.rows[r].upper, lp.rows[r].lower - act);
    out.max_primal_residual = std::max(out.max_primal_residual, viol);
  }
  for (int c = 0; c < w.n; ++c) {
    const double viol = std::max(w.value[c] - w.hi[c], w.lo[c] - w.value[c]);
    out.max_primal_residual = std::max(out.max_primal_residual, viol);
  }

  // Final duals against the true cost vector.
  for (int r = 0; r < w.m; ++r) {
    double v = 0.0;
    for (int slot = 0; slot < w.m; ++slot) {
      const double cb = w.cost[w.basis[slot]];
      if (cb != 0.0) v += cb * w.binv[static_cast<std::size_t>(slot) * w.m + r];
    }
    y[r] = v;
  }
  double dual_bound = 0.0;
  for (int c = 0; c < w.total; ++c) {
    double dj = w.cost[c];
    if (c < w.n) {
      for (int r = 0; r < w.m; ++r) dj -= y[r] * w.dense[static_cast<std::size_t>(r) * w.n + c];
    } else {
      dj -= y[c - w.n];
    }
    if (w.position[c] >= 0) {
      out.max_dual_residual = std::max(out.max_dual_residual, std::abs(dj));
      dual_bound += dj * w.value[c];  // ~0 for basics
      continue;
    }
    // Nonbasic: dual feasibility requires dj >= 0 at lower, dj <= 0 at upper.
    const double dual_viol = w.at_upper[c] ? dj : -dj;
    out.max_dual_residual = std::max(out.max_dual_residual, dual_viol);
    double contrib;
    if (dj >= 0.0) contrib = std::isfinite(w.lo[c]) ? dj * w.lo[c] : dj * w.value[c];
    else contrib = std::isfinite(w.hi[c]) ? dj * w.hi[c] : dj * w.value[c];
    dual_bound += contrib;
  }
  out.dual_bound = dual_bound;
  return out;
}

}  // namespace rsbb
