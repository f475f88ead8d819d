// SPDX-License-Identifier: Apache-2.0

#include "rsbb/rsbb.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

#include "rsbb/simplex.hpp"

namespace rsbb {

std::string to_string(Termination t) {
  switch (t) {
    case Termination::Optimal: return "Optimal";
    case Termination::TimeLimit: return "TimeLimit";
    case Termination::NodeLimit: return "NodeLimit";
    case Termination::RobustInfeasible: return "RobustInfeasible";
  }
  return "?";
}

std::vector<long> select_current(const std::vector<Node>& pool, double tol) {
  double z_bp = kInf;
  for (const auto& n : pool) {
    if (n.state == NodeState::Waiting) z_bp = std::min(z_bp, n.lb);
  }
  std::vector<long> current;
  if (!std::isfinite(z_bp)) return current;
  for (const auto& n : pool) {
    if (n.state == NodeState::Waiting && n.lb - z_bp <= tol) current.push_back(n.id);
  }
  return current;
}

QcqpProblem nominalize(const QcqpProblem& problem) {
  QcqpProblem nominal = problem;
  nominal.uncertain_constraints.clear();
  for (const auto& uc : problem.uncertain_constraints) {
    nominal.add_inequality(uc.base, uc.name + "@nominal");
  }
  return nominal;
}

namespace {

struct NodeRelaxation {
  bool feasible = false;
  double lb = kInf;
  std::vector<double> point;  // original + aux columns
  std::map<std::pair<int, int>, int> pair_index;
  Basis basis;
};

// The relaxation column/row layout depends only on the problem and the store,
// so bases warm-start sibling and child solves; the solver ignores a warm
// basis whose dimensions no longer match.
NodeRelaxation solve_node_relaxation(const QcqpProblem& problem,
                                     const VariableBox& box,
                                     const SampleStore& store,
                                     const UncertaintySet& set,
                                     const Basis* warm = nullptr) {
  const RelaxedLp rlp = relax(problem, box, store, set);
  SimplexSolver solver;
  const LpOutcome out = solver.solve(rlp.lp, warm);
  NodeRelaxation res;
  res.pair_index = rlp.pair_index;
  if (out.status == LpStatus::Infeasible) return res;
  if (out.status != LpStatus::Optimal) {
    throw std::runtime_error("node relaxation LP did not solve to optimality");
  }
  res.feasible = true;
  res.lb = relaxed_objective(rlp, out);
  res.point = out.point;
  res.basis = out.basis;
  return res;
}

}  // namespace

RobustSolution solve_rsbb(const QcqpProblem& problem, const UncertaintySet& set,
                          const SolveConfig& config) {
  {
    const auto findings = validate(problem);
    if (!findings.empty()) {
      throw std::invalid_argument("solve_rsbb: invalid problem: " + findings.front());
    }
  }

  RobustSolution res;
  res.store = SampleStore::for_problem(problem);

  const auto t_start = std::chrono::steady_clock::now();
  const auto elapsed_s = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
        .count();
  };

  std::vector<Node> pool;
  std::vector<double> incumbent;
  double z_bf = kInf;
  double reported_lb = -kInf;
  // Least lower bound among regions retired by the fathoming rule; open-node
  // bounds alone stop being a valid global bound once cuts push them past
  // the incumbent.
  double fathom_floor = kInf;

  // Sign-safe fathoming cutoff: z^BF - eps*|z^BF| agrees with the usual
  // multiplicative form for positive incumbents and stays correct for the
  // negative pooling objectives.
  const auto threshold = [&] {
    return std::isfinite(z_bf) ? z_bf - config.epsilon * std::abs(z_bf) : kInf;
  };

  // Monotonized global lower bound: open (Waiting or Current) nodes plus the
  // floor of every fathomed region.
  const auto global_lb = [&] {
    double lb = fathom_floor;
    bool open = false;
    for (const auto& n : pool) {
      if (n.state == NodeState::Waiting || n.state == NodeState::Current) {
        lb = std::min(lb, n.lb);
        open = true;
      }
    }
    if (!open && !std::isfinite(fathom_floor)) lb = std::min(z_bf, threshold());
    reported_lb = std::max(reported_lb, lb);
    return reported_lb;
  };
  const auto retire = [&](double lb) {
    if (std::isfinite(lb)) fathom_floor = std::min(fathom_floor, lb);
  };

  const auto emit = [&](TraceEvent ev, long node_id, int round) {
    res.trace.emit(ev, z_bf, global_lb(), node_id, round);
  };

  // Root node.
  {
    Node root;
    root.id = 0;
    root.box = problem.box;
    const NodeRelaxation relax0 =
        solve_node_relaxation(problem, root.box, res.store, set);
    if (!relax0.feasible) {
      res.termination = Termination::RobustInfeasible;
      res.lb = kInf;
      return res;
    }
    root.lb = relax0.lb;
    root.relax_point = relax0.point;
    root.pair_index = relax0.pair_index;
    root.lp_basis = relax0.basis;
    pool.push_back(std::move(root));
  }

  CuttingOptions cut_opts;
  cut_opts.delta = config.delta;
  cut_opts.max_rounds = config.max_cut_rounds;
  cut_opts.slp = config.slp;

  Termination termination = Termination::Optimal;

  while (true) {
    const std::vector<long> current_ids = select_current(pool, config.tol);
    if (current_ids.empty()) break;
    if (res.nodes_explored >= config.max_nodes) {
      termination = Termination::NodeLimit;
      break;
    }
    if (elapsed_s() > config.time_limit_s) {
      termination = Termination::TimeLimit;
      break;
    }
    for (long id : current_ids) pool[id].state = NodeState::Current;

    bool limit_hit = false;
    for (long id : current_ids) {
      if (pool[id].state != NodeState::Current) continue;
      if (elapsed_s() > config.time_limit_s) {
        termination = Termination::TimeLimit;
        limit_hit = true;
        break;
      }
      if (res.nodes_explored >= config.max_nodes) {
        termination = Termination::NodeLimit;
        limit_hit = true;
        break;
      }
      ++res.nodes_explored;
      // Work on value copies: pool.push_back below invalidates references.
      const VariableBox nbox = pool[id].box;
      const int ndepth = pool[id].depth;

      // Local solve of the sampled problem on this box.
      std::vector<std::vector<double>> starts;
      if (!pool[id].relax_point.empty()) {
        starts.emplace_back(pool[id].relax_point.begin(),
                            pool[id].relax_point.begin() + problem.n_vars);
      }
      std::vector<double> mid(problem.n_vars);
      for (int i = 0; i < problem.n_vars; ++i) mid[i] = nbox.midpoint(i);
      starts.push_back(std::move(mid));
      if (!incumbent.empty()) {
        std::vector<double> proj = incumbent;
        for (int i = 0; i < problem.n_vars; ++i)
          proj[i] = std::clamp(proj[i], nbox.lower[i], nbox.upper[i]);
        starts.push_back(std::move(proj));
      }
      const LocalOutcome local =
          solve_local_multistart(problem, nbox, res.store, starts, config.slp);
      const double z_n =
          local.status == LocalStatus::LocalOptimal ? local.objective : kInf;
      emit(TraceEvent::NodeSolved, id, 0);

      int rounds_here = 0;
      NodeLocalRecord local_record{id, z_n, z_n, 0};
      if (std::isfinite(z_n) && z_n <= z_bf) {
        const std::size_t samples_before = res.store.total_samples();
        const InfeasibilityTestResult test = infeasibility_test(
            problem, local.point, res.store, set, nbox, cut_opts);
        rounds_here = static_cast<int>(test.rounds.size());
        local_record.post_cut = test.objective;
        local_record.rounds = rounds_here;
        res.cut_rounds += rounds_here;
        res.samples_added += test.samples_added;
        for (int r = 0; r < rounds_here; ++r) {
          emit(TraceEvent::CutAdded, id, r + 1);
        }
        if (res.store.total_samples() > samples_before) {
          // New samples invalidate every waiting bound; refresh them in
          // best-first order before the next selection.
          std::vector<long> waiting;
          for (const auto& n : pool)
            if (n.state == NodeState::Waiting) waiting.push_back(n.id);
          std::sort(waiting.begin(), waiting.end(), [&](long a, long b) {
            return pool[a].lb != pool[b].lb ? pool[a].lb < pool[b].lb : a < b;
          });
          for (long w : waiting) {
            const NodeRelaxation r = solve_node_relaxation(
                problem, pool[w].box, res.store, set, &pool[w].lp_basis);
            if (r.feasible) {
              pool[w].lb = r.lb;
              pool[w].relax_point = r.point;
              pool[w].pair_index = r.pair_index;
              pool[w].lp_basis = r.basis;
            } else {
              pool[w].lb = kInf;
              pool[w].state = NodeState::Fathomed;
              emit(TraceEvent::NodeFathomed, w, 0);
            }
          }
          emit(TraceEvent::StoreRefresh, id, rounds_here);
        }
        if (test.certified && test.objective < z_bf) {
          z_bf = test.objective;
          incumbent = test.point;
          emit(TraceEvent::IncumbentUpdated, id, rounds_here);
          for (auto& w : pool) {
            if (w.state == NodeState::Waiting && w.lb >= threshold()) {
              w.state = NodeState::Fathomed;
              retire(w.lb);
              emit(TraceEvent::NodeFathomed, w.id, 0);
            }
          }
        }
      }

      res.node_locals.push_back(local_record);

      // Re-solve this node's relaxation on the current store and branch.
      const NodeRelaxation nrel =
          solve_node_relaxation(problem, nbox, res.store, set, &pool[id].lp_basis);
      if (!nrel.feasible) {
        pool[id].lb = kInf;
        pool[id].state = NodeState::Fathomed;
        emit(TraceEvent::NodeFathomed, id, 0);
        continue;
      }
      const double node_lb = std::max(pool[id].lb, nrel.lb);
      pool[id].lb = node_lb;
      pool[id].relax_point = nrel.point;
      pool[id].pair_index = nrel.pair_index;
      pool[id].lp_basis = nrel.basis;
      if (node_lb >= threshold()) {
        pool[id].state = NodeState::Fathomed;
        retire(node_lb);
        emit(TraceEvent::NodeFathomed, id, 0);
        continue;
      }

      // Branching variable: largest McCormick error first, then strong
      // branching pseudoscores.
      const auto errors = approximation_errors(nrel.point, nrel.pair_index);
      BranchDecision dec;
      std::map<int, std::pair<NodeRelaxation, NodeRelaxation>> probe_cache;
      const auto clip_point = [&](int var) {
        const double lo = nbox.lower[var], hi = nbox.upper[var];
        const double w = hi - lo;
        return std::clamp(nrel.point[var], lo + 0.2 * w, hi - 0.2 * w);
      };

      double max_err = 0.0;
      std::pair<int, int> max_pair{-1, -1};
      for (const auto& [key, err] : errors) {
        if (err > max_err) {
          max_err = err;
          max_pair = key;
        }
      }
      if (max_err >= config.branch_error_tol) {
        const auto [b, j] = max_pair;
        const double wb = nbox.width(b), wj = nbox.width(j);
        int var = (wb >= wj) ? b : j;          // wider interval, tie -> lower index
        if (wb == wj) var = std::min(b, j);
        if (nbox.width(var) < 1e-9) var = (var == b) ? j : b;
        if (nbox.width(var) < 1e-9) {
          dec.exhausted = true;
        } else {
          dec.variable = var;
          dec.point = clip_point(var);
        }
      } else {
        // Pseudoscore by strong branching over a capped candidate list ranked
        // by |interval width x objective coefficient|.
        std::vector<double> obj_weight(problem.n_vars, 0.0);
        for (const auto& [i, c] : problem.objective.linear())
          obj_weight[i] += std::abs(c);
        for (const auto& [key, c] : problem.objective.bilinear()) {
          obj_weight[key.first] += std::abs(c);
          obj_weight[key.second] += std::abs(c);
        }
        std::vector<int> candidates;
        for (int i = 0; i < problem.n_vars; ++i)
          if (nbox.width(i) >= 1e-9) candidates.push_back(i);
        if (candidates.empty()) {
          dec.exhausted = true;
        } else {
          std::stable_sort(candidates.begin(), candidates.end(), [&](int a, int b) {
            const double sa = nbox.width(a) * (obj_weight[a] + 1e-12);
            const double sb = nbox.width(b) * (obj_weight[b] + 1e-12);
            return sa != sb ? sa > sb : a < b;
          });
          if (static_cast<int>(candidates.size()) > config.strong_branch_cap)
            candidates.resize(config.strong_branch_cap);
          double best_score = -kInf;
          for (int var : candidates) {
            const double pt = clip_point(var);
            NodeRelaxation lo_child = solve_node_relaxation(
                problem, nbox.restricted(var, nbox.lower[var], pt), res.store, set,
                &nrel.basis);
            NodeRelaxation hi_child = solve_node_relaxation(
                problem, nbox.restricted(var, pt, nbox.upper[var]), res.store, set,
                &nrel.basis);
            const auto side_score = [&](const NodeRelaxation& child, double width) {
              if (!child.feasible) {
                if (config.literal_infeasible_pseudoscore)
                  return (0.0 - node_lb) / std::max(width, 1e-12);
                return kInf;
              }
              return std::max(child.lb - node_lb, 0.0) / std::max(width, 1e-12);
            };
            const double score =
                std::max(side_score(lo_child, pt - nbox.lower[var]),
                         side_score(hi_child, nbox.upper[var] - pt));
            if (score > best_score) {
              best_score = score;
              dec.variable = var;
              dec.point = pt;
            }
            probe_cache.emplace(var, std::make_pair(std::move(lo_child),
                                                    std::move(hi_child)));
          }
        }
      }

      if (dec.exhausted || dec.variable < 0) {
        // Numerically exhausted box: close it and keep its bound as a floor.
        pool[id].state = NodeState::Closed;
        retire(node_lb);
        continue;
      }

      // Children in (down, up) order.
      const auto add_child = [&](double lo, double hi, NodeRelaxation&& rel) {
        Node child;
        child.id = static_cast<long>(pool.size());
        child.box = nbox.restricted(dec.variable, lo, hi);
        child.parent = id;
        child.depth = ndepth + 1;
        if (!rel.feasible) {
          child.lb = kInf;
          child.state = NodeState::Fathomed;
          pool.push_back(std::move(child));
          emit(TraceEvent::NodeFathomed, pool.back().id, 0);
          return;
        }
        child.lb = rel.lb;
        child.relax_point = std::move(rel.point);
        child.pair_index = std::move(rel.pair_index);
        child.lp_basis = std::move(rel.basis);
        if (child.lb >= threshold()) {
          child.state = NodeState::Fathomed;
          retire(child.lb);
          pool.push_back(std::move(child));
          emit(TraceEvent::NodeFathomed, pool.back().id, 0);
          return;
        }
        child.state = NodeState::Waiting;
        pool.push_back(std::move(child));
      };

      auto cached = probe_cache.find(dec.variable);
      if (cached != probe_cache.end()) {
        add_child(nbox.lower[dec.variable], dec.point,
                  std::move(cached->second.first));
        add_child(dec.point, nbox.upper[dec.variable],
                  std::move(cached->second.second));
      } else {
        NodeRelaxation lo_child = solve_node_relaxation(
            problem, nbox.restricted(dec.variable, nbox.lower[dec.variable], dec.point),
            res.store, set, &nrel.basis);
        NodeRelaxation hi_child = solve_node_relaxation(
            problem, nbox.restricted(dec.variable, dec.point, nbox.upper[dec.variable]),
            res.store, set, &nrel.basis);
        add_child(nbox.lower[dec.variable], dec.point, std::move(lo_child));
        add_child(dec.point, nbox.upper[dec.variable], std::move(hi_child));
      }
      pool[id].state = NodeState::Closed;
    }
    if (limit_hit) break;
  }

  res.termination = termination;
  if (!std::isfinite(z_bf)) {
    // The tree is exhausted (or a limit hit) without any robust-certified
    // point: report infeasibility honestly.
    res.termination = Termination::RobustInfeasible;
    res.lb = global_lb();
    return res;
  }
  res.objective = z_bf;
  res.point = incumbent;
  res.lb = global_lb();
  res.gap = ConvergenceTrace::gap_metric(res.objective, res.lb);
  return res;
}

RobustCuttingResult robust_cutting_set(const QcqpProblem& problem,
                                       const UncertaintySet& set, double delta,
                                       bool use_global,
                                       const CuttingOptions& options) {
  RobustCuttingResult res;
  res.store = SampleStore::for_problem(problem);

  std::vector<double> mid(problem.n_vars);
  for (int i = 0; i < problem.n_vars; ++i) mid[i] = problem.box.midpoint(i);
  std::vector<double> previous = mid;
  bool have_point = false;

  double a0 = 0.0;
  std::vector<double> a;

  for (int round = 0;; ++round) {
    if (round > options.max_rounds) {
      throw std::runtime_error("robust_cutting_set: round cap reached");
    }
    // Inner solve of the sampled problem.
    if (use_global) {
      const QcqpProblem det = materialize_samples(problem, res.store);
      SolveConfig cfg;
      cfg.delta = delta;
      cfg.slp = options.slp;
      const RobustSolution sol = solve_rsbb(det, set, cfg);
      if (sol.termination == Termination::RobustInfeasible) {
        res.robust_infeasible = true;
        return res;
      }
      res.point = sol.point;
      res.objective = sol.objective;
    } else {
      // Deterministic start list; the alternating skewed points avoid
      // symmetric stationary traps that the plain midpoint can hit.
      std::vector<std::vector<double>> starts;
      if (have_point) starts.push_back(previous);
      starts.push_back(mid);
      std::vector<double> skew_a(problem.n_vars), skew_b(problem.n_vars);
      for (int i = 0; i < problem.n_vars; ++i) {
        const double lo = problem.box.lower[i], w = problem.box.width(i);
        skew_a[i] = lo + (i % 2 == 0 ? 0.75 : 0.25) * w;
        skew_b[i] = lo + (i % 2 == 0 ? 0.25 : 0.75) * w;
      }
      starts.push_back(std::move(skew_a));
      starts.push_back(std::move(skew_b));
      const LocalOutcome local =
          solve_local_multistart(problem, problem.box, res.store, starts, options.slp);
      if (local.status != LocalStatus::LocalOptimal) {
        res.robust_infeasible = true;
        return res;
      }
      res.point = local.point;
      res.objective = local.objective;
    }
    previous = res.point;
    have_point = true;
    if (!res.rounds.empty()) res.rounds.back().objective_after = res.objective;

    CutRoundLog log;
    log.round = round;
    for (std::size_t ci = 0; ci < problem.uncertain_constraints.size(); ++ci) {
      const auto& uc = problem.uncertain_constraints[ci];
      extract_affine(uc, res.point, problem.xi_dim_of(uc), a0, a);
      const WorstCase wc = worst_case(a0, a, set);
      if (wc.value > delta) {
        log.violated_constraints.push_back(
            {static_cast<int>(ci), wc.xi_star, wc.value});
        if (res.store.add_sample(ci, wc.xi_star, set)) ++res.samples_added;
      }
    }
    if (log.violated_constraints.empty()) break;
    res.rounds.push_back(std::move(log));
  }
  return res;
}

}  // namespace rsbb
