// SPDX-License-Identifier: Apache-2.0

#include "rsbb/cutting_set.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace rsbb {

namespace {
constexpr double kInfty = std::numeric_limits<double>::infinity();
}

InfeasibilityTestResult infeasibility_test(const QcqpProblem& problem,
                                           std::span<const double> x_star,
                                           SampleStore& store,
                                           const UncertaintySet& set,
                                           const VariableBox& node_box,
                                           const CuttingOptions& options) {
  InfeasibilityTestResult out;
  out.point.assign(x_star.begin(), x_star.end());
  out.objective = problem.objective.eval(out.point);

  double a0 = 0.0;
  std::vector<double> a;

  for (int round = 0;; ++round) {
    CutRoundLog log;
    log.round = round;
    bool any_new = false;
    for (std::size_t ci = 0; ci < problem.uncertain_constraints.size(); ++ci) {
      const auto& uc = problem.uncertain_constraints[ci];
      extract_affine(uc, out.point, problem.xi_dim_of(uc), a0, a);
      const WorstCase wc = worst_case(a0, a, set);
      if (wc.value > options.delta) {
        log.violated_constraints.push_back(
            {static_cast<int>(ci), wc.xi_star, wc.value});
        if (store.add_sample(ci, wc.xi_star, set)) {
          any_new = true;
          ++out.samples_added;
        }
      }
    }
    if (log.violated_constraints.empty()) {
      out.certified = true;
      break;
    }
    if (round >= options.max_rounds) {
      out.cap_hit = true;
      throw std::runtime_error(
          "infeasibility_test: cut-round cap reached (" +
          std::to_string(options.max_rounds) +
          "); finite termination is guaranteed, so this is a solver bug");
    }
    if (!any_new) {
      // Every violating vertex is already stored, yet the point still fails
      // the oracle: the local re-solve could not clear the sampled rows to
      // delta. Treat the node as not certifiable rather than looping.
      out.rounds.push_back(std::move(log));
      break;
    }

    // Re-solve the sampled problem on this node from the previous point.
    const LocalOutcome local =
        solve_local(problem, node_box, store, out.point, options.slp);
    if (local.status != LocalStatus::LocalOptimal) {
      out.objective = kInfty;
      out.rounds.push_back(std::move(log));
      return out;
    }
    out.point = local.point;
    out.objective = local.objective;
    log.objective_after = local.objective;
    out.rounds.push_back(std::move(log));
  }
  return out;
}

QcqpProblem materialize_samples(const QcqpProblem& problem,
                                const SampleStore& store) {
  QcqpProblem determinized = problem;
  determinized.uncertain_constraints.clear();
  for (std::size_t ci = 0; ci < problem.uncertain_constraints.size(); ++ci) {
    const auto& uc = problem.uncertain_constraints[ci];
    const auto& samples = store.samples(ci);
    for (std::size_t s = 0; s < samples.size(); ++s) {
      const auto& xi = samples[s];
      QuadExpr inst = uc.base;
      for (const auto& [k, e] : uc.perturbation_terms) {
        if (xi[static_cast<std::size_t>(k)] == 0.0) continue;
        QuadExpr scaled = e;
        scaled *= xi[static_cast<std::size_t>(k)];
        inst += scaled;
      }
      inst.canonicalize();
      determinized.add_inequality(inst, uc.name + "@sample" + std::to_string(s));
    }
  }
  return determinized;
}

}  // namespace rsbb
