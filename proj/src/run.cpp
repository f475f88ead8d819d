// SPDX-License-Identifier: Apache-2.0

#include "rsbb/run.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <stdexcept>

#include <json.hpp>

namespace rsbb {

std::string to_string(Method m) {
  switch (m) {
    case Method::Rsbb: return "rsbb";
    case Method::Cutting: return "cutting";
    case Method::Dual: return "dual";
  }
  return "?";
}

Method method_from_string(const std::string& s) {
  if (s == "rsbb") return Method::Rsbb;
  if (s == "cutting") return Method::Cutting;
  if (s == "dual") return Method::Dual;
  throw std::invalid_argument("unknown method: " + s);
}

std::string resolve_instance_path(const std::string& name, const std::string& data_dir) {
  namespace fs = std::filesystem;
  if (fs::exists(name)) return name;
  std::vector<std::string> dirs;
  if (!data_dir.empty()) dirs.push_back(data_dir);
  if (const char* env = std::getenv("RSBB_DATA_DIR")) dirs.push_back(env);
  dirs.push_back("data");
  for (const auto& d : dirs) {
    const fs::path p = fs::path(d) / (name + ".json");
    if (fs::exists(p)) return p.string();
  }
  throw std::invalid_argument("instance not found: " + name);
}

RunResult run_solve(const RunRequest& request) {
  RunResult out;
  out.instance = request.instance;
  out.method = request.method;
  out.set_kind = request.set_kind;
  out.set_size = request.set_size;

  QcqpProblem problem;
  UncertaintySet set{request.set_kind, std::max(request.set_size, 1e-30), 1};
  if (request.instance == "toy") {
    ToyProblem toy = make_toy_problem();
    problem = toy.problem;
    set.dim = 1;
  } else {
    const auto inst =
        load_instance_file(resolve_instance_path(request.instance, request.data_dir));
    set.dim = pooling_xi_dim(inst);
    if (request.method == Method::Dual) {
      if (request.set_size > 0.0) {
        problem = build_dual_counterpart(inst, set).problem;
      } else {
        problem = nominalize(build_pq(inst).problem);
      }
    } else {
      problem = build_pq(inst).problem;
    }
  }
  // Size zero (or negative) requests the nominal problem on any method.
  if (request.set_size <= 0.0 && !problem.uncertain_constraints.empty()) {
    problem = nominalize(problem);
  }

  const auto t0 = std::chrono::steady_clock::now();
  switch (request.method) {
    case Method::Rsbb:
    case Method::Dual: {
      RobustSolution sol = solve_rsbb(problem, set, request.config);
      out.objective = sol.objective;
      out.gap = sol.gap;
      out.nodes_explored = sol.nodes_explored;
      out.cut_rounds = sol.cut_rounds;
      out.samples_added = sol.samples_added;
      out.termination = sol.termination;
      out.trace = std::move(sol.trace);
      out.point = std::move(sol.point);
      out.node_locals = std::move(sol.node_locals);
      break;
    }
    case Method::Cutting: {
      CuttingOptions opts;
      opts.delta = request.config.delta;
      opts.max_rounds = request.config.max_cut_rounds;
      opts.slp = request.config.slp;
      RobustCuttingResult sol =
          robust_cutting_set(problem, set, request.config.delta, true, opts);
      out.objective = sol.robust_infeasible ? kInf : sol.objective;
      out.gap = sol.robust_infeasible ? kInf : 0.0;
      out.cut_rounds = static_cast<int>(sol.rounds.size());
      out.samples_added = sol.samples_added;
      out.termination =
          sol.robust_infeasible ? Termination::RobustInfeasible : Termination::Optimal;
      out.point = std::move(sol.point);
      // Round objectives form a non-decreasing lower-bound path; the final
      // certified value is the only upper bound this method produces.
      for (const auto& r : sol.rounds) {
        out.trace.emit(TraceEvent::CutAdded, kInf, r.objective_after, -1, r.round + 1);
      }
      if (!sol.robust_infeasible) {
        out.trace.emit(TraceEvent::IncumbentUpdated, out.objective, out.objective, -1,
                       out.cut_rounds);
      }
      break;
    }
  }
  out.wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                    std::chrono::steady_clock::now() - t0)
                    .count();
  return out;
}

std::string result_to_json(const RunResult& result) {
  nlohmann::ordered_json j;
  j["instance"] = result.instance;
  j["method"] = to_string(result.method);
  j["set"] = {{"kind", to_string(result.set_kind)}, {"size", result.set_size}};
  if (std::isfinite(result.objective)) {
    j["objective"] = result.objective;
  } else {
    j["objective"] = nullptr;
  }
  if (std::isfinite(result.gap)) {
    j["gap"] = result.gap;
  } else {
    j["gap"] = nullptr;
  }
  j["nodes_explored"] = result.nodes_explored;
  j["cut_rounds"] = result.cut_rounds;
  j["samples_added"] = result.samples_added;
  j["wall_ms"] = result.wall_ms;
  j["termination"] = to_string(result.termination);
  return j.dump(2);
}

}  // namespace rsbb
