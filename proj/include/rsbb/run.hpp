// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>

#include "rsbb/pooling.hpp"
#include "rsbb/rsbb.hpp"
#include "rsbb/toy.hpp"

namespace rsbb {

enum class Method { Rsbb, Cutting, Dual };

std::string to_string(Method m);
Method method_from_string(const std::string& s);

struct RunRequest {
  std::string instance;  // "toy", a data-dir name, or a file path
  Method method = Method::Rsbb;
  SetKind set_kind = SetKind::Box;
  double set_size = 0.1;  // <= 0 solves the nominal problem
  SolveConfig config;
  std::string data_dir;  // resolution order: path, RSBB_DATA_DIR, ./data
};

struct RunResult {
  std::string instance;
  Method method = Method::Rsbb;
  SetKind set_kind = SetKind::Box;
  double set_size = 0.0;
  double objective = kInf;
  double gap = kInf;
  long nodes_explored = 0;
  int cut_rounds = 0;
  int samples_added = 0;
  long wall_ms = 0;
  Termination termination = Termination::RobustInfeasible;
  ConvergenceTrace trace;
  std::vector<double> point;
  std::vector<NodeLocalRecord> node_locals;
};

/// Loads the instance (building the toy in-process), dispatches on method,
/// and times the solve.
RunResult run_solve(const RunRequest& request);

/// Result JSON with a stable field order; wall_ms is the only
/// run-to-run-varying field.
std::string result_to_json(const RunResult& result);

/// Locates `name` as a file path or under the data directory.
std::string resolve_instance_path(const std::string& name, const std::string& data_dir);

}  // namespace rsbb
