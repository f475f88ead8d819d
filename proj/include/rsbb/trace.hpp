// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <iosfwd>
#include <string>
#include <vector>

namespace rsbb {

enum class TraceEvent {
  NodeSolved,
  CutAdded,
  IncumbentUpdated,
  NodeFathomed,
  StoreRefresh,
};

std::string to_string(TraceEvent e);
TraceEvent trace_event_from_string(const std::string& s);

struct TraceRecord {
  long wall_ms = 0;
  TraceEvent event = TraceEvent::NodeSolved;
  double ub = 0.0;
  double lb = 0.0;
  double gap = 0.0;  // |ub-lb|/|lb| when both finite, +inf otherwise
  long node_id = -1;
  int cut_round = 0;

  bool operator==(const TraceRecord&) const = default;
};

/// Time-stamped solver history; reproduces the bound-convergence and
/// cut-iteration views without any plotting dependency.
class ConvergenceTrace {
 public:
  ConvergenceTrace() : start_(std::chrono::steady_clock::now()) {}

  void emit(TraceEvent event, double ub, double lb, long node_id, int cut_round);

  const std::vector<TraceRecord>& records() const { return records_; }
  std::vector<TraceRecord>& records() { return records_; }

  static double gap_metric(double ub, double lb);

  /// Fixed header: wall_ms,event,ub,lb,gap,node_id,cut_round
  void write_csv(std::ostream& os) const;
  static std::vector<TraceRecord> parse_csv(std::istream& is);

 private:
  std::chrono::steady_clock::time_point start_;
  std::vector<TraceRecord> records_;
};

}  // namespace rsbb
