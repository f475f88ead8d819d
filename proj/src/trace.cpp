// SPDX-License-Identifier: Apache-2.0

#include "rsbb/trace.hpp"

#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace rsbb {

namespace {
constexpr double kInfty = std::numeric_limits<double>::infinity();

std::string num_to_csv(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

double csv_to_num(const std::string& s) {
  if (s == "inf") return kInfty;
  if (s == "-inf") return -kInfty;
  return std::stod(s);
}
}  // namespace

std::string to_string(TraceEvent e) {
  switch (e) {
    case TraceEvent::NodeSolved: return "NodeSolved";
    case TraceEvent::CutAdded: return "CutAdded";
    case TraceEvent::IncumbentUpdated: return "IncumbentUpdated";
    case TraceEvent::NodeFathomed: return "NodeFathomed";
    case TraceEvent::StoreRefresh: return "StoreRefresh";
  }
  return "?";
}

TraceEvent trace_event_from_string(const std::string& s) {
  if (s == "NodeSolved") return TraceEvent::NodeSolved;
  if (s == "CutAdded") return TraceEvent::CutAdded;
  if (s == "IncumbentUpdated") return TraceEvent::IncumbentUpdated;
  if (s == "NodeFathomed") return TraceEvent::NodeFathomed;
  if (s == "StoreRefresh") return TraceEvent::StoreRefresh;
  throw std::invalid_argument("unknown trace event: " + s);
}

double ConvergenceTrace::gap_metric(double ub, double lb) {
  if (!std::isfinite(ub) || !std::isfinite(lb) || lb == 0.0) return kInfty;
  return std::abs(ub - lb) / std::abs(lb);
}

void ConvergenceTrace::emit(TraceEvent event, double ub, double lb, long node_id,
                            int cut_round) {
  const auto now = std::chrono::steady_clock::now();
  const long ms =
      std::chrono::duration_cast<std::chrono::milliseconds>(now - start_).count();
  records_.push_back({ms, event, ub, lb, gap_metric(ub, lb), node_id, cut_round});
}

void ConvergenceTrace::write_csv(std::ostream& os) const {
  os << "wall_ms,event,ub,lb,gap,node_id,cut_round\n";
  for (const auto& r : records_) {
    os << r.wall_ms << ',' << to_string(r.event) << ',' << num_to_csv(r.ub) << ','
       << num_to_csv(r.lb) << ',' << num_to_csv(r.gap) << ',' << r.node_id << ','
       << r.cut_round << '\n';
  }
}

std::vector<TraceRecord> ConvergenceTrace::parse_csv(std::istream& is) {
  std::vector<TraceRecord> out;
  std::string line;
  if (!std::getline(is, line)) return out;
  if (line != "wall_ms,event,ub,lb,gap,node_id,cut_round") {
    throw std::invalid_argument("trace csv: unexpected header");
  }
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string field;
    TraceRecord r;
    std::getline(ss, field, ',');
    r.wall_ms = std::stol(field);
    std::getline(ss, field, ',');
    r.event = trace_event_from_string(field);
    std::getline(ss, field, ',');
    r.ub = csv_to_num(field);
    std::getline(ss, field, ',');
    r.lb = csv_to_num(field);
    std::getline(ss, field, ',');
    r.gap = csv_to_num(field);
    std::getline(ss, field, ',');
    r.node_id = std::stol(field);
    std::getline(ss, field, ',');
    r.cut_round = std::stoi(field);
    out.push_back(r);
  }
  return out;
}

}  // namespace rsbb
