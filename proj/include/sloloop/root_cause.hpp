#pragma once

#include <string>
#include <vector>

#include "sloloop/critical_metrics.hpp"
#include "sloloop/dependency_graph.hpp"
#include "sloloop/status.hpp"

namespace sloloop {

struct RootCause {
  std::string component;
  MetricKey metric;
  double combined_score = 0.0;
  std::vector<std::string> path;  // cause metric node ... violated SLO metric node
  std::string slo;                // violated SLO the path ends at
  bool fallback = false;          // no anomalous upstream metric was found

  std::string summary() const { return metric.node_name(); }
};

/// Candidates are critical metrics whose raw score reaches `min_score` and
/// that have a directed path to a violated SLO metric node (the SLO metric
/// itself is the symptom, not a candidate). Ranked by combined score
/// descending, ties by (component, metric). Without candidates, each violated
/// SLO's own metric is returned as the cause of last resort.
std::vector<RootCause> infer_root_cause(const SystemStatus& status, const DependencyGraph& graph,
                                        const std::vector<AnomalyScore>& critical,
                                        double min_score = kCriticalityThreshold);

}  // namespace sloloop
