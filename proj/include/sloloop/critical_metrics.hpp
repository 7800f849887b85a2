#pragma once

#include <cstdint>
#include <vector>

#include "sloloop/dependency_graph.hpp"
#include "sloloop/descriptor.hpp"
#include "sloloop/isolation_forest.hpp"
#include "sloloop/telemetry.hpp"

namespace sloloop {

inline constexpr double kCriticalityThreshold = 0.6;
inline constexpr double kUnreachableProximity = 0.01;

struct CriticalMetricsOptions {
  Tick feature_window = 30;   // W
  Tick history_stride = 5;    // spacing of historical windows
  int n_trees = kDefaultTrees;
  std::uint64_t seed = 0;
};

struct AnomalyScore {
  MetricKey metric;
  double score = 0.0;      // isolation-forest score in [0, 1]
  double proximity = 0.0;  // 1 / (1 + hops) to the nearest SLO metric node
  double combined = 0.0;   // score * proximity; the ranking key
  Tick t0 = 0;
  Tick t1 = 0;
};

/// (mean, population std, least-squares slope, last value).
FeatureVector window_features(std::span<const double> values);

/// 1 / (1 + hops) from the metric node to the nearest SLO metric node, or
/// kUnreachableProximity when no directed path exists.
double proximity_weight(const DependencyGraph& graph, const MetricKey& metric,
                        const std::set<std::string>& slo_nodes);

std::set<std::string> slo_metric_nodes(const Descriptor& d);

/// Loads every descriptor metric over [t0, t1] and resamples it onto the
/// shared unit grid. Metrics with fewer than two observations are skipped.
std::vector<CleanSeries> collect_batch(const Descriptor& d, const MetricStore& store, Tick t0,
                                       Tick t1);

/// Scores the last W ticks of every watched metric with an isolation forest
/// fit on the historical windows of all watched metrics (cross-sectionally on
/// the current windows when no history precedes them), weights by graph
/// proximity, and ranks by combined score descending with ties in
/// (component, metric) order. Throws insufficient_data when the window is
/// shorter than W or no watched metric has data.
std::vector<AnomalyScore> extract_critical_metrics(const Descriptor& d, const MetricStore& store,
                                                   const DependencyGraph& graph, Tick t0, Tick t1,
                                                   const CriticalMetricsOptions& options = {});

/// Same, on an already collected batch.
std::vector<AnomalyScore> score_batch(const Descriptor& d, const std::vector<CleanSeries>& batch,
                                      const DependencyGraph& graph,
                                      const CriticalMetricsOptions& options = {});

}  // namespace sloloop
