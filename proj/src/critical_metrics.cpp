#include "sloloop/critical_metrics.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "sloloop/errors.hpp"

namespace sloloop {

FeatureVector window_features(std::span<const double> values) {
  if (values.empty()) throw Error(ErrorCode::insufficient_data, "empty feature window");
  return {mean_of(values), stddev_of(values), slope_of(values), values.back()};
}

std::set<std::string> slo_metric_nodes(const Descriptor& d) {
  std::set<std::string> nodes;
  for (const auto& s : d.slos) nodes.insert(s.key().node_name());
  return nodes;
}

double proximity_weight(const DependencyGraph& graph, const MetricKey& metric,
                        const std::set<std::string>& slo_nodes) {
  auto hops = graph.hops_to(metric.node_name(), slo_nodes);
  if (!hops) return kUnreachableProximity;
  return 1.0 / (1.0 + *hops);
}

std::vector<CleanSeries> collect_batch(const Descriptor& d, const MetricStore& store, Tick t0,
                                       Tick t1) {
  std::vector<CleanSeries> batch;
  for (const auto& m : d.metrics) {
    if (!store.contains(m.key())) continue;
    TimeSeries ts = store.query_window(m.key(), t0, t1);
    const auto observed = std::count_if(ts.samples.begin(), ts.samples.end(),
                                        [](const Sample& s) { return !s.missing(); });
    if (observed < 2) continue;
    batch.push_back(clean_and_interpolate(ts, 1, std::pair{t0, t1}));
  }
  return batch;
}

std::vector<AnomalyScore> score_batch(const Descriptor& d, const std::vector<CleanSeries>& batch,
                                      const DependencyGraph& graph,
                                      const CriticalMetricsOptions& options) {
  const auto W = static_cast<std::size_t>(options.feature_window);
  if (W < 2) throw Error(ErrorCode::invalid_value, "feature window must be >= 2 ticks");
  if (batch.empty())
    throw Error(ErrorCode::insufficient_data, "no watched metric has data in the window");
  const std::size_t n = batch.front().values.size();
  if (n < W)
    throw Error(ErrorCode::insufficient_data,
                fmt::format("window of {} ticks is shorter than the feature window {}", n, W));

  std::vector<std::vector<double>> normalized;
  normalized.reserve(batch.size());
  for (const auto& s : batch) {
    if (s.values.size() != n)
      throw Error(ErrorCode::length_mismatch, "batch series must share one grid");
    normalized.push_back(minmax_normalize(s.values));
  }

  const std::size_t current_start = n - W;
  const auto stride = static_cast<std::size_t>(std::max<Tick>(1, options.history_stride));
  std::vector<FeatureVector> history;
  std::vector<FeatureVector> current;
  for (const auto& values : normalized) {
    std::span<const double> all(values);
    current.push_back(window_features(all.subspan(current_start, W)));
    for (std::size_t back = stride; back <= current_start; back += stride)
      history.push_back(window_features(all.subspan(current_start - back, W)));
  }

  const std::vector<FeatureVector>& training = history.size() >= 2 ? history : current;
  if (training.size() < 2)
    throw Error(ErrorCode::insufficient_data, "not enough feature windows to fit the forest");
  const auto forest = IsolationForest::fit(training, options.n_trees, 0, options.seed);

  const auto slo_nodes = slo_metric_nodes(d);
  const Tick t1 = batch.front().start + static_cast<Tick>(n - 1) * batch.front().step;
  const Tick t0 = t1 - static_cast<Tick>(W - 1) * batch.front().step;
  std::vector<AnomalyScore> out;
  out.reserve(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    AnomalyScore a;
    a.metric = batch[i].key;
    a.score = forest.score(current[i]);
    a.proximity = proximity_weight(graph, a.metric, slo_nodes);
    a.combined = a.score * a.proximity;
    a.t0 = t0;
    a.t1 = t1;
    out.push_back(std::move(a));
  }
  std::sort(out.begin(), out.end(), [](const AnomalyScore& x, const AnomalyScore& y) {
    if (x.combined != y.combined) return x.combined > y.combined;
    return x.metric < y.metric;
  });
  return out;
}

std::vector<AnomalyScore> extract_critical_metrics(const Descriptor& d, const MetricStore& store,
                                                   const DependencyGraph& graph, Tick t0, Tick t1,
                                                   const CriticalMetricsOptions& options) {
  if (t1 - t0 + 1 < options.feature_window)
    throw Error(ErrorCode::insufficient_data,
                fmt::format("window [{}, {}] is shorter than the feature window {}", t0, t1,
                            options.feature_window));
  return score_batch(d, collect_batch(d, store, t0, t1), graph, options);
}

}  // namespace sloloop
