#include "sloloop/root_cause.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace sloloop {

std::vector<RootCause> infer_root_cause(const SystemStatus& status, const DependencyGraph& graph,
                                        const std::vector<AnomalyScore>& critical,
                                        double min_score) {
  std::vector<RootCause> causes;
  if (status.violated.empty()) return causes;

  std::set<std::string> targets;
  std::map<std::string, std::string> slo_of_node;
  for (const auto& v : status.violated) {
    const std::string node = v.metric.node_name();
    targets.insert(node);
    slo_of_node.emplace(node, v.slo);  // first violated SLO on a node wins
  }

  for (const auto& a : critical) {
    if (a.score < min_score) continue;
    const std::string node = a.metric.node_name();
    if (targets.contains(node)) continue;
    auto path = graph.path_to(node, targets);
    if (path.empty()) continue;
    RootCause c;
    c.component = a.metric.component;
    c.metric = a.metric;
    c.combined_score = a.combined;
    c.slo = slo_of_node.at(path.back());
    c.path = std::move(path);
    causes.push_back(std::move(c));
  }

  if (causes.empty()) {
    for (const auto& v : status.violated) {
      RootCause c;
      c.component = v.metric.component;
      c.metric = v.metric;
      c.combined_score = kUnreachableProximity;
      c.path = {v.metric.node_name()};
      c.slo = v.slo;
      c.fallback = true;
      causes.push_back(std::move(c));
    }
  }

  std::stable_sort(causes.begin(), causes.end(), [](const RootCause& a, const RootCause& b) {
    if (a.combined_score != b.combined_score) return a.combined_score > b.combined_score;
    return a.metric < b.metric;
  });
  return causes;
}

}  // namespace sloloop
