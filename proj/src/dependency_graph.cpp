#include "sloloop/dependency_graph.hpp"

#include <cmath>
#include <deque>

#include <fmt/format.h>

#include "sloloop/errors.hpp"

namespace sloloop {

std::string_view to_string(EdgeOrigin origin) {
  switch (origin) {
    case EdgeOrigin::declared: return "declared";
    case EdgeOrigin::membership: return "membership";
    case EdgeOrigin::measured: return "measured";
  }
  return "?";
}

void DependencyGraph::add_node(const std::string& node) { nodes_.insert(node); }

void DependencyGraph::add_edge(GraphEdge edge) {
  if (edge.origin == EdgeOrigin::measured && edge.from == edge.to) return;
  if (has_edge(edge.from, edge.to, edge.origin)) return;
  nodes_.insert(edge.from);
  nodes_.insert(edge.to);
  adjacency_[edge.from].insert(edge.to);
  edge_index_.emplace(std::tuple{edge.from, edge.to, edge.origin}, edges_.size());
  edges_.push_back(std::move(edge));
}

const GraphEdge* DependencyGraph::find_edge(const std::string& from, const std::string& to,
                                            EdgeOrigin origin) const {
  auto it = edge_index_.find(std::tuple{from, to, origin});
  return it == edge_index_.end() ? nullptr : &edges_[it->second];
}

bool DependencyGraph::has_edge(const std::string& from, const std::string& to,
                               EdgeOrigin origin) const {
  return find_edge(from, to, origin) != nullptr;
}

std::vector<std::string> DependencyGraph::path_to(const std::string& from,
                                                  const std::set<std::string>& targets) const {
  if (!nodes_.contains(from)) return {};
  std::map<std::string, std::string> parent;
  std::deque<std::string> frontier{from};
  parent[from] = from;
  while (!frontier.empty()) {
    std::string node = frontier.front();
    frontier.pop_front();
    if (targets.contains(node)) {
      std::vector<std::string> path{node};
      while (node != from) {
        node = parent.at(node);
        path.push_back(node);
      }
      return {path.rbegin(), path.rend()};
    }
    auto it = adjacency_.find(node);
    if (it == adjacency_.end()) continue;
    for (const auto& next : it->second) {
      if (parent.try_emplace(next, node).second) frontier.push_back(next);
    }
  }
  return {};
}

std::optional<int> DependencyGraph::hops_to(const std::string& from,
                                            const std::set<std::string>& targets) const {
  auto path = path_to(from, targets);
  if (path.empty()) return std::nullopt;
  return static_cast<int>(path.size()) - 1;
}

std::string DependencyGraph::export_edge_list() const {
  std::string out;
  for (const auto& e : edges_)
    out += fmt::format("{},{},{},{}\n", e.from, e.to, format_number(e.weight), to_string(e.origin));
  return out;
}

DependencyGraph build_dependency_graph(const Descriptor& d, const std::vector<CleanSeries>& batch,
                                       double min_abs_corr) {
  DependencyGraph g;
  for (const auto& c : d.components) g.add_node(c.id);
  for (const auto& dep : d.dependencies)
    g.add_edge({dep.from, dep.to, 1.0, EdgeOrigin::declared});

  auto add_membership = [&](const MetricKey& key) {
    const std::string node = key.node_name();
    g.add_node(node);
    g.add_edge({node, key.component, 1.0, EdgeOrigin::membership});
    g.add_edge({key.component, node, 1.0, EdgeOrigin::membership});
  };
  for (const auto& m : d.metrics) add_membership(m.key());
  for (const auto& s : batch) add_membership(s.key);

  for (std::size_t i = 0; i < batch.size(); ++i) {
    for (std::size_t j = i + 1; j < batch.size(); ++j) {
      const auto& a = batch[i];
      const auto& b = batch[j];
      if (a.start != b.start || a.step != b.step || a.values.size() != b.values.size())
        throw Error(ErrorCode::length_mismatch,
                    fmt::format("series '{}' and '{}' are not on a shared grid",
                                a.key.node_name(), b.key.node_name()));
      if (a.key == b.key) continue;
      const double r = correlation(a, b);
      if (std::abs(r) >= min_abs_corr) {
        g.add_edge({a.key.node_name(), b.key.node_name(), r, EdgeOrigin::measured});
        g.add_edge({b.key.node_name(), a.key.node_name(), r, EdgeOrigin::measured});
      }
    }
  }
  return g;
}

}  // namespace sloloop
