#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "sloloop/descriptor.hpp"
#include "sloloop/preprocess.hpp"

namespace sloloop {

inline constexpr double kDefaultMinAbsCorrelation = 0.7;

enum class EdgeOrigin {
  declared,    // Descriptor.dependencies, weight 1
  membership,  // metric node <-> owning component, weight 1
  measured,    // |Pearson| >= threshold between two metric series
};

std::string_view to_string(EdgeOrigin origin);

struct GraphEdge {
  std::string from;
  std::string to;
  double weight = 1.0;
  EdgeOrigin origin = EdgeOrigin::declared;
  bool operator==(const GraphEdge&) const = default;
};

/// Nodes are component ids and metric nodes named "component/metric".
class DependencyGraph {
 public:
  void add_node(const std::string& node);
  void add_edge(GraphEdge edge);

  const std::set<std::string>& nodes() const { return nodes_; }
  const std::vector<GraphEdge>& edges() const { return edges_; }
  bool has_edge(const std::string& from, const std::string& to, EdgeOrigin origin) const;
  const GraphEdge* find_edge(const std::string& from, const std::string& to,
                             EdgeOrigin origin) const;

  /// Shortest directed hop count from `from` to any node in `targets`.
  std::optional<int> hops_to(const std::string& from, const std::set<std::string>& targets) const;

  /// Shortest directed path (inclusive) from `from` to the nearest target;
  /// empty when unreachable. Ties resolve to the lexicographically smaller
  /// neighbor at each step.
  std::vector<std::string> path_to(const std::string& from,
                                   const std::set<std::string>& targets) const;

  /// `from,to,weight,origin` per line.
  std::string export_edge_list() const;

 private:
  std::set<std::string> nodes_;
  std::vector<GraphEdge> edges_;
  std::map<std::string, std::set<std::string>> adjacency_;
  std::map<std::tuple<std::string, std::string, EdgeOrigin>, std::size_t> edge_index_;
};

/// Declared component edges, metric membership edges, plus a measured edge in
/// both directions for every metric pair with |correlation| >= min_abs_corr.
/// All batch series must share one grid.
DependencyGraph build_dependency_graph(const Descriptor& d, const std::vector<CleanSeries>& batch,
                                       double min_abs_corr = kDefaultMinAbsCorrelation);

}  // namespace sloloop
