#include "sloloop/isolation_forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "sloloop/errors.hpp"
#include "sloloop/random.hpp"

namespace sloloop {

namespace {

constexpr double kEulerGamma = 0.5772156649015329;

struct TreeBuilder {
  const std::vector<FeatureVector>& points;
  std::size_t dimension;
  int height_limit;
  RandomStream& rng;
  IsolationTree tree;

  int build(std::vector<std::size_t>& idx, std::size_t begin, std::size_t end, int depth) {
    const int id = static_cast<int>(tree.nodes.size());
    tree.nodes.push_back({});
    tree.nodes[id].size = end - begin;
    tree.nodes[id].depth = depth;
    if (depth >= height_limit || end - begin <= 1) return id;

    // Attributes that still separate the points at this node.
    std::vector<std::size_t> candidates;
    std::vector<std::pair<double, double>> ranges(dimension);
    for (std::size_t f = 0; f < dimension; ++f) {
      double lo = points[idx[begin]][f];
      double hi = lo;
      for (std::size_t i = begin + 1; i < end; ++i) {
        lo = std::min(lo, points[idx[i]][f]);
        hi = std::max(hi, points[idx[i]][f]);
      }
      ranges[f] = {lo, hi};
      if (hi > lo) candidates.push_back(f);
    }
    if (candidates.empty()) return id;

    const std::size_t feature = candidates[rng.below(candidates.size())];
    const auto [lo, hi] = ranges[feature];
    const double split = rng.uniform(lo, hi);

    auto mid_it = std::partition(idx.begin() + static_cast<std::ptrdiff_t>(begin),
                                 idx.begin() + static_cast<std::ptrdiff_t>(end),
                                 [&](std::size_t i) { return points[i][feature] < split; });
    const auto mid = static_cast<std::size_t>(mid_it - idx.begin());

    tree.nodes[id].feature = static_cast<int>(feature);
    tree.nodes[id].split = split;
    const int left = build(idx, begin, mid, depth + 1);
    const int right = build(idx, mid, end, depth + 1);
    tree.nodes[id].left = left;
    tree.nodes[id].right = right;
    return id;
  }
};

}  // namespace

double average_path_length(std::size_t n) {
  if (n <= 1) return 0.0;
  if (n == 2) return 1.0;
  const double m = static_cast<double>(n);
  const double harmonic = std::log(m - 1.0) + kEulerGamma;
  return 2.0 * harmonic - 2.0 * (m - 1.0) / m;
}

double IsolationTree::path_length(std::span<const double> point) const {
  int id = 0;
  while (!nodes[id].external()) {
    const auto& node = nodes[id];
    id = point[node.feature] < node.split ? node.left : node.right;
  }
  return static_cast<double>(nodes[id].depth) + average_path_length(nodes[id].size);
}

int IsolationTree::height() const {
  int h = 0;
  for (const auto& n : nodes) h = std::max(h, n.depth);
  return h;
}

IsolationForest IsolationForest::fit(const std::vector<FeatureVector>& points, int n_trees,
                                     std::size_t subsample_size, std::uint64_t seed) {
  if (points.size() < 2)
    throw Error(ErrorCode::insufficient_data, "isolation forest needs at least 2 points");
  if (n_trees < 1) throw Error(ErrorCode::invalid_value, "n_trees must be >= 1");
  const std::size_t dim = points.front().size();
  if (dim == 0) throw Error(ErrorCode::invalid_value, "feature vectors must be non-empty");
  for (const auto& p : points) {
    if (p.size() != dim)
      throw Error(ErrorCode::dimension_mismatch, "feature vectors must share one dimension");
    for (double v : p)
      if (!std::isfinite(v))
        throw Error(ErrorCode::invalid_value, "feature vectors must be finite");
  }

  IsolationForest forest;
  forest.dimension_ = dim;
  forest.seed_ = seed;
  forest.subsample_size_ =
      subsample_size == 0 ? std::min(kMaxSubsample, points.size())
                          : std::min(subsample_size, points.size());
  if (forest.subsample_size_ < 2)
    throw Error(ErrorCode::invalid_value, "subsample_size must be >= 2");
  forest.height_limit_ =
      static_cast<int>(std::ceil(std::log2(static_cast<double>(forest.subsample_size_))));

  RandomStream rng(seed);
  std::vector<std::size_t> all(points.size());
  forest.trees_.reserve(static_cast<std::size_t>(n_trees));
  for (int t = 0; t < n_trees; ++t) {
    std::iota(all.begin(), all.end(), std::size_t{0});
    // Partial Fisher-Yates: the first subsample_size slots form the draw.
    for (std::size_t i = 0; i < forest.subsample_size_; ++i) {
      const std::size_t j = i + rng.below(all.size() - i);
      std::swap(all[i], all[j]);
    }
    std::vector<std::size_t> idx(all.begin(),
                                 all.begin() + static_cast<std::ptrdiff_t>(forest.subsample_size_));
    TreeBuilder builder{points, dim, forest.height_limit_, rng, {}};
    builder.build(idx, 0, idx.size(), 0);
    forest.trees_.push_back(std::move(builder.tree));
  }
  return forest;
}

double IsolationForest::mean_path_length(std::span<const double> point) const {
  if (point.size() != dimension_)
    throw Error(ErrorCode::dimension_mismatch,
                fmt::format("point has dimension {}, model expects {}", point.size(), dimension_));
  double total = 0.0;
  for (const auto& tree : trees_) total += tree.path_length(point);
  return total / static_cast<double>(trees_.size());
}

double IsolationForest::score(std::span<const double> point) const {
  const double h = mean_path_length(point);
  return std::exp2(-h / average_path_length(subsample_size_));
}

}  // namespace sloloop
