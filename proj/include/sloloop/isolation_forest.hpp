#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace sloloop {

using FeatureVector = std::vector<double>;

inline constexpr int kDefaultTrees = 100;
inline constexpr std::size_t kMaxSubsample = 256;

/// Average path length of an unsuccessful BST search over n points; the
/// normalizer for isolation path lengths.
double average_path_length(std::size_t n);

struct IsolationNode {
  int feature = -1;        // -1 marks an external node
  double split = 0.0;      // go left when x[feature] < split
  int left = -1;
  int right = -1;
  std::size_t size = 0;    // training points that reached this node
  int depth = 0;

  bool external() const { return feature < 0; }
};

/// Flat binary tree, root at index 0.
struct IsolationTree {
  std::vector<IsolationNode> nodes;

  /// Edges to the external node plus c(size) for unresolved leaves.
  double path_length(std::span<const double> point) const;
  int height() const;
};

class IsolationForest {
 public:
  /// Builds n_trees trees, each from a subsample drawn without replacement.
  /// subsample_size 0 selects min(256, n). Throws insufficient_data for fewer
  /// than two points and invalid_value for non-finite features or ragged input.
  static IsolationForest fit(const std::vector<FeatureVector>& points, int n_trees = kDefaultTrees,
                             std::size_t subsample_size = 0, std::uint64_t seed = 0);

  /// 2^(-E[h(x)] / c(subsample_size)), in (0, 1]. Throws dimension_mismatch.
  double score(std::span<const double> point) const;
  double mean_path_length(std::span<const double> point) const;

  const std::vector<IsolationTree>& trees() const { return trees_; }
  std::size_t subsample_size() const { return subsample_size_; }
  std::size_t dimension() const { return dimension_; }
  int n_trees() const { return static_cast<int>(trees_.size()); }
  std::uint64_t seed() const { return seed_; }
  int height_limit() const { return height_limit_; }

 private:
  std::vector<IsolationTree> trees_;
  std::size_t subsample_size_ = 0;
  std::size_t dimension_ = 0;
  std::uint64_t seed_ = 0;
  int height_limit_ = 0;
};

}  // namespace sloloop
