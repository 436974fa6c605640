#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "grouploss/binning.hpp"
#include "grouploss/data.hpp"

namespace grouploss {

enum class PartitionKind { Tree, BalancedStump, KMeans };

struct PartitionStrategy {
  PartitionKind kind = PartitionKind::Tree;
  std::size_t kmeans_k = 2;
  /// Fewest training rows a tree leaf may hold. Smaller leaves often end up
  /// with a single test row, which makes their bin unestimable.
  std::size_t tree_min_leaf = 15;

  friend bool operator==(const PartitionStrategy&, const PartitionStrategy&) = default;
};

/// "tree", "stump", "kmeans" or "kmeans:<k>".
PartitionStrategy parse_partition_strategy(std::string_view name);
std::string to_string(const PartitionStrategy& strategy);

/// Axis-aligned node; a leaf when feature < 0. Rows with x[feature] <=
/// threshold go left.
struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  std::size_t region = 0;
};

/// Total function from a feature vector to a region index in
/// [0, region_count()).
class RegionAssigner {
 public:
  RegionAssigner();  // single region
  static RegionAssigner from_tree(std::vector<TreeNode> nodes);
  static RegionAssigner from_centers(Matrix centers);

  std::size_t assign(std::span<const double> x) const;
  std::size_t region_count() const { return region_count_; }

  const std::vector<TreeNode>& nodes() const { return nodes_; }
  const Matrix& centers() const { return centers_; }

 private:
  std::vector<TreeNode> nodes_;
  Matrix centers_;
  std::size_t region_count_ = 1;
};

/// Greedy CART on squared loss of 0/1 labels, grown best-first until
/// `max_regions` leaves or no split with positive gain. Candidate thresholds
/// are midpoints between consecutive distinct values; gain ties go to the
/// lowest feature, then the lowest threshold.
RegionAssigner fit_tree(const Matrix& features, std::span<const int> labels,
                        std::span<const std::size_t> rows, std::size_t max_regions,
                        std::size_t min_leaf = 2);

/// One split minimizing squared loss with at least floor(n / 2) rows on each
/// side. Single region when the labels are constant or no split is feasible.
RegionAssigner fit_balanced_stump(const Matrix& features, std::span<const int> labels,
                                  std::span<const std::size_t> rows);

/// Lloyd iterations from a seeded k-means++ start; stops after max_iter or
/// when no centre moves more than tol.
RegionAssigner fit_kmeans(const Matrix& features, std::span<const std::size_t> rows, std::size_t k,
                          std::uint64_t seed, std::size_t max_iter = 100, double tol = 1e-6);

/// floor(n_train / region_ratio), at least 1.
std::size_t max_regions_for(std::size_t n_train, std::size_t region_ratio);

/// One region assigner per score bin, fitted on training rows only.
class PartitionModel {
 public:
  PartitionModel(std::vector<RegionAssigner> per_bin, PartitionStrategy strategy, std::size_t region_ratio);

  std::size_t n_bins() const { return per_bin_.size(); }
  const RegionAssigner& bin(std::size_t s) const { return per_bin_[s]; }
  const PartitionStrategy& strategy() const { return strategy_; }
  std::size_t region_ratio() const { return region_ratio_; }

 private:
  std::vector<RegionAssigner> per_bin_;
  PartitionStrategy strategy_;
  std::size_t region_ratio_;
};

/// Bins come from `bview.bin_of`; bins run in parallel. Bins with fewer than
/// two training rows get a single region. Throws std::invalid_argument when
/// there are no features or a tree is requested with region_ratio < 2.
PartitionModel fit_partition(const BinnedView& bview, const Matrix& features, std::span<const int> labels,
                             const SplitIndex& split, const PartitionStrategy& strategy,
                             std::size_t region_ratio, std::uint64_t seed);

/// Region of every row (train and test).
std::vector<std::size_t> assign_regions(const PartitionModel& model, const BinnedView& bview,
                                        const Matrix& features);

}  // namespace grouploss
