#include "grouploss/partition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "grouploss/parallel.hpp"
#include "grouploss/random.hpp"

namespace grouploss {

namespace {

// Squared error of n binary labels with `pos` positives.
double sse(double n, double pos) { return n > 0.0 ? pos - pos * pos / n : 0.0; }

struct Split {
  double gain = 0.0;
  int feature = -1;
  double threshold = 0.0;
  bool found = false;
};

// Midpoint that keeps `lo` on the left and `hi` on the right.
double midpoint(double lo, double hi) {
  const double m = lo + (hi - lo) / 2.0;
  return (m >= hi || m < lo) ? lo : m;
}

bool better(double gain, const Split& best) {
  return !best.found || gain > best.gain + 1e-12 * std::max(1.0, std::abs(best.gain));
}

// Scans every feature for the best split. `allowed(left_count, n)` decides
// which left sizes are admissible.
template <typename Admissible>
Split best_split(const Matrix& features, std::span<const int> labels, const std::vector<std::size_t>& rows,
                 Admissible allowed) {
  Split best;
  const std::size_t n = rows.size();
  if (n < 2) return best;
  double total_pos = 0.0;
  for (std::size_t i : rows) total_pos += labels[i];
  const double parent = sse(static_cast<double>(n), total_pos);

  std::vector<std::pair<double, int>> column(n);
  for (std::size_t f = 0; f < features.cols(); ++f) {
    for (std::size_t r = 0; r < n; ++r) column[r] = {features(rows[r], f), labels[rows[r]]};
    std::sort(column.begin(), column.end());
    double left_pos = 0.0;
    for (std::size_t r = 0; r + 1 < n; ++r) {
      left_pos += column[r].second;
      if (!(column[r].first < column[r + 1].first)) continue;
      const std::size_t left = r + 1;
      if (!allowed(left, n)) continue;
      const double gain = parent - sse(static_cast<double>(left), left_pos) -
                          sse(static_cast<double>(n - left), total_pos - left_pos);
      if (better(gain, best)) {
        best.gain = gain;
        best.feature = static_cast<int>(f);
        best.threshold = midpoint(column[r].first, column[r + 1].first);
        best.found = true;
      }
    }
  }
  return best;
}

void partition_rows(const Matrix& features, const Split& split, const std::vector<std::size_t>& rows,
                    std::vector<std::size_t>& left, std::vector<std::size_t>& right) {
  for (std::size_t i : rows) {
    (features(i, static_cast<std::size_t>(split.feature)) <= split.threshold ? left : right).push_back(i);
  }
}

// Numbers leaves 0.. in depth-first order.
std::size_t number_leaves(std::vector<TreeNode>& nodes) {
  std::size_t next = 0;
  std::vector<int> stack{0};
  while (!stack.empty()) {
    TreeNode& node = nodes[static_cast<std::size_t>(stack.back())];
    stack.pop_back();
    if (node.feature < 0) {
      node.region = next++;
    } else {
      stack.push_back(node.right);
      stack.push_back(node.left);
    }
  }
  return next;
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double d = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) d += (a[j] - b[j]) * (a[j] - b[j]);
  return d;
}

std::size_t nearest_center(const Matrix& centers, std::span<const double> x) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centers.rows(); ++c) {
    const double d = squared_distance(centers.row(c), x);
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return best;
}

}  // namespace

PartitionStrategy parse_partition_strategy(std::string_view name) {
  if (name == "tree") return {PartitionKind::Tree, 2};
  if (name == "stump") return {PartitionKind::BalancedStump, 2};
  if (name == "kmeans") return {PartitionKind::KMeans, 2};
  if (name.rfind("kmeans:", 0) == 0) {
    const std::string k(name.substr(7));
    std::size_t pos = 0;
    unsigned long v = 0;
    try {
      v = std::stoul(k, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != k.size() || v < 1) throw std::invalid_argument("bad k-means cluster count: " + k);
    return {PartitionKind::KMeans, v};
  }
  throw std::invalid_argument("unknown partition strategy: " + std::string(name));
}

std::string to_string(const PartitionStrategy& strategy) {
  switch (strategy.kind) {
    case PartitionKind::Tree: return "tree";
    case PartitionKind::BalancedStump: return "stump";
    case PartitionKind::KMeans: return "kmeans:" + std::to_string(strategy.kmeans_k);
  }
  return "tree";
}

RegionAssigner::RegionAssigner() : nodes_{TreeNode{}} {}

RegionAssigner RegionAssigner::from_tree(std::vector<TreeNode> nodes) {
  if (nodes.empty()) throw std::invalid_argument("empty tree");
  RegionAssigner a;
  a.nodes_ = std::move(nodes);
  a.region_count_ = number_leaves(a.nodes_);
  return a;
}

RegionAssigner RegionAssigner::from_centers(Matrix centers) {
  if (centers.rows() == 0) throw std::invalid_argument("no centres");
  RegionAssigner a;
  a.nodes_.clear();
  a.region_count_ = centers.rows();
  a.centers_ = std::move(centers);
  return a;
}

std::size_t RegionAssigner::assign(std::span<const double> x) const {
  if (nodes_.empty()) return nearest_center(centers_, x);
  std::size_t at = 0;
  while (nodes_[at].feature >= 0) {
    const TreeNode& node = nodes_[at];
    at = static_cast<std::size_t>(x[static_cast<std::size_t>(node.feature)] <= node.threshold ? node.left
                                                                                                : node.right);
  }
  return nodes_[at].region;
}

RegionAssigner fit_tree(const Matrix& features, std::span<const int> labels, std::span<const std::size_t> rows,
                        std::size_t max_regions, std::size_t min_leaf) {
  if (features.cols() == 0) throw std::invalid_argument("partitioning needs features");
  min_leaf = std::max<std::size_t>(min_leaf, 1);
  auto admissible = [min_leaf](std::size_t left, std::size_t n) { return left >= min_leaf && n - left >= min_leaf; };

  struct Leaf {
    int node;
    std::vector<std::size_t> rows;
    Split split;
  };
  std::vector<TreeNode> nodes{TreeNode{}};
  std::vector<Leaf> open;
  std::vector<std::size_t> root_rows(rows.begin(), rows.end());
  open.push_back({0, root_rows, best_split(features, labels, root_rows, admissible)});
  std::size_t leaves = 1;

  while (leaves < max_regions) {
    // Largest gain first; earlier leaves win ties.
    std::size_t pick = open.size();
    for (std::size_t i = 0; i < open.size(); ++i) {
      if (!open[i].split.found || open[i].split.gain <= 1e-12) continue;
      if (pick == open.size() || open[i].split.gain > open[pick].split.gain) pick = i;
    }
    if (pick == open.size()) break;

    Leaf leaf = std::move(open[pick]);
    open.erase(open.begin() + static_cast<std::ptrdiff_t>(pick));
    std::vector<std::size_t> left_rows, right_rows;
    partition_rows(features, leaf.split, leaf.rows, left_rows, right_rows);

    const int left_id = static_cast<int>(nodes.size());
    nodes.push_back(TreeNode{});
    nodes.push_back(TreeNode{});
    TreeNode& parent = nodes[static_cast<std::size_t>(leaf.node)];
    parent.feature = leaf.split.feature;
    parent.threshold = leaf.split.threshold;
    parent.left = left_id;
    parent.right = left_id + 1;
    ++leaves;

    Split ls = best_split(features, labels, left_rows, admissible);
    Split rs = best_split(features, labels, right_rows, admissible);
    open.push_back({left_id, std::move(left_rows), ls});
    open.push_back({left_id + 1, std::move(right_rows), rs});
  }
  return RegionAssigner::from_tree(std::move(nodes));
}

RegionAssigner fit_balanced_stump(const Matrix& features, std::span<const int> labels,
                                  std::span<const std::size_t> rows) {
  if (features.cols() == 0) throw std::invalid_argument("partitioning needs features");
  std::vector<std::size_t> r(rows.begin(), rows.end());
  if (r.size() < 2) return RegionAssigner();
  const bool constant = std::all_of(r.begin(), r.end(), [&](std::size_t i) { return labels[i] == labels[r[0]]; });
  if (constant) return RegionAssigner();

  const Split split = best_split(features, labels, r, [](std::size_t left, std::size_t n) {
    const std::size_t half = n / 2;
    return left >= half && n - left >= half;
  });
  if (!split.found) return RegionAssigner();
  std::vector<TreeNode> nodes(3);
  nodes[0].feature = split.feature;
  nodes[0].threshold = split.threshold;
  nodes[0].left = 1;
  nodes[0].right = 2;
  return RegionAssigner::from_tree(std::move(nodes));
}

RegionAssigner fit_kmeans(const Matrix& features, std::span<const std::size_t> rows, std::size_t k,
                          std::uint64_t seed, std::size_t max_iter, double tol) {
  if (features.cols() == 0) throw std::invalid_argument("partitioning needs features");
  if (rows.size() < 2 || k <= 1) return RegionAssigner();
  const std::size_t d = features.cols();
  Rng rng(seed);

  // k-means++ seeding
  std::vector<std::size_t> chosen{rows[uniform_index(rng, rows.size())]};
  std::vector<double> dist(rows.size(), std::numeric_limits<double>::infinity());
  while (chosen.size() < k) {
    double total = 0.0;
    for (std::size_t r = 0; r < rows.size(); ++r) {
      dist[r] = std::min(dist[r], squared_distance(features.row(rows[r]), features.row(chosen.back())));
      total += dist[r];
    }
    if (total <= 0.0) break;  // fewer distinct points than k
    double target = uniform01(rng) * total;
    std::size_t pick = rows.size() - 1;
    for (std::size_t r = 0; r < rows.size(); ++r) {
      target -= dist[r];
      if (target < 0.0 && dist[r] > 0.0) {
        pick = r;
        break;
      }
    }
    chosen.push_back(rows[pick]);
  }

  Matrix centers(chosen.size(), d);
  for (std::size_t c = 0; c < chosen.size(); ++c) std::copy_n(features.row(chosen[c]).begin(), d, centers.row(c).begin());

  Matrix sums(centers.rows(), d);
  std::vector<std::size_t> counts(centers.rows());
  for (std::size_t it = 0; it < max_iter; ++it) {
    std::fill(counts.begin(), counts.end(), 0);
    sums = Matrix(centers.rows(), d);
    for (std::size_t i : rows) {
      const std::size_t c = nearest_center(centers, features.row(i));
      ++counts[c];
      auto srow = sums.row(c);
      const auto x = features.row(i);
      for (std::size_t j = 0; j < d; ++j) srow[j] += x[j];
    }
    double moved = 0.0;
    for (std::size_t c = 0; c < centers.rows(); ++c) {
      if (counts[c] == 0) continue;  // empty cluster keeps its centre
      auto crow = centers.row(c);
      double shift = 0.0;
      for (std::size_t j = 0; j < d; ++j) {
        const double v = sums(c, j) / static_cast<double>(counts[c]);
        shift += (v - crow[j]) * (v - crow[j]);
        crow[j] = v;
      }
      moved = std::max(moved, std::sqrt(shift));
    }
    if (moved < tol) break;
  }
  return RegionAssigner::from_centers(std::move(centers));
}

std::size_t max_regions_for(std::size_t n_train, std::size_t region_ratio) {
  if (region_ratio == 0) throw std::invalid_argument("region_ratio must be positive");
  return std::max<std::size_t>(1, n_train / region_ratio);
}

PartitionModel::PartitionModel(std::vector<RegionAssigner> per_bin, PartitionStrategy strategy,
                               std::size_t region_ratio)
    : per_bin_(std::move(per_bin)), strategy_(strategy), region_ratio_(region_ratio) {}

PartitionModel fit_partition(const BinnedView& bview, const Matrix& features, std::span<const int> labels,
                             const SplitIndex& split, const PartitionStrategy& strategy,
                             std::size_t region_ratio, std::uint64_t seed) {
  if (features.cols() == 0) throw std::invalid_argument("partitioning needs features");
  if (features.rows() != bview.bin_assignment().size()) throw std::invalid_argument("features/bins row mismatch");
  if (strategy.kind == PartitionKind::Tree && region_ratio < 2)
    throw std::invalid_argument("tree partitions need region_ratio >= 2");

  std::vector<std::vector<std::size_t>> train(bview.n_bins());
  for (std::size_t i : split.train_rows) train[bview.bin_of(i)].push_back(i);

  std::vector<RegionAssigner> per_bin(bview.n_bins());
  parallel_for(bview.n_bins(), [&](std::size_t s) {
    const auto& rows = train[s];
    if (rows.size() < 2) return;
    switch (strategy.kind) {
      case PartitionKind::Tree:
        per_bin[s] = fit_tree(features, labels, rows, max_regions_for(rows.size(), region_ratio),
                              strategy.tree_min_leaf);
        break;
      case PartitionKind::BalancedStump:
        per_bin[s] = fit_balanced_stump(features, labels, rows);
        break;
      case PartitionKind::KMeans:
        per_bin[s] = fit_kmeans(features, rows, strategy.kmeans_k, derive_seed(seed, s));
        break;
    }
  });
  return PartitionModel(std::move(per_bin), strategy, region_ratio);
}

std::vector<std::size_t> assign_regions(const PartitionModel& model, const BinnedView& bview,
                                        const Matrix& features) {
  if (model.n_bins() != bview.n_bins()) throw std::invalid_argument("model/bins mismatch");
  std::vector<std::size_t> out(features.rows());
  for (std::size_t i = 0; i < features.rows(); ++i) out[i] = model.bin(bview.bin_of(i)).assign(features.row(i));
  return out;
}

}  // namespace grouploss
