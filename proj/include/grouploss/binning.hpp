#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "grouploss/data.hpp"

namespace grouploss {

/// Equal-width bin of a score: floor(score * n_bins), with score = 1 in the
/// last bin. Throws std::domain_error outside [0, 1].
std::size_t bin_index(double score, std::size_t n_bins);

struct BinStats {
  std::size_t count = 0;
  double mean_score = 0.0;         // S_B; NaN when empty
  double positive_fraction = 0.0;  // empirical calibrated score c-hat; NaN when empty
  double score_variance = 0.0;     // population variance of scores in the bin
};

/// Equal-width binning of a binary problem. Every row gets a bin; the per-bin
/// statistics cover only the rows the view was built from.
class BinnedView {
 public:
  BinnedView(std::span<const double> scores, std::span<const int> labels, std::size_t n_bins,
             std::span<const std::size_t> rows);

  std::size_t n_bins() const { return stats_.size(); }
  const std::vector<double>& edges() const { return edges_; }
  std::size_t bin_of(std::size_t row) const { return bin_of_[row]; }
  const std::vector<std::size_t>& bin_assignment() const { return bin_of_; }
  const BinStats& stats(std::size_t bin) const { return stats_[bin]; }
  const std::vector<std::size_t>& members(std::size_t bin) const { return members_[bin]; }
  /// Rows covered by the statistics.
  std::size_t total_count() const { return total_; }

 private:
  std::vector<double> edges_;
  std::vector<std::size_t> bin_of_;
  std::vector<BinStats> stats_;
  std::vector<std::vector<std::size_t>> members_;
  std::size_t total_ = 0;
};

/// Bins all rows; statistics over `rows` (every row when empty).
BinnedView make_bins(const BinaryView& bv, std::size_t n_bins, std::span<const std::size_t> rows = {});
BinnedView make_bins(std::span<const double> scores, std::span<const int> labels, std::size_t n_bins,
                     std::span<const std::size_t> rows = {});

struct WithinBinVariance {
  std::vector<double> per_bin;
  double weighted_total = 0.0;  // E[Var[S | S_B]]
};

/// Empty bins report 0 and carry no weight.
WithinBinVariance within_bin_score_variance(const BinnedView& bview);

}  // namespace grouploss
