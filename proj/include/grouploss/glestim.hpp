#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "grouploss/binning.hpp"
#include "grouploss/calibration.hpp"
#include "grouploss/scoring.hpp"

namespace grouploss {

struct RegionCell {
  std::size_t region = 0;
  std::size_t count = 0;
  std::size_t positives = 0;
  double mean = 0.0;  // mu-hat_j
};

/// One (bin, class) cell: test rows of the bin split by region.
struct CellStats {
  std::size_t bin = 0;
  std::size_t count = 0;
  double c_hat = 0.0;
  std::vector<RegionCell> regions;  // nonempty regions, ascending index
};

struct RegionStats {
  std::size_t class_index = 0;
  std::size_t n = 0;  // test rows over all bins
  std::vector<CellStats> bins;
};

/// Counts and label means over `test_rows` only. `assignments` holds a region
/// for every row.
RegionStats region_stats(std::span<const std::size_t> assignments, const BinnedView& bview,
                         std::span<const int> labels, std::span<const std::size_t> test_rows,
                         std::size_t class_index = 0);

struct CellEstimate {
  double plugin = 0.0;
  double bias = 0.0;
  double explained = 0.0;
  bool estimable = true;       // false when some region has a single test row
  bool low_confidence = false;  // some region has fewer than 10 test rows
};

struct ExplainedEstimate {
  std::vector<CellEstimate> per_bin;
  double plugin = 0.0;
  double bias = 0.0;
  double explained = 0.0;  // unclipped
  bool debiased = true;    // false for log-loss
  std::vector<std::size_t> unestimable_bins;
  std::vector<std::size_t> low_confidence_bins;
  /// Every bin holding test rows is unestimable.
  bool all_unestimable = false;
};

/// Debiased between-region h-variance. Brier cells:
///   plugin = sum_j (n_j/n)(mu_j - c)^2
///   bias   = sum_j (n_j/n) mu_j(1 - mu_j)/(n_j - 1) - c(1 - c)/(n - 1)
/// Totals weight each cell by n_bin / n_test. Bins with a single-row region
/// are excluded from the totals (Brier only). Log-loss reports the plugin
/// value with zero bias and debiased = false.
ExplainedEstimate gl_explained_debiased(const RegionStats& stats, const ScoringRule& rule);

/// Sums estimates over several classes (classwise analyses). Cells of each
/// input are already weighted by their own n, so totals add.
ExplainedEstimate sum_over_classes(std::span<const ExplainedEstimate> parts);

struct InducedEstimate {
  std::vector<double> per_bin;
  double total = 0.0;
};

/// sum_s (n_s/n) [ mean_{i in s} h(C(S_i)) - h(mean_{i in s} C(S_i)) ] over the
/// rows the view's statistics cover. Log-loss inputs are clamped to
/// [1e-12, 1 - 1e-12].
InducedEstimate gl_induced_estimate(const CalibrationCurve& curve, const BinnedView& bview,
                                    std::span<const double> scores, const ScoringRule& rule);

double gl_lower_bound(double gl_explained, double gl_induced);

struct BinningBounds {
  /// Bounds on CL_induced + GL_induced using c-hat for C_B.
  double lower = 0.0;
  double upper = 0.0;
  /// Equal-width versions, independent of the within-bin score spread.
  double equal_width_lower = 0.0;
  double equal_width_upper = 0.0;
  /// E[sqrt(Var[S | S_B])] and E[sqrt(c(1 - c))] used above.
  double mean_score_sd = 0.0;
  double mean_c_sd = 0.0;
};

/// Binary Brier/Scalar only; throws std::invalid_argument otherwise.
BinningBounds binning_bounds(const BinnedView& bview, const ScoringRule& rule);

/// Lower bound on MSE(S, Q): CL_binned + GL_explained - upper.
double mse_lower_bound(double cl_binned, double gl_explained, double upper_correction);

/// Exact binomial interval at level 1 - alpha.
std::pair<double, double> clopper_pearson(std::size_t k, std::size_t n, double alpha = 0.05);

}  // namespace grouploss
