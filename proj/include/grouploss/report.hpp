#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "grouploss/glestim.hpp"
#include "grouploss/scoring.hpp"

namespace grouploss {

struct DiagramRegion {
  std::size_t region_index = 0;
  double mu_hat = 0.0;
  std::size_t n_region = 0;
  double cp_lo = 0.0;
  double cp_hi = 1.0;
  bool grayed = false;  // c-hat of the bin lies inside [cp_lo, cp_hi]
};

struct DiagramBin {
  std::size_t bin_index = 0;
  double s_lo = 0.0;
  double s_hi = 0.0;
  double s_b = 0.0;    // NaN for an empty bin
  double c_hat = 0.0;  // NaN for an empty bin
  std::size_t n_bin = 0;
  bool estimable = true;
  bool low_confidence = false;
  std::vector<DiagramRegion> regions;
};

struct MseBounds {
  BinningBounds binning;
  double mse_lower_bound = 0.0;             // CL + GL_explained - upper
  double mse_lower_bound_equal_width = 0.0;  // CL + GL_explained - equal_width_upper
};

struct GroupingReport {
  ScoringRule rule;
  std::size_t n_bins = 0;
  std::size_t region_ratio = 0;
  std::size_t n_rows = 0;
  std::size_t n_train = 0;
  std::size_t n_test = 0;

  double cl_binned = 0.0;
  bool cl_infinite = false;
  double gl_plugin = 0.0;
  double gl_bias = 0.0;
  double gl_explained = 0.0;
  double gl_induced = 0.0;
  double gl_lb = 0.0;
  double gl_lb_clipped = 0.0;
  bool debiased = true;

  std::optional<MseBounds> bounds;  // scalar Brier only
  std::vector<std::size_t> unestimable_bins;
  std::vector<std::size_t> low_confidence_bins;
  bool all_unestimable = false;
  std::vector<DiagramBin> bins;
};

struct ReportInputs {
  ScoringRule rule;
  std::size_t region_ratio = 0;
  std::size_t n_rows = 0;
  std::size_t n_train = 0;
  const BinnedView* test_bins = nullptr;  // statistics over test rows
  const RegionStats* stats = nullptr;
  const ExplainedEstimate* explained = nullptr;
  const InducedEstimate* induced = nullptr;
  CalibrationLoss cl;
};

/// Assembles totals, bounds and diagram records. Clopper-Pearson intervals
/// are at 95%.
GroupingReport build_report(const ReportInputs& in);

/// Diagram CSV: one row per (bin, region); empty bins get one row with blank
/// region fields.
void write_diagram_csv(std::ostream& out, const GroupingReport& report);

}  // namespace grouploss
