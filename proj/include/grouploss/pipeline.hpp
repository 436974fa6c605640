#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

#include "grouploss/data.hpp"
#include "grouploss/partition.hpp"
#include "grouploss/report.hpp"
#include "grouploss/scoring.hpp"

namespace grouploss {

struct Reduction {
  enum class Kind { Auto, TopLabel, Classwise } kind = Kind::Auto;
  std::size_t class_index = 0;
};

/// "auto", "top-label" or "classwise:<k>".
Reduction parse_reduction(std::string_view text);
std::string to_string(const Reduction& reduction);

struct RunConfig {
  ScoringRule rule = ScoringRule::brier();
  std::size_t n_bins = 15;
  std::size_t region_ratio = 30;
  PartitionStrategy partition{};
  bool isotonic = false;
  static constexpr double split_fraction = 0.5;
  std::uint64_t seed = 0;
  Reduction reduction{};
  double bandwidth_fraction = 0.3;

  /// Throws std::invalid_argument on an out-of-range value.
  void validate() const;
};

/// Applies the configured reduction. Auto keeps K = 2 data native and uses
/// the top label otherwise.
BinaryView reduce(const LabeledDataset& ds, const Reduction& reduction);

/// Split, optional isotonic recalibration (fit on train, applied to all
/// rows), binning, partition fit on train, test-side estimation, and the
/// continuous calibration fit on all rows for the induced term.
GroupingReport estimate_binary(const BinaryView& bv, const RunConfig& config);
GroupingReport estimate_grouping(const LabeledDataset& ds, const RunConfig& config);

/// Stable JSON with the configuration echoed under "config".
std::string report_json(const GroupingReport& report, const RunConfig& config);

}  // namespace grouploss
