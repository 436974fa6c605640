#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "grouploss/pipeline.hpp"

namespace grouploss::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInputError = 2;
inline constexpr int kExitUnestimable = 3;

struct EstimateArgs {
  std::filesystem::path input;
  RunConfig config;
  std::optional<std::filesystem::path> out;  // report JSON; stdout when unset
  std::optional<std::filesystem::path> diagram_out;
};

int cmd_estimate(const EstimateArgs& args, std::ostream& out, std::ostream& err);

struct SimulateArgs {
  std::filesystem::path spec;  // JSON file
  std::size_t n = 100000;
  std::uint64_t seed = 0;
  ScoringRule rule = ScoringRule::brier();
  std::size_t n_mc = 1000000;
  std::optional<std::filesystem::path> out;  // dataset CSV; stdout when unset
  std::optional<std::filesystem::path> oracle_out;
};

int cmd_simulate(const SimulateArgs& args, std::ostream& out, std::ostream& err);

enum class SweepAxis { Bins, RegionRatio };

struct SweepArgs {
  std::filesystem::path spec;
  SweepAxis axis = SweepAxis::RegionRatio;
  std::vector<std::size_t> values;
  std::size_t repeats = 10;
  std::size_t n = 100000;
  std::size_t n_mc = 1000000;
  RunConfig config;  // base configuration; the swept field is overridden
  std::optional<std::filesystem::path> out;
};

struct SweepRow {
  std::size_t value = 0;
  bool unestimable = false;
  double gl_lb = 0.0, gl_lb_sd = 0.0;
  double gl_plugin = 0.0, gl_plugin_sd = 0.0;
  double gl_explained = 0.0, gl_explained_sd = 0.0;
  double gl_induced = 0.0, gl_induced_sd = 0.0;
  double gl_true = 0.0, gl_true_se = 0.0;
};

/// Tree sweeps at region ratio < 2 yield a row flagged unestimable.
std::vector<SweepRow> run_sweep(const SweepArgs& args);
void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows, SweepAxis axis);
int cmd_sweep(const SweepArgs& args, std::ostream& out, std::ostream& err);

struct RecalibrateArgs {
  std::filesystem::path input;
  std::uint64_t seed = 0;
  std::size_t n_bins = 15;  // stratification bins for the split
  Reduction reduction{};
  std::optional<std::filesystem::path> out;
};

/// Fits isotonic regression on the train half and writes every row with its
/// recalibrated score in the binary CSV format.
int cmd_recalibrate(const RecalibrateArgs& args, std::ostream& out, std::ostream& err);

}  // namespace grouploss::cli
