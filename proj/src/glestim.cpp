#include "grouploss/glestim.hpp"

#include <algorithm>
#include <boost/math/special_functions/beta.hpp>
#include <cmath>
#include <map>
#include <stdexcept>

namespace grouploss {

RegionStats region_stats(std::span<const std::size_t> assignments, const BinnedView& bview,
                         std::span<const int> labels, std::span<const std::size_t> test_rows,
                         std::size_t class_index) {
  if (assignments.size() != bview.bin_assignment().size() || labels.size() != assignments.size())
    throw std::invalid_argument("region_stats: row count mismatch");

  std::vector<std::map<std::size_t, std::pair<std::size_t, std::size_t>>> acc(bview.n_bins());
  for (std::size_t i : test_rows) {
    auto& cell = acc[bview.bin_of(i)][assignments[i]];
    ++cell.first;
    cell.second += labels[i] == 1 ? 1 : 0;
  }

  RegionStats out;
  out.class_index = class_index;
  out.n = test_rows.size();
  out.bins.resize(bview.n_bins());
  for (std::size_t s = 0; s < bview.n_bins(); ++s) {
    CellStats& cell = out.bins[s];
    cell.bin = s;
    std::size_t positives = 0;
    for (const auto& [region, counts] : acc[s]) {
      cell.regions.push_back({region, counts.first, counts.second,
                              static_cast<double>(counts.second) / static_cast<double>(counts.first)});
      cell.count += counts.first;
      positives += counts.second;
    }
    cell.c_hat = cell.count ? static_cast<double>(positives) / static_cast<double>(cell.count) : 0.0;
  }
  return out;
}

namespace {

CellEstimate brier_cell(const CellStats& cell) {
  CellEstimate e;
  const double n = static_cast<double>(cell.count);
  for (const RegionCell& r : cell.regions) {
    if (r.count < 2) e.estimable = false;
    if (r.count < 10) e.low_confidence = true;
  }
  if (!e.estimable || cell.count < 2) {
    e.estimable = false;
    return e;
  }
  const double c = cell.c_hat;
  double within = 0.0;
  for (const RegionCell& r : cell.regions) {
    const double w = static_cast<double>(r.count) / n;
    e.plugin += w * (r.mean - c) * (r.mean - c);
    within += w * r.mean * (1.0 - r.mean) / static_cast<double>(r.count - 1);
  }
  e.bias = within - c * (1.0 - c) / (n - 1.0);
  e.explained = e.plugin - e.bias;
  return e;
}

CellEstimate logloss_cell(const CellStats& cell, const ScoringRule& rule) {
  CellEstimate e;
  const double n = static_cast<double>(cell.count);
  const double hc = negative_entropy(rule, cell.c_hat);
  for (const RegionCell& r : cell.regions) {
    if (r.count < 10) e.low_confidence = true;
    e.plugin += static_cast<double>(r.count) / n * (negative_entropy(rule, r.mean) - hc);
  }
  e.explained = e.plugin;
  return e;
}

}  // namespace

ExplainedEstimate gl_explained_debiased(const RegionStats& stats, const ScoringRule& rule) {
  ExplainedEstimate out;
  out.debiased = rule.kind == RuleKind::Brier;
  const double scale = rule.kind == RuleKind::Brier && rule.convention == BinaryConvention::Vector ? 2.0 : 1.0;
  out.per_bin.resize(stats.bins.size());
  bool any_estimable = false;
  bool any_populated = false;
  for (const CellStats& cell : stats.bins) {
    if (cell.count == 0) continue;
    any_populated = true;
    CellEstimate e = out.debiased ? brier_cell(cell) : logloss_cell(cell, rule);
    e.plugin *= scale;
    e.bias *= scale;
    e.explained *= scale;
    out.per_bin[cell.bin] = e;
    if (e.low_confidence) out.low_confidence_bins.push_back(cell.bin);
    if (!e.estimable) {
      out.unestimable_bins.push_back(cell.bin);
      continue;
    }
    any_estimable = true;
    const double w = static_cast<double>(cell.count) / static_cast<double>(stats.n);
    out.plugin += w * e.plugin;
    out.bias += w * e.bias;
  }
  out.explained = out.plugin - out.bias;
  out.all_unestimable = any_populated && !any_estimable;
  return out;
}

ExplainedEstimate sum_over_classes(std::span<const ExplainedEstimate> parts) {
  ExplainedEstimate out;
  if (parts.empty()) return out;
  out.all_unestimable = true;
  for (const ExplainedEstimate& p : parts) {
    out.plugin += p.plugin;
    out.bias += p.bias;
    out.debiased = out.debiased && p.debiased;
    out.all_unestimable = out.all_unestimable && p.all_unestimable;
    out.unestimable_bins.insert(out.unestimable_bins.end(), p.unestimable_bins.begin(), p.unestimable_bins.end());
    out.low_confidence_bins.insert(out.low_confidence_bins.end(), p.low_confidence_bins.begin(),
                                   p.low_confidence_bins.end());
  }
  for (auto* v : {&out.unestimable_bins, &out.low_confidence_bins}) {
    std::sort(v->begin(), v->end());
    v->erase(std::unique(v->begin(), v->end()), v->end());
  }
  out.explained = out.plugin - out.bias;
  return out;
}

InducedEstimate gl_induced_estimate(const CalibrationCurve& curve, const BinnedView& bview,
                                    std::span<const double> scores, const ScoringRule& rule) {
  InducedEstimate out;
  out.per_bin.assign(bview.n_bins(), 0.0);
  const std::size_t n = bview.total_count();
  if (n == 0) return out;
  const bool clamp = rule.kind == RuleKind::LogLoss;
  std::vector<double> c;
  for (std::size_t s = 0; s < bview.n_bins(); ++s) {
    const auto& rows = bview.members(s);
    if (rows.empty()) continue;
    c.resize(rows.size());
    double mean = 0.0;
    for (std::size_t r = 0; r < rows.size(); ++r) {
      double v = curve(scores[rows[r]]);
      if (clamp) v = std::clamp(v, 1e-12, 1.0 - 1e-12);
      c[r] = v;
      mean += v;
    }
    mean /= static_cast<double>(rows.size());
    double mean_h = 0.0;
    for (double v : c) mean_h += negative_entropy(rule, v);
    mean_h /= static_cast<double>(rows.size());
    out.per_bin[s] = std::max(mean_h - negative_entropy(rule, std::clamp(mean, 0.0, 1.0)), 0.0);
    out.total += static_cast<double>(rows.size()) / static_cast<double>(n) * out.per_bin[s];
  }
  return out;
}

double gl_lower_bound(double gl_explained, double gl_induced) { return gl_explained - gl_induced; }

BinningBounds binning_bounds(const BinnedView& bview, const ScoringRule& rule) {
  if (rule.kind != RuleKind::Brier || rule.convention != BinaryConvention::Scalar)
    throw std::invalid_argument("binning bounds need the scalar Brier rule");
  BinningBounds b;
  const std::size_t n = bview.total_count();
  const double big_n = static_cast<double>(bview.n_bins());
  if (n == 0) return b;
  for (std::size_t s = 0; s < bview.n_bins(); ++s) {
    const BinStats& st = bview.stats(s);
    if (st.count == 0) continue;
    const double w = static_cast<double>(st.count) / static_cast<double>(n);
    const double sd = std::sqrt(std::max(st.score_variance, 0.0));
    const double c = st.positive_fraction;
    const double c_sd = std::sqrt(std::max(c * (1.0 - c), 0.0));
    b.lower -= w * sd * (2.0 * c_sd + sd);
    b.upper += w * sd * (2.0 * c_sd - sd);
    b.mean_score_sd += w * sd;
    b.mean_c_sd += w * c_sd;
  }
  b.equal_width_upper = b.mean_c_sd / big_n;
  b.equal_width_lower = -b.mean_c_sd / big_n - 1.0 / (4.0 * big_n * big_n);
  return b;
}

double mse_lower_bound(double cl_binned, double gl_explained, double upper_correction) {
  return cl_binned + gl_explained - upper_correction;
}

std::pair<double, double> clopper_pearson(std::size_t k, std::size_t n, double alpha) {
  if (n == 0 || k > n) throw std::invalid_argument("clopper_pearson: need 0 <= k <= n, n >= 1");
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("clopper_pearson: alpha in (0, 1)");
  const double kd = static_cast<double>(k);
  const double nd = static_cast<double>(n);
  const double lo = k == 0 ? 0.0 : boost::math::ibeta_inv(kd, nd - kd + 1.0, alpha / 2.0);
  const double hi = k == n ? 1.0 : boost::math::ibeta_inv(kd + 1.0, nd - kd, 1.0 - alpha / 2.0);
  return {lo, hi};
}

}  // namespace grouploss
