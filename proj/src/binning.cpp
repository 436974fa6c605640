#include "grouploss/binning.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace grouploss {

std::size_t bin_index(double score, std::size_t n_bins) {
  if (!(score >= 0.0 && score <= 1.0)) throw std::domain_error("score outside [0, 1]");
  const auto b = static_cast<std::size_t>(std::floor(score * static_cast<double>(n_bins)));
  return std::min(b, n_bins - 1);
}

BinnedView::BinnedView(std::span<const double> scores, std::span<const int> labels, std::size_t n_bins,
                       std::span<const std::size_t> rows) {
  if (n_bins < 1) throw std::invalid_argument("n_bins must be >= 1");
  if (scores.size() != labels.size()) throw std::invalid_argument("scores/labels size mismatch");

  edges_.resize(n_bins + 1);
  for (std::size_t s = 0; s <= n_bins; ++s)
    edges_[s] = static_cast<double>(s) / static_cast<double>(n_bins);
  bin_of_.resize(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) bin_of_[i] = bin_index(scores[i], n_bins);

  members_.assign(n_bins, {});
  if (rows.empty()) {
    for (std::size_t i = 0; i < scores.size(); ++i) members_[bin_of_[i]].push_back(i);
  } else {
    for (std::size_t i : rows) {
      if (i >= scores.size()) throw std::out_of_range("row index out of range");
      members_[bin_of_[i]].push_back(i);
    }
  }

  stats_.assign(n_bins, {});
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t s = 0; s < n_bins; ++s) {
    const auto& m = members_[s];
    BinStats& st = stats_[s];
    st.count = m.size();
    total_ += m.size();
    if (m.empty()) {
      st.mean_score = nan;
      st.positive_fraction = nan;
      continue;
    }
    double sum = 0.0;
    double pos = 0.0;
    for (std::size_t i : m) {
      sum += scores[i];
      pos += labels[i];
    }
    const double count = static_cast<double>(m.size());
    const double mean = sum / count;
    double ss = 0.0;
    for (std::size_t i : m) ss += (scores[i] - mean) * (scores[i] - mean);
    st.mean_score = std::clamp(mean, edges_[s], edges_[s + 1]);
    st.positive_fraction = pos / count;
    st.score_variance = ss / count;
  }
}

BinnedView make_bins(const BinaryView& bv, std::size_t n_bins, std::span<const std::size_t> rows) {
  return BinnedView(bv.score, bv.label, n_bins, rows);
}

BinnedView make_bins(std::span<const double> scores, std::span<const int> labels, std::size_t n_bins,
                     std::span<const std::size_t> rows) {
  return BinnedView(scores, labels, n_bins, rows);
}

WithinBinVariance within_bin_score_variance(const BinnedView& bview) {
  WithinBinVariance out;
  out.per_bin.resize(bview.n_bins(), 0.0);
  if (bview.total_count() == 0) return out;
  const double n = static_cast<double>(bview.total_count());
  for (std::size_t s = 0; s < bview.n_bins(); ++s) {
    const auto& st = bview.stats(s);
    if (st.count == 0) continue;
    out.per_bin[s] = st.score_variance;
    out.weighted_total += static_cast<double>(st.count) / n * st.score_variance;
  }
  return out;
}

}  // namespace grouploss
