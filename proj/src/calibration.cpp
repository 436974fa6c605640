#include "grouploss/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace grouploss {

namespace {

double tricube(double u) {
  const double t = 1.0 - u * u * u;
  return t * t * t;
}

// Piecewise-linear interpolation with flat extension; knots strictly increasing.
double interpolate(const std::vector<double>& knots, const std::vector<double>& values, double x) {
  if (x <= knots.front()) return values.front();
  if (x >= knots.back()) return values.back();
  const auto it = std::upper_bound(knots.begin(), knots.end(), x);
  const std::size_t hi = static_cast<std::size_t>(it - knots.begin());
  const std::size_t lo = hi - 1;
  const double t = (x - knots[lo]) / (knots[hi] - knots[lo]);
  return values[lo] + t * (values[hi] - values[lo]);
}

void check_knots(const std::vector<double>& knots, const std::vector<double>& values) {
  if (knots.empty() || knots.size() != values.size())
    throw std::invalid_argument("knots/values size mismatch");
  for (std::size_t i = 1; i < knots.size(); ++i)
    if (!(knots[i] > knots[i - 1])) throw std::invalid_argument("knots must be strictly increasing");
}

struct SortedSample {
  std::vector<double> x;
  std::vector<double> y;
};

SortedSample sort_by_score(std::span<const double> scores, std::span<const int> labels) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  SortedSample out;
  out.x.reserve(order.size());
  out.y.reserve(order.size());
  for (std::size_t i : order) {
    out.x.push_back(scores[i]);
    out.y.push_back(static_cast<double>(labels[i]));
  }
  return out;
}

// Local linear fit at x0 over the q nearest neighbours of the sorted sample.
double local_linear(const SortedSample& s, double x0, std::size_t q) {
  const std::size_t n = s.x.size();
  std::size_t lo = static_cast<std::size_t>(std::lower_bound(s.x.begin(), s.x.end(), x0) - s.x.begin());
  std::size_t hi = lo;
  while (hi - lo < q) {
    if (lo == 0) {
      ++hi;
    } else if (hi == n) {
      --lo;
    } else if (x0 - s.x[lo - 1] <= s.x[hi] - x0) {
      --lo;
    } else {
      ++hi;
    }
  }
  const double radius = std::max(x0 - s.x[lo], s.x[hi - 1] - x0);

  double sw = 0.0, swx = 0.0, swy = 0.0;
  std::vector<double> w(hi - lo, 1.0);
  for (std::size_t i = lo; i < hi; ++i) {
    if (radius > 0.0) w[i - lo] = tricube(std::abs(s.x[i] - x0) / radius);
    sw += w[i - lo];
    swx += w[i - lo] * s.x[i];
    swy += w[i - lo] * s.y[i];
  }
  const double xbar = swx / sw;
  const double ybar = swy / sw;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = lo; i < hi; ++i) {
    const double dx = s.x[i] - xbar;
    sxx += w[i - lo] * dx * dx;
    sxy += w[i - lo] * dx * (s.y[i] - ybar);
  }
  if (sxx <= 1e-14 * sw) return ybar;
  return ybar + sxy / sxx * (x0 - xbar);
}

}  // namespace

CalibrationCurve::CalibrationCurve(std::vector<double> support, std::vector<double> values,
                                   double bandwidth_fraction)
    : support_(std::move(support)), values_(std::move(values)), bandwidth_fraction_(bandwidth_fraction) {
  check_knots(support_, values_);
  for (double& v : values_) v = std::clamp(v, 0.0, 1.0);
}

double CalibrationCurve::operator()(double score) const { return interpolate(support_, values_, score); }

std::vector<double> CalibrationCurve::evaluate(std::span<const double> scores) const {
  std::vector<double> out(scores.size());
  std::transform(scores.begin(), scores.end(), out.begin(), [this](double s) { return (*this)(s); });
  return out;
}

CalibrationCurve fit_calibration_curve(std::span<const double> scores, std::span<const int> labels,
                                       double bandwidth_fraction, std::size_t max_support) {
  if (scores.size() != labels.size()) throw std::invalid_argument("scores/labels size mismatch");
  if (scores.size() < 10) throw std::invalid_argument("calibration curve needs at least 10 samples");
  if (!(bandwidth_fraction > 0.0 && bandwidth_fraction <= 1.0))
    throw std::invalid_argument("bandwidth fraction must be in (0, 1]");
  if (max_support < 2) throw std::invalid_argument("max_support must be >= 2");

  const SortedSample sample = sort_by_score(scores, labels);
  const std::size_t n = sample.x.size();

  std::vector<double> unique = sample.x;
  unique.erase(std::unique(unique.begin(), unique.end()), unique.end());
  if (unique.size() == 1) {
    const double mean = std::accumulate(sample.y.begin(), sample.y.end(), 0.0) / static_cast<double>(n);
    return CalibrationCurve({unique.front()}, {mean}, bandwidth_fraction);
  }

  std::vector<double> support;
  if (unique.size() <= max_support) {
    support = unique;
  } else {
    support.reserve(max_support);
    const double step = static_cast<double>(unique.size() - 1) / static_cast<double>(max_support - 1);
    for (std::size_t i = 0; i < max_support; ++i) {
      const auto idx = static_cast<std::size_t>(std::llround(static_cast<double>(i) * step));
      if (support.empty() || unique[idx] > support.back()) support.push_back(unique[idx]);
    }
  }

  const auto q = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::ceil(bandwidth_fraction * static_cast<double>(n))), 2, n);
  std::vector<double> values(support.size());
  for (std::size_t i = 0; i < support.size(); ++i) values[i] = local_linear(sample, support[i], q);
  return CalibrationCurve(std::move(support), std::move(values), bandwidth_fraction);
}

IsotonicMap::IsotonicMap(std::vector<double> breakpoints, std::vector<double> values)
    : breakpoints_(std::move(breakpoints)), values_(std::move(values)) {
  check_knots(breakpoints_, values_);
  for (std::size_t i = 1; i < values_.size(); ++i)
    if (values_[i] < values_[i - 1]) throw std::invalid_argument("isotonic values must be nondecreasing");
}

double IsotonicMap::operator()(double score) const { return interpolate(breakpoints_, values_, score); }

IsotonicMap isotonic_fit(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw std::invalid_argument("scores/labels size mismatch");
  if (scores.size() < 2) throw std::invalid_argument("isotonic fit needs at least 2 samples");

  const SortedSample sample = sort_by_score(scores, labels);

  // Pool ties: one knot per distinct score.
  std::vector<double> knots;
  std::vector<double> sums;
  std::vector<double> counts;
  for (std::size_t i = 0; i < sample.x.size(); ++i) {
    if (knots.empty() || sample.x[i] > knots.back()) {
      knots.push_back(sample.x[i]);
      sums.push_back(0.0);
      counts.push_back(0.0);
    }
    sums.back() += sample.y[i];
    counts.back() += 1.0;
  }

  struct Block {
    double sum;
    double weight;
    std::size_t first;  // first knot
  };
  std::vector<Block> blocks;
  for (std::size_t k = 0; k < knots.size(); ++k) {
    blocks.push_back({sums[k], counts[k], k});
    while (blocks.size() > 1) {
      const Block& last = blocks.back();
      const Block& prev = blocks[blocks.size() - 2];
      // prev mean > last mean, compared without division
      if (prev.sum * last.weight <= last.sum * prev.weight) break;
      Block merged{prev.sum + last.sum, prev.weight + last.weight, prev.first};
      blocks.pop_back();
      blocks.back() = merged;
    }
  }

  std::vector<double> values(knots.size());
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const std::size_t end = b + 1 < blocks.size() ? blocks[b + 1].first : knots.size();
    const double v = blocks[b].sum / blocks[b].weight;
    for (std::size_t k = blocks[b].first; k < end; ++k) values[k] = v;
  }
  return IsotonicMap(std::move(knots), std::move(values));
}

std::vector<double> isotonic_apply(const IsotonicMap& map, std::span<const double> scores) {
  std::vector<double> out(scores.size());
  std::transform(scores.begin(), scores.end(), out.begin(), [&](double s) { return map(s); });
  return out;
}

CalibrationLoss calibration_loss_binned(const BinnedView& bview, const ScoringRule& rule) {
  CalibrationLoss out;
  if (bview.total_count() == 0) return out;
  const double n = static_cast<double>(bview.total_count());
  for (std::size_t s = 0; s < bview.n_bins(); ++s) {
    const BinStats& st = bview.stats(s);
    if (st.count == 0) continue;
    const double sb = st.mean_score;
    const double c = st.positive_fraction;
    if (rule.kind == RuleKind::LogLoss && ((sb <= 0.0 && c > 0.0) || (sb >= 1.0 && c < 1.0))) {
      out.value = std::numeric_limits<double>::infinity();
      out.infinite = true;
      return out;
    }
    out.value += static_cast<double>(st.count) / n * divergence(rule, sb, c);
  }
  return out;
}

}  // namespace grouploss
