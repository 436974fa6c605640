#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "grouploss/binning.hpp"
#include "grouploss/scoring.hpp"

namespace grouploss {

/// Continuous estimate of score -> P(Y = 1 | S = score), stored as values
/// at support scores and linearly interpolated between them. Outside the
/// support the nearest endpoint value is returned; outputs lie in [0, 1].
class CalibrationCurve {
 public:
  CalibrationCurve(std::vector<double> support, std::vector<double> values, double bandwidth_fraction);

  double operator()(double score) const;
  std::vector<double> evaluate(std::span<const double> scores) const;

  const std::vector<double>& support() const { return support_; }
  const std::vector<double>& values() const { return values_; }
  double bandwidth_fraction() const { return bandwidth_fraction_; }

 private:
  std::vector<double> support_;
  std::vector<double> values_;
  double bandwidth_fraction_;
};

/// Local linear regression of labels on scores with tricube weights over the
/// nearest ceil(fraction * n) neighbours, no robustness iterations. The fit
/// is evaluated at up to `max_support` distinct scores (quantile spaced).
/// Requires n >= 10 and fraction in (0, 1]. All-equal scores give the
/// constant mean-label curve.
CalibrationCurve fit_calibration_curve(std::span<const double> scores, std::span<const int> labels,
                                       double bandwidth_fraction = 0.3, std::size_t max_support = 256);

/// Monotone step fit with linear interpolation between knots.
class IsotonicMap {
 public:
  IsotonicMap(std::vector<double> breakpoints, std::vector<double> values);

  double operator()(double score) const;

  const std::vector<double>& breakpoints() const { return breakpoints_; }
  const std::vector<double>& values() const { return values_; }

 private:
  std::vector<double> breakpoints_;
  std::vector<double> values_;
};

/// Pool-adjacent-violators least squares fit under a nondecreasing
/// constraint. Tied scores are pooled first. Requires n >= 2.
IsotonicMap isotonic_fit(std::span<const double> scores, std::span<const int> labels);
std::vector<double> isotonic_apply(const IsotonicMap& map, std::span<const double> scores);

struct CalibrationLoss {
  double value = 0.0;
  bool infinite = false;  // log-loss with S_B in {0, 1} disagreeing with c-hat
};

/// sum_s (n_s / n) d(S_B(s), c-hat(s)) over the view's bins.
CalibrationLoss calibration_loss_binned(const BinnedView& bview, const ScoringRule& rule);

}  // namespace grouploss
