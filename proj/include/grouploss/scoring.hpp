#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace grouploss {

/// A point on the probability simplex: scores S, posteriors Q or calibrated
/// scores C depending on where it is used.
using ProbVector = std::vector<double>;

enum class RuleKind { Brier, LogLoss };

/// How a binary problem is scored under Brier. Scalar scores only the
/// positive-class coordinate, so its h-variance is the classical variance;
/// Vector sums over both coordinates and is exactly twice Scalar.
enum class BinaryConvention { Scalar, Vector };

struct ScoringRule {
  RuleKind kind = RuleKind::Brier;
  BinaryConvention convention = BinaryConvention::Scalar;

  static constexpr ScoringRule brier(BinaryConvention c = BinaryConvention::Scalar) {
    return {RuleKind::Brier, c};
  }
  static constexpr ScoringRule log_loss() { return {RuleKind::LogLoss, BinaryConvention::Scalar}; }

  friend bool operator==(const ScoringRule&, const ScoringRule&) = default;
};

/// "brier", "brier-vector" or "logloss".
std::string to_string(const ScoringRule& rule);
ScoringRule parse_scoring_rule(std::string_view name);

/// x log x with the 0 log 0 = 0 convention.
double xlogx(double x);

// Vector form. Brier/Scalar requires K = 2 and scores coordinate 1.

/// d(s, q) = s(s, q) - s(q, q). Throws std::domain_error for LogLoss when
/// s_k = 0 < q_k, and std::invalid_argument on dimension mismatch.
double divergence(const ScoringRule& rule, std::span<const double> s, std::span<const double> q);

/// h(p) = -s(p, p), the negative entropy of the rule.
double negative_entropy(const ScoringRule& rule, std::span<const double> p);

// Binary form: arguments are positive-class probabilities.
double divergence(const ScoringRule& rule, double s, double q);
double negative_entropy(const ScoringRule& rule, double p);

// Per-coordinate terms used by classwise decompositions: Brier scores
// (s_k - q_k)^2 with entropy -p_k(1 - p_k); LogLoss scores q_k log(q_k / s_k)
// with entropy p_k log p_k.
double classwise_divergence(RuleKind kind, double s_k, double q_k);
double classwise_entropy(RuleKind kind, double p_k);

/// Finite distribution over simplex points.
class WeightedProbSample {
 public:
  /// Weights must be nonnegative and sum to 1; points must lie on the
  /// simplex and share a dimension (all within 1e-12).
  WeightedProbSample(std::vector<ProbVector> points, std::vector<double> weights);

  static WeightedProbSample uniform(std::vector<ProbVector> points);

  const std::vector<ProbVector>& points() const { return points_; }
  const std::vector<double>& weights() const { return weights_; }
  std::size_t size() const { return points_.size(); }
  std::size_t dimension() const { return points_.front().size(); }

  ProbVector mean() const;

 private:
  std::vector<ProbVector> points_;
  std::vector<double> weights_;
};

/// Jensen gap sum_i w_i h(p_i) - h(sum_i w_i p_i) for an arbitrary h.
template <typename NegEntropy>
double jensen_gap(NegEntropy&& h, const WeightedProbSample& sample) {
  double expected = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i)
    expected += sample.weights()[i] * h(std::span<const double>(sample.points()[i]));
  const ProbVector m = sample.mean();
  return expected - h(std::span<const double>(m));
}

/// Var_h of the sample: the rule's Jensen gap. Nonnegative since h is convex.
double h_variance(const ScoringRule& rule, const WeightedProbSample& sample);

/// Binary form over positive-class probabilities. Weights must sum to 1.
double h_variance(const ScoringRule& rule, std::span<const double> values,
                  std::span<const double> weights);

}  // namespace grouploss
