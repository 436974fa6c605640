#include "grouploss/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace grouploss {

namespace {

constexpr double kSimplexTol = 1e-6;

void check_simplex(std::span<const double> p, double tol) {
  double sum = 0.0;
  for (double v : p) {
    if (!(v >= -tol && v <= 1.0 + tol)) throw std::domain_error("probability outside [0, 1]");
    sum += v;
  }
  if (std::abs(sum - 1.0) > tol) throw std::domain_error("probability vector does not sum to 1");
}

void check_unit(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::domain_error("probability outside [0, 1]");
}

void check_scalar_convention(const ScoringRule& rule, std::size_t k) {
  if (rule.kind == RuleKind::Brier && rule.convention == BinaryConvention::Scalar && k != 2)
    throw std::invalid_argument("Brier scalar convention requires a binary problem");
}

// q log(q / s), infinite-input aware.
double kl_term(double s, double q) {
  if (q <= 0.0) return 0.0;
  if (s <= 0.0) throw std::domain_error("log-loss divergence is infinite: s_k = 0 with q_k > 0");
  return q * std::log(q / s);
}

}  // namespace

std::string to_string(const ScoringRule& rule) {
  if (rule.kind == RuleKind::LogLoss) return "logloss";
  return rule.convention == BinaryConvention::Scalar ? "brier" : "brier-vector";
}

ScoringRule parse_scoring_rule(std::string_view name) {
  if (name == "brier") return ScoringRule::brier();
  if (name == "brier-vector") return ScoringRule::brier(BinaryConvention::Vector);
  if (name == "logloss" || name == "log-loss") return ScoringRule::log_loss();
  throw std::invalid_argument("unknown scoring rule: " + std::string(name));
}

double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

double divergence(const ScoringRule& rule, std::span<const double> s, std::span<const double> q) {
  if (s.size() != q.size() || s.empty()) throw std::invalid_argument("dimension mismatch");
  check_simplex(s, kSimplexTol);
  check_simplex(q, kSimplexTol);
  check_scalar_convention(rule, s.size());

  if (rule.kind == RuleKind::LogLoss) {
    double d = 0.0;
    for (std::size_t k = 0; k < s.size(); ++k) d += kl_term(s[k], q[k]);
    return d;
  }
  if (rule.convention == BinaryConvention::Scalar) return (s[1] - q[1]) * (s[1] - q[1]);
  double d = 0.0;
  for (std::size_t k = 0; k < s.size(); ++k) d += (s[k] - q[k]) * (s[k] - q[k]);
  return d;
}

double negative_entropy(const ScoringRule& rule, std::span<const double> p) {
  if (p.empty()) throw std::invalid_argument("empty probability vector");
  check_simplex(p, kSimplexTol);
  check_scalar_convention(rule, p.size());

  if (rule.kind == RuleKind::LogLoss) {
    double h = 0.0;
    for (double v : p) h += xlogx(v);
    return h;
  }
  if (rule.convention == BinaryConvention::Scalar) return -p[1] * (1.0 - p[1]);
  double h = -1.0;
  for (double v : p) h += v * v;
  return h;
}

double divergence(const ScoringRule& rule, double s, double q) {
  check_unit(s);
  check_unit(q);
  if (rule.kind == RuleKind::LogLoss) return kl_term(s, q) + kl_term(1.0 - s, 1.0 - q);
  const double d = (s - q) * (s - q);
  return rule.convention == BinaryConvention::Scalar ? d : 2.0 * d;
}

double negative_entropy(const ScoringRule& rule, double p) {
  check_unit(p);
  if (rule.kind == RuleKind::LogLoss) return xlogx(p) + xlogx(1.0 - p);
  const double h = -p * (1.0 - p);
  return rule.convention == BinaryConvention::Scalar ? h : 2.0 * h;
}

double classwise_divergence(RuleKind kind, double s_k, double q_k) {
  check_unit(s_k);
  check_unit(q_k);
  if (kind == RuleKind::LogLoss) return kl_term(s_k, q_k);
  return (s_k - q_k) * (s_k - q_k);
}

double classwise_entropy(RuleKind kind, double p_k) {
  check_unit(p_k);
  return kind == RuleKind::LogLoss ? xlogx(p_k) : -p_k * (1.0 - p_k);
}

WeightedProbSample::WeightedProbSample(std::vector<ProbVector> points, std::vector<double> weights)
    : points_(std::move(points)), weights_(std::move(weights)) {
  if (points_.empty()) throw std::invalid_argument("empty sample");
  if (points_.size() != weights_.size()) throw std::invalid_argument("points/weights size mismatch");
  const std::size_t dim = points_.front().size();
  if (dim == 0) throw std::invalid_argument("zero-dimensional points");
  double total = 0.0;
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (points_[i].size() != dim) throw std::invalid_argument("dimension mismatch");
    check_simplex(points_[i], 1e-12);
    if (!(weights_[i] >= 0.0)) throw std::invalid_argument("negative weight");
    total += weights_[i];
  }
  if (std::abs(total - 1.0) > 1e-12) throw std::invalid_argument("weights do not sum to 1");
}

WeightedProbSample WeightedProbSample::uniform(std::vector<ProbVector> points) {
  if (points.empty()) throw std::invalid_argument("empty sample");
  std::vector<double> w(points.size(), 1.0 / static_cast<double>(points.size()));
  return WeightedProbSample(std::move(points), std::move(w));
}

ProbVector WeightedProbSample::mean() const {
  ProbVector m(dimension(), 0.0);
  for (std::size_t i = 0; i < size(); ++i)
    for (std::size_t k = 0; k < m.size(); ++k) m[k] += weights_[i] * points_[i][k];
  // Renormalize so rounding cannot push the mean off the simplex.
  double sum = 0.0;
  for (double& v : m) {
    v = std::clamp(v, 0.0, 1.0);
    sum += v;
  }
  for (double& v : m) v /= sum;
  return m;
}

double h_variance(const ScoringRule& rule, const WeightedProbSample& sample) {
  return jensen_gap([&](std::span<const double> p) { return negative_entropy(rule, p); }, sample);
}

double h_variance(const ScoringRule& rule, std::span<const double> values,
                  std::span<const double> weights) {
  if (values.empty()) throw std::invalid_argument("empty sample");
  if (values.size() != weights.size()) throw std::invalid_argument("values/weights size mismatch");
  double total = 0.0;
  double mean = 0.0;
  double expected = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!(weights[i] >= 0.0)) throw std::invalid_argument("negative weight");
    total += weights[i];
    mean += weights[i] * values[i];
    expected += weights[i] * negative_entropy(rule, values[i]);
  }
  if (std::abs(total - 1.0) > 1e-12) throw std::invalid_argument("weights do not sum to 1");
  return expected - negative_entropy(rule, std::clamp(mean, 0.0, 1.0));
}

}  // namespace grouploss
