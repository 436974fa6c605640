#include <cmath>

#include "grouploss/decomposition.hpp"
#include "support.hpp"

using namespace grouploss;
using testing::near;

namespace {

// Expected score against a one-hot label, computed from the rule definitions.
double direct_loss(RuleKind kind, const FiniteDistribution& d) {
  double total = 0.0;
  for (std::size_t i = 0; i < d.s.size(); ++i)
    for (std::size_t y = 0; y < d.s[i].size(); ++y) {
      double loss = 0.0;
      if (kind == RuleKind::LogLoss) {
        loss = -std::log(d.s[i][y]);
      } else {
        for (std::size_t k = 0; k < d.s[i].size(); ++k) loss += std::pow(d.s[i][k] - (k == y ? 1.0 : 0.0), 2);
      }
      total += d.weights[i] * d.q[i][y] * loss;
    }
  return total;
}

// Random law with few distinct scores so level sets have several atoms.
FiniteDistribution random_law(Rng& rng, std::size_t k) {
  std::vector<ProbVector> levels;
  for (int l = 0; l < 3; ++l) levels.push_back(testing::random_simplex(rng, k));
  FiniteDistribution d;
  double w = 0.0;
  for (int i = 0; i < 12; ++i) {
    d.s.push_back(levels[uniform_index(rng, levels.size())]);
    d.q.push_back(testing::random_simplex(rng, k));
    d.weights.push_back(uniform01(rng) + 0.1);
    w += d.weights.back();
  }
  for (double& x : d.weights) x /= w;
  return d;
}

}  // namespace

TEST_CASE("two-posterior example") {
  FiniteDistribution d{{{0.5, 0.5}, {0.5, 0.5}}, {{0.7, 0.3}, {0.3, 0.7}}, {0.5, 0.5}};
  const Decomposition r = decompose(ScoringRule::brier(), d);
  CHECK(near(r.cl, 0.0, 1e-15));
  CHECK(near(r.gl, 0.04, 1e-15));
  CHECK(near(r.il, 0.21, 1e-15));
  CHECK(near(r.expected_loss, 0.25, 1e-15));
}

TEST_CASE("decomposition sums to the expected loss") {
  Rng rng(11);
  for (int t = 0; t < 200; ++t) {
    const std::size_t k = 2 + uniform_index(rng, 3);
    const FiniteDistribution d = random_law(rng, k);
    for (const ScoringRule& rule :
         {ScoringRule::brier(BinaryConvention::Vector), ScoringRule::log_loss(), ScoringRule::brier()}) {
      if (rule.convention == BinaryConvention::Scalar && rule.kind == RuleKind::Brier && k != 2) continue;
      const Decomposition r = decompose(rule, d);
      double want = direct_loss(rule.kind, d);
      if (rule.kind == RuleKind::Brier && rule.convention == BinaryConvention::Scalar) want /= 2.0;
      CHECK(near(r.expected_loss, want, 1e-12));
      CHECK(near(r.cl + r.gl + r.il, r.expected_loss, 1e-12));
      CHECK(near(r.gl, r.gl_h_variance, 1e-12));
      CHECK(r.cl >= -1e-15);
      CHECK(r.gl >= -1e-15);
      CHECK(r.il >= -1e-15);
    }
  }
}

TEST_CASE("classwise decomposition sums to the expected loss") {
  Rng rng(12);
  for (int t = 0; t < 200; ++t) {
    const std::size_t k = 2 + uniform_index(rng, 3);
    const FiniteDistribution d = random_law(rng, k);
    for (RuleKind kind : {RuleKind::Brier, RuleKind::LogLoss}) {
      const Decomposition r = decompose_classwise(kind, d);
      CHECK(near(r.expected_loss, direct_loss(kind, d), 1e-12));
      CHECK(near(r.cl + r.gl + r.il, r.expected_loss, 1e-12));
      CHECK(near(r.gl, r.gl_h_variance, 1e-12));
      CHECK(r.gl >= -1e-15);
    }
  }
}

TEST_CASE("degenerate laws") {
  Rng rng(13);
  FiniteDistribution d = random_law(rng, 3);
  // Posterior equal to the score: no calibration or grouping loss.
  d.q = d.s;
  for (const ScoringRule& rule : {ScoringRule::brier(BinaryConvention::Vector), ScoringRule::log_loss()}) {
    const Decomposition r = decompose(rule, d);
    CHECK(near(r.cl, 0.0, 1e-14));
    CHECK(near(r.gl, 0.0, 1e-14));
  }
  // Constant posterior on a level set: grouping loss vanishes.
  FiniteDistribution c{{{0.2, 0.8}, {0.2, 0.8}, {0.6, 0.4}}, {{0.5, 0.5}, {0.5, 0.5}, {0.1, 0.9}}, {0.3, 0.3, 0.4}};
  CHECK(near(decompose(ScoringRule::log_loss(), c).gl, 0.0, 1e-15));
  CHECK(decompose(ScoringRule::log_loss(), c).cl > 0.0);
}
