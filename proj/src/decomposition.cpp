#include "grouploss/decomposition.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

namespace grouploss {

namespace {

void validate(const FiniteDistribution& d) {
  if (d.s.empty() || d.s.size() != d.q.size() || d.s.size() != d.weights.size())
    throw std::invalid_argument("finite distribution: inconsistent sizes");
}

ProbVector one_hot(std::size_t k, std::size_t dim) {
  ProbVector e(dim, 0.0);
  e[k] = 1.0;
  return e;
}

// Expected divergence from p to a label drawn from q.
double expected_to_label(const ScoringRule& rule, const ProbVector& p, const ProbVector& q) {
  double out = 0.0;
  for (std::size_t y = 0; y < q.size(); ++y) {
    if (q[y] == 0.0) continue;
    out += q[y] * divergence(rule, p, one_hot(y, q.size()));
  }
  return out;
}

}  // namespace

Decomposition decompose(const ScoringRule& rule, const FiniteDistribution& dist) {
  validate(dist);
  const std::size_t n = dist.s.size();
  const std::size_t dim = dist.s.front().size();

  std::map<ProbVector, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < n; ++i) groups[dist.s[i]].push_back(i);

  Decomposition out;
  for (const auto& [score, atoms] : groups) {
    double mass = 0.0;
    ProbVector c(dim, 0.0);
    for (std::size_t i : atoms) {
      mass += dist.weights[i];
      for (std::size_t k = 0; k < dim; ++k) c[k] += dist.weights[i] * dist.q[i][k];
    }
    if (mass <= 0.0) continue;
    for (double& v : c) v /= mass;

    std::vector<ProbVector> pts;
    std::vector<double> w;
    for (std::size_t i : atoms) {
      const double wi = dist.weights[i];
      out.expected_loss += wi * expected_to_label(rule, score, dist.q[i]);
      out.cl += wi * divergence(rule, score, c);
      out.gl += wi * divergence(rule, c, dist.q[i]);
      out.il += wi * expected_to_label(rule, dist.q[i], dist.q[i]);
      pts.push_back(dist.q[i]);
      w.push_back(wi / mass);
    }
    double wsum = 0.0;
    for (double v : w) wsum += v;
    for (double& v : w) v /= wsum;
    out.gl_h_variance += mass * h_variance(rule, WeightedProbSample(std::move(pts), std::move(w)));
  }
  return out;
}

Decomposition decompose_classwise(RuleKind kind, const FiniteDistribution& dist) {
  validate(dist);
  const std::size_t n = dist.s.size();
  const std::size_t dim = dist.s.front().size();

  Decomposition out;
  for (std::size_t k = 0; k < dim; ++k) {
    std::map<double, std::pair<double, double>> level;  // S_k -> (mass, mass * Q_k)
    for (std::size_t i = 0; i < n; ++i) {
      auto& acc = level[dist.s[i][k]];
      acc.first += dist.weights[i];
      acc.second += dist.weights[i] * dist.q[i][k];
    }
    std::map<double, std::pair<std::vector<double>, std::vector<double>>> members;
    for (std::size_t i = 0; i < n; ++i) {
      const double sk = dist.s[i][k];
      const double qk = dist.q[i][k];
      const auto& acc = level[sk];
      const double ck = acc.first > 0.0 ? acc.second / acc.first : qk;
      const double w = dist.weights[i];
      auto to_label = [&](double p) {
        return qk * classwise_divergence(kind, p, 1.0) + (1.0 - qk) * classwise_divergence(kind, p, 0.0);
      };
      out.expected_loss += w * to_label(sk);
      out.cl += w * classwise_divergence(kind, sk, ck);
      out.gl += w * classwise_divergence(kind, ck, qk);
      out.il += w * to_label(qk);
      members[sk].first.push_back(qk);
      members[sk].second.push_back(w);
    }
    // Jensen gap of the classwise entropy within each level set of S_k.
    for (const auto& [sk, mv] : members) {
      double mass = 0.0, mean = 0.0, expected = 0.0;
      for (std::size_t j = 0; j < mv.first.size(); ++j) {
        mass += mv.second[j];
        mean += mv.second[j] * mv.first[j];
        expected += mv.second[j] * classwise_entropy(kind, mv.first[j]);
      }
      if (mass <= 0.0) continue;
      out.gl_h_variance += expected - mass * classwise_entropy(kind, std::min(mean / mass, 1.0));
    }
  }
  return out;
}

}  // namespace grouploss
