#pragma once

#include <vector>

#include "grouploss/scoring.hpp"

namespace grouploss {

/// Finite joint law of (S, Q): atom i has score s[i], posterior q[i] and
/// mass weights[i]. Atoms with identical scores form one level set.
struct FiniteDistribution {
  std::vector<ProbVector> s;
  std::vector<ProbVector> q;
  std::vector<double> weights;
};

struct Decomposition {
  double expected_loss = 0.0;  // E[d(S, Y)]
  double cl = 0.0;             // E[d(S, C)]
  double gl = 0.0;             // E[d(C, Q)]
  double il = 0.0;             // E[d(Q, Y)]
  double gl_h_variance = 0.0;  // E[Var_h[Q | S]], equal to gl
};

/// C = E[Q | S] by exact grouping of equal score vectors.
Decomposition decompose(const ScoringRule& rule, const FiniteDistribution& dist);

/// Per-class terms with C_k = E[Q_k | S_k], summed over classes.
Decomposition decompose_classwise(RuleKind kind, const FiniteDistribution& dist);

}  // namespace grouploss
