#pragma once

#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <vector>

#include "grouploss/random.hpp"

namespace testing {

inline bool near(double a, double b, double tol) { return std::abs(a - b) <= tol; }

/// Random point on the K-simplex, strictly inside when `interior`.
inline std::vector<double> random_simplex(grouploss::Rng& rng, std::size_t k, bool interior = true) {
  std::vector<double> p(k);
  double s = 0.0;
  for (double& v : p) {
    v = grouploss::uniform01(rng) + (interior ? 0.05 : 0.0);
    s += v;
  }
  for (double& v : p) v /= s;
  return p;
}

}  // namespace testing
