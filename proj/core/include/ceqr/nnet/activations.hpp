#pragma once

#include <cmath>

namespace ceqr::nnet {

/// log(1 + e^x), evaluated without overflow for large |x|.
inline double softplus(double x) {
  return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

inline double sigmoid(double x) {
  if (x >= 0.0) {
    const double z = std::exp(-x);
    return 1.0 / (1.0 + z);
  }
  const double z = std::exp(x);
  return z / (1.0 + z);
}

/// d softplus / dx.
inline double softplus_derivative(double x) { return sigmoid(x); }

}  // namespace ceqr::nnet
