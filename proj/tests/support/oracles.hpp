#pragma once

// Quadrature oracles shared by the unit tests and the acceptance binary.

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "ceqr/evidential.hpp"

namespace ceqr::test {

inline double normal_pdf(double y, double mean, double var) {
  const double d = y - mean;
  return std::exp(-0.5 * d * d / var) / std::sqrt(2.0 * M_PI * var);
}

/// Integral of f(mu) * p(mu, sigma2 | g) over mu in [lo, hi] for fixed sigma2.
template <class F>
double integrate_mu(const F& f, double sigma2, const evidential::NIGParams& g, double lo,
                    double hi) {
  using boost::math::quadrature::gauss_kronrod;
  return gauss_kronrod<double, 61>::integrate(
      [&](double mu) { return f(mu) * evidential::nig_density(mu, sigma2, g); }, lo, hi, 15,
      1e-12);
}

/// Integral of p(mu, sigma2 | g) with mu truncated to gamma +- 12 sd(mu | sigma2).
inline double nig_mass(const evidential::NIGParams& g) {
  boost::math::quadrature::exp_sinh<double> outer;
  const auto f = [&](double sigma2) {
    if (sigma2 <= 0.0 || !std::isfinite(sigma2)) return 0.0;
    const double half = 12.0 * std::sqrt(sigma2 / g.v());
    return integrate_mu([](double) { return 1.0; }, sigma2, g, g.gamma() - half,
                        g.gamma() + half);
  };
  return outer.integrate(f, 0.0, std::numeric_limits<double>::infinity());
}

/// p(y | g) as the double integral of Normal(y; mu, sigma2) * p(mu, sigma2 | g).
inline double marginal_by_quadrature(double y, const evidential::NIGParams& g) {
  boost::math::quadrature::exp_sinh<double> outer;
  const auto f = [&](double sigma2) {
    if (sigma2 <= 0.0 || !std::isfinite(sigma2)) return 0.0;
    const double sd = std::sqrt(sigma2) * std::max(1.0, 1.0 / std::sqrt(g.v()));
    const double lo = std::min(y, g.gamma()) - 12.0 * sd;
    const double hi = std::max(y, g.gamma()) + 12.0 * sd;
    return integrate_mu([&](double mu) { return normal_pdf(y, mu, sigma2); }, sigma2, g, lo, hi);
  };
  return outer.integrate(f, 0.0, std::numeric_limits<double>::infinity());
}

/// E[sigma^2] under the inverse-gamma(alpha, beta) marginal of sigma^2.
inline double expected_variance_by_quadrature(double alpha, double beta) {
  boost::math::quadrature::exp_sinh<double> integrator;
  const double log_norm = alpha * std::log(beta) - std::lgamma(alpha);
  const auto f = [&](double s2) {
    if (s2 <= 0.0 || !std::isfinite(s2)) return 0.0;
    return s2 * std::exp(log_norm - (alpha + 1.0) * std::log(s2) - beta / s2);
  };
  return integrator.integrate(f, 0.0, std::numeric_limits<double>::infinity());
}

}  // namespace ceqr::test
