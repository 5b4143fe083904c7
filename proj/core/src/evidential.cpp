#include "ceqr/evidential.hpp"

#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <numbers>
#include <string>

#include "ceqr/errors.hpp"

namespace ceqr::evidential {

NIGParams::NIGParams(double gamma, double v, double alpha, double beta)
    : gamma_(gamma), v_(v), alpha_(alpha), beta_(beta) {
  if (!std::isfinite(gamma) || !std::isfinite(v) || !std::isfinite(alpha) ||
      !std::isfinite(beta)) {
    throw DomainError("NIG parameters must be finite");
  }
  if (!(v > 0.0)) throw DomainError("NIG v must be > 0, got " + std::to_string(v));
  if (!(alpha > 1.0)) throw DomainError("NIG alpha must be > 1, got " + std::to_string(alpha));
  if (!(beta > 0.0)) throw DomainError("NIG beta must be > 0, got " + std::to_string(beta));
}

double nig_density(double mu, double sigma2, const NIGParams& g) {
  if (!(sigma2 > 0.0)) throw DomainError("nig_density: sigma2 must be > 0");
  const double a = g.alpha();
  const double d = g.gamma() - mu;
  const double log_p = a * std::log(g.beta()) + 0.5 * std::log(g.v()) -
                       boost::math::lgamma(a) -
                       0.5 * std::log(2.0 * std::numbers::pi * sigma2) -
                       (a + 1.0) * std::log(sigma2) -
                       (2.0 * g.beta() + g.v() * d * d) / (2.0 * sigma2);
  return std::exp(log_p);
}

double student_t_marginal_logpdf(double y, const NIGParams& g) {
  const double nu = 2.0 * g.alpha();
  const double scale2 = g.beta() * (1.0 + g.v()) / (g.v() * g.alpha());
  const double z = y - g.gamma();
  return boost::math::lgamma(0.5 * (nu + 1.0)) - boost::math::lgamma(0.5 * nu) -
         0.5 * std::log(nu * std::numbers::pi * scale2) -
         0.5 * (nu + 1.0) * std::log1p(z * z / (nu * scale2));
}

UncertaintyEstimate decompose(const NIGParams& g) {
  const double aleatoric = g.beta() / (g.alpha() - 1.0);
  return {g.gamma(), aleatoric, aleatoric / g.v()};
}

double total_evidence(const NIGParams& g) {
  return 2.0 * g.v() + g.alpha() + 1.0 / g.beta();
}

double evidential_sd(const NIGParams& g) { return std::sqrt(decompose(g).epistemic); }

NIGQuantileSet::NIGQuantileSet(std::size_t num_actions, std::size_t num_quantiles,
                               std::vector<NIGParams> params)
    : actions_(num_actions), quantiles_(num_quantiles), params_(std::move(params)) {
  if (params_.size() != actions_ * 2 * quantiles_) {
    throw ShapeError("NIGQuantileSet: expected " + std::to_string(actions_ * 2 * quantiles_) +
                     " entries, got " + std::to_string(params_.size()));
  }
}

NIGQuantileSet NIGQuantileSet::from_flat(std::span<const double> block,
                                         std::size_t num_actions,
                                         std::size_t num_quantiles) {
  const std::size_t plane = num_actions * 2 * num_quantiles;
  if (block.size() != 4 * plane) {
    throw ShapeError("NIGQuantileSet: flat block has " + std::to_string(block.size()) +
                     " values, expected " + std::to_string(4 * plane));
  }
  std::vector<NIGParams> params;
  params.reserve(plane);
  for (std::size_t k = 0; k < plane; ++k) {
    params.emplace_back(block[k], block[plane + k], block[2 * plane + k], block[3 * plane + k]);
  }
  return NIGQuantileSet(num_actions, num_quantiles, std::move(params));
}

NIGQuantileSet NIGQuantileSet::from_output(const nnet::Tensor& evidential, std::size_t index) {
  if (evidential.rank() != 5 || evidential.dim(1) != 4 || evidential.dim(3) != 2) {
    throw ShapeError("NIGQuantileSet: expected [B, 4, A, 2, N], got " +
                     nnet::shape_to_string(evidential.shape()));
  }
  const std::size_t a = evidential.dim(2);
  const std::size_t n = evidential.dim(4);
  const std::size_t block = 4 * a * 2 * n;
  if (index >= evidential.dim(0)) throw ShapeError("NIGQuantileSet: sample index out of range");
  return from_flat(evidential.data().subspan(index * block, block), a, n);
}

const NIGParams& NIGQuantileSet::at(std::size_t action, Percentile level, std::size_t i) const {
  if (action >= actions_ || i >= quantiles_) throw ShapeError("NIGQuantileSet: index out of range");
  return params_[(action * 2 + static_cast<std::size_t>(level)) * quantiles_ + i];
}

ActionUncertainty action_uncertainties(const NIGQuantileSet& set, std::size_t action) {
  const std::size_t n = set.num_quantiles();
  double epistemic = 0.0;
  double aleatoric = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const NIGParams& lo = set.at(action, Percentile::p05, i);
    const NIGParams& hi = set.at(action, Percentile::p95, i);
    const double u_lo = 2.0 * evidential_sd(lo);
    const double u_hi = 2.0 * evidential_sd(hi);
    epistemic += 0.5 * (u_lo + u_hi);
    aleatoric += std::abs(hi.gamma() - lo.gamma());
  }
  return {epistemic / static_cast<double>(n), aleatoric / static_cast<double>(n)};
}

}  // namespace ceqr::evidential
