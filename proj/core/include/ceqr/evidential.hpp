#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ceqr/nnet/tensor.hpp"

namespace ceqr::evidential {

/// Normal-Inverse-Gamma parameters (gamma, v, alpha, beta). Construction
/// enforces v > 0, alpha > 1, beta > 0.
class NIGParams {
 public:
  NIGParams(double gamma, double v, double alpha, double beta);

  double gamma() const noexcept { return gamma_; }
  double v() const noexcept { return v_; }
  double alpha() const noexcept { return alpha_; }
  double beta() const noexcept { return beta_; }

 private:
  double gamma_;
  double v_;
  double alpha_;
  double beta_;
};

struct UncertaintyEstimate {
  double prediction;  ///< E[mu] = gamma
  double aleatoric;   ///< E[sigma^2] = beta / (alpha - 1)
  double epistemic;   ///< Var[mu] = beta / (v (alpha - 1))
};

/// Joint density p(mu, sigma^2 | G). Throws DomainError for sigma2 <= 0.
double nig_density(double mu, double sigma2, const NIGParams& g);

/// log St(y; gamma, beta (1 + v) / (v alpha), 2 alpha): the NIG marginal
/// likelihood of an observation y.
double student_t_marginal_logpdf(double y, const NIGParams& g);

UncertaintyEstimate decompose(const NIGParams& g);

/// Phi = 2v + alpha + 1/beta.
double total_evidence(const NIGParams& g);

/// sqrt(Var[mu]).
double evidential_sd(const NIGParams& g);

enum class Percentile : std::size_t { p05 = 0, p95 = 1 };

/// Evidential parameters indexed [action, percentile level, quantile].
class NIGQuantileSet {
 public:
  NIGQuantileSet(std::size_t num_actions, std::size_t num_quantiles,
                 std::vector<NIGParams> params);

  /// Reads sample `index` of a [B, 4, A, 2, N] network output whose v, alpha
  /// and beta planes are already transformed.
  static NIGQuantileSet from_output(const nnet::Tensor& evidential, std::size_t index);
  /// Same, from one sample's flat [4, A, 2, N] block.
  static NIGQuantileSet from_flat(std::span<const double> block, std::size_t num_actions,
                                  std::size_t num_quantiles);

  std::size_t num_actions() const noexcept { return actions_; }
  std::size_t num_quantiles() const noexcept { return quantiles_; }
  const NIGParams& at(std::size_t action, Percentile level, std::size_t i) const;

 private:
  std::size_t actions_;
  std::size_t quantiles_;
  std::vector<NIGParams> params_;
};

struct ActionUncertainty {
  double epistemic;  ///< mean_i of (u5_i + u95_i) / 2, u = 2 * evidential_sd
  double aleatoric;  ///< mean_i of |gamma95_i - gamma5_i|
};

/// The interval |(gamma + sd) - (gamma - sd)| collapses to 2 sd, which is what
/// is evaluated here.
ActionUncertainty action_uncertainties(const NIGQuantileSet& set, std::size_t action);

}  // namespace ceqr::evidential
