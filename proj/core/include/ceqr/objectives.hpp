#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ceqr/evidential.hpp"
#include "ceqr/losses.hpp"

namespace ceqr::objectives {

/// Evidential parameters for one action per batch row: each field is laid
/// out [B, 2, N] with the 5th percentile level first.
struct NigBatch {
  std::size_t batch = 0;
  std::size_t quantiles = 0;
  std::vector<double> gamma, v, alpha, beta;

  NigBatch() = default;
  NigBatch(std::size_t batch, std::size_t quantiles);
  std::size_t index(std::size_t b, evidential::Percentile level, std::size_t i) const {
    return (b * 2 + static_cast<std::size_t>(level)) * quantiles + i;
  }
  evidential::NIGParams at(std::size_t b, evidential::Percentile level, std::size_t i) const;
  /// [B, N] copy of gamma at one percentile level.
  std::vector<double> gamma_plane(evidential::Percentile level) const;
};

struct ZLossTerms {
  double qr = 0.0;
  double cal = 0.0;
  double total = 0.0;
};

/// Quantile-regression loss (batch mean) plus calibration of the predicted
/// quantiles against all target atoms of each row. Inputs are [B, N].
ZLossTerms z_loss(losses::BatchView predicted, losses::BatchView targets,
                  const losses::QuantileLevels& levels, const losses::LossWeights& weights,
                  std::span<double> grad_predicted = {});

struct ELLossTerms {
  double nll = 0.0;       ///< mean over (b, level, i)
  double reg = 0.0;       ///< mean evidence-weighted tilted loss, before lambda_reg
  double evidential = 0.0;
  double cal = 0.0;
  double interval = 0.0;
  double total = 0.0;
};

/// Evidential objective for one action per row: evidential loss at both
/// percentile levels, band calibration of [gamma5, gamma95] at coverage p,
/// and the interval score. Target column i pairs with quantile index i.
ELLossTerms el_loss(const NigBatch& params, losses::BatchView targets,
                    const losses::LossWeights& weights, NigBatch* grad = nullptr);

}  // namespace ceqr::objectives
