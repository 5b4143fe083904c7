#include "ceqr/objectives.hpp"

#include "ceqr/errors.hpp"

namespace ceqr::objectives {

using evidential::NIGParams;
using evidential::Percentile;
using losses::BatchView;

NigBatch::NigBatch(std::size_t b, std::size_t n)
    : batch(b),
      quantiles(n),
      gamma(b * 2 * n, 0.0),
      v(b * 2 * n, 0.0),
      alpha(b * 2 * n, 0.0),
      beta(b * 2 * n, 0.0) {}

NIGParams NigBatch::at(std::size_t b, Percentile level, std::size_t i) const {
  const std::size_t k = index(b, level, i);
  return NIGParams(gamma[k], v[k], alpha[k], beta[k]);
}

std::vector<double> NigBatch::gamma_plane(Percentile level) const {
  std::vector<double> out(batch * quantiles);
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t i = 0; i < quantiles; ++i) out[b * quantiles + i] = gamma[index(b, level, i)];
  }
  return out;
}

ZLossTerms z_loss(BatchView predicted, BatchView targets, const losses::QuantileLevels& levels,
                  const losses::LossWeights& weights, std::span<double> grad_predicted) {
  const std::size_t batch = predicted.rows;
  const std::size_t n = predicted.cols;
  if (batch == 0) throw DomainError("z_loss: empty batch");
  if (targets.rows != batch || targets.cols != n || levels.size() != n) {
    throw ShapeError("z_loss: predicted, targets and levels disagree");
  }
  const bool want_grad = !grad_predicted.empty();
  const double inv_b = 1.0 / static_cast<double>(batch);

  ZLossTerms terms;
  std::vector<double> row_grad(n);
  for (std::size_t b = 0; b < batch; ++b) {
    std::fill(row_grad.begin(), row_grad.end(), 0.0);
    terms.qr += inv_b * losses::qr_loss(predicted.row(b), targets.row(b), levels.values(),
                                        weights.kappa,
                                        want_grad ? std::span<double>(row_grad) : std::span<double>{});
    if (want_grad) {
      for (std::size_t i = 0; i < n; ++i) grad_predicted[b * n + i] += inv_b * row_grad[i];
    }
  }
  terms.cal = losses::cal_loss(predicted, targets, levels.values(), weights.lambda_cal,
                               grad_predicted)
                  .value;
  terms.total = terms.qr + terms.cal;
  return terms;
}

ELLossTerms el_loss(const NigBatch& params, BatchView targets, const losses::LossWeights& weights,
                    NigBatch* grad) {
  const std::size_t batch = params.batch;
  const std::size_t n = params.quantiles;
  if (batch == 0) throw DomainError("el_loss: empty batch");
  if (targets.rows != batch || targets.cols != n) {
    throw ShapeError("el_loss: targets must be [B, N]");
  }
  if (grad && (grad->batch != batch || grad->quantiles != n)) {
    throw ShapeError("el_loss: gradient batch shape mismatch");
  }
  const double inv_count = 1.0 / static_cast<double>(batch * 2 * n);
  const double levels[2] = {weights.lower_level(), weights.upper_level()};

  ELLossTerms terms;
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t l = 0; l < 2; ++l) {
      const auto level = static_cast<Percentile>(l);
      for (std::size_t i = 0; i < n; ++i) {
        const NIGParams g = params.at(b, level, i);
        const double y = targets(b, i);
        losses::NIGGrad nll_grad, reg_grad;
        double reg_yhat = 0.0;
        terms.nll += inv_count * losses::evidential_nll(y, g, grad ? &nll_grad : nullptr);
        terms.reg += inv_count * losses::evidential_reg(y, g.gamma(), levels[l], g,
                                                        grad ? &reg_grad : nullptr,
                                                        grad ? &reg_yhat : nullptr);
        if (grad) {
          const std::size_t k = params.index(b, level, i);
          const double lr = weights.lambda_reg;
          grad->gamma[k] += inv_count * (nll_grad.gamma + lr * (reg_grad.gamma + reg_yhat));
          grad->v[k] += inv_count * (nll_grad.v + lr * reg_grad.v);
          grad->alpha[k] += inv_count * (nll_grad.alpha + lr * reg_grad.alpha);
          grad->beta[k] += inv_count * (nll_grad.beta + lr * reg_grad.beta);
        }
      }
    }
  }
  terms.evidential = terms.nll + weights.lambda_reg * terms.reg;

  const std::vector<double> lower = params.gamma_plane(Percentile::p05);
  const std::vector<double> upper = params.gamma_plane(Percentile::p95);
  std::vector<double> grad_lower, grad_upper;
  if (grad) {
    grad_lower.assign(batch * n, 0.0);
    grad_upper.assign(batch * n, 0.0);
  }
  terms.cal = losses::band_cal_loss(BatchView(lower, batch, n), BatchView(upper, batch, n),
                                    targets, weights.coverage_p, weights.lambda_cal, grad_lower,
                                    grad_upper)
                  .value;

  const double inv_b = 1.0 / static_cast<double>(batch);
  std::vector<double> row_lo(n), row_hi(n);
  for (std::size_t b = 0; b < batch; ++b) {
    const auto lo = std::span<const double>(lower).subspan(b * n, n);
    const auto hi = std::span<const double>(upper).subspan(b * n, n);
    std::fill(row_lo.begin(), row_lo.end(), 0.0);
    std::fill(row_hi.begin(), row_hi.end(), 0.0);
    terms.interval += inv_b * losses::interval_loss(lo, hi, targets.row(b), weights.interval_q,
                                                    grad ? std::span<double>(row_lo) : std::span<double>{},
                                                    grad ? std::span<double>(row_hi) : std::span<double>{});
    if (grad) {
      for (std::size_t i = 0; i < n; ++i) {
        grad_lower[b * n + i] += inv_b * row_lo[i];
        grad_upper[b * n + i] += inv_b * row_hi[i];
      }
    }
  }
  if (grad) {
    for (std::size_t b = 0; b < batch; ++b) {
      for (std::size_t i = 0; i < n; ++i) {
        grad->gamma[grad->index(b, Percentile::p05, i)] += grad_lower[b * n + i];
        grad->gamma[grad->index(b, Percentile::p95, i)] += grad_upper[b * n + i];
      }
    }
  }
  terms.total = terms.evidential + terms.cal + terms.interval;
  return terms;
}

}  // namespace ceqr::objectives
