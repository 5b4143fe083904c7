#include "ceqr/losses.hpp"

#include <Eigen/Core>
#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "ceqr/errors.hpp"

namespace ceqr::losses {

using evidential::NIGParams;

QuantileLevels QuantileLevels::midpoints(std::size_t n) {
  if (n < 2) throw DomainError("quantile levels need N > 1");
  std::vector<double> levels(n);
  for (std::size_t i = 0; i < n; ++i) {
    levels[i] = (2.0 * static_cast<double>(i) + 1.0) / (2.0 * static_cast<double>(n));
  }
  return QuantileLevels(std::move(levels));
}

QuantileLevels::QuantileLevels(std::vector<double> levels) : levels_(std::move(levels)) {
  if (levels_.empty()) throw DomainError("quantile levels must be non-empty");
  for (std::size_t i = 0; i < levels_.size(); ++i) {
    if (!(levels_[i] > 0.0 && levels_[i] < 1.0)) {
      throw DomainError("quantile level outside (0, 1)");
    }
    if (i > 0 && !(levels_[i] > levels_[i - 1])) {
      throw DomainError("quantile levels must be strictly increasing");
    }
  }
}

void LossWeights::validate() const {
  if (!(kappa > 0.0)) throw ConfigError("loss.kappa must be > 0");
  if (!(lambda_reg >= 0.0)) throw ConfigError("loss.lambda_reg must be >= 0");
  if (!(lambda_cal >= 0.0 && lambda_cal <= 1.0)) throw ConfigError("loss.lambda_cal must be in [0, 1]");
  if (!(coverage_p > 0.0 && coverage_p < 1.0)) throw ConfigError("loss.coverage_p must be in (0, 1)");
  if (!(interval_q > 0.0 && interval_q < 1.0)) throw ConfigError("loss.interval_q must be in (0, 1)");
}

BatchView::BatchView(std::span<const double> v, std::size_t r, std::size_t c)
    : values(v), rows(r), cols(c) {
  if (v.size() != r * c) {
    throw ShapeError("batch view of " + std::to_string(v.size()) + " values is not [" +
                     std::to_string(r) + ", " + std::to_string(c) + "]");
  }
}

double huber(double e, double kappa) {
  const double a = std::abs(e);
  return a <= kappa ? 0.5 * e * e : kappa * (a - 0.5 * kappa);
}

double huber_derivative(double e, double kappa) {
  if (std::abs(e) <= kappa) return e;
  return e > 0.0 ? kappa : -kappa;
}

double quantile_huber(double e, double q, double kappa) {
  const double weight = std::abs(q - (e < 0.0 ? 1.0 : 0.0));
  return weight * huber(e, kappa) / kappa;
}

double quantile_huber_derivative(double e, double q, double kappa) {
  const double weight = std::abs(q - (e < 0.0 ? 1.0 : 0.0));
  return weight * huber_derivative(e, kappa) / kappa;
}

double qr_loss(std::span<const double> theta, std::span<const double> target,
               std::span<const double> levels, double kappa, std::span<double> grad_theta) {
  const std::size_t n = theta.size();
  if (target.size() != n || levels.size() != n) {
    throw ShapeError("qr_loss: theta, target and levels must share length");
  }
  if (!grad_theta.empty() && grad_theta.size() != n) {
    throw ShapeError("qr_loss: gradient buffer length mismatch");
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  const double inv_kappa = 1.0 / kappa;
  // Copied so the vectorized loops run on Eigen-aligned storage whatever the
  // caller's buffer alignment (keeps results bit-reproducible).
  const Eigen::ArrayXd y = Eigen::Map<const Eigen::ArrayXd>(target.data(), static_cast<Eigen::Index>(n));
  Eigen::ArrayXd e, a, w, h;
  double total = 0.0;
  // Same arithmetic as quantile_huber, vectorized over the targets.
  for (std::size_t i = 0; i < n; ++i) {
    const double q = levels[i];
    e = y - theta[i];
    a = e.abs();
    w = (e < 0.0).select(1.0 - q, Eigen::ArrayXd::Constant(e.size(), q));
    h = (a <= kappa).select(0.5 * e.square(), kappa * (a - 0.5 * kappa));
    total += (w * h).sum() * inv_kappa;
    if (!grad_theta.empty()) {
      grad_theta[i] -= inv_n * inv_kappa * (w * e.max(-kappa).min(kappa)).sum();
    }
  }
  return inv_n * total;
}

double tilted_loss(double y, double yhat, double q) {
  return y >= yhat ? q * (y - yhat) : (1.0 - q) * (yhat - y);
}

double tilted_loss_derivative(double y, double yhat, double q) {
  return y >= yhat ? -q : (1.0 - q);
}

double evidential_nll(double y, const NIGParams& g, NIGGrad* grad, double* grad_y) {
  const double v = g.v();
  const double a = g.alpha();
  const double b = g.beta();
  const double r = y - g.gamma();
  const double omega = 2.0 * b * (1.0 + v);
  const double s = r * r * v + omega;
  const double value = 0.5 * std::log(std::numbers::pi / v) - a * std::log(omega) +
                       (a + 0.5) * std::log(s) + boost::math::lgamma(a) -
                       boost::math::lgamma(a + 0.5);
  if (grad) {
    grad->gamma += -(a + 0.5) * 2.0 * r * v / s;
    grad->v += -0.5 / v - a * 2.0 * b / omega + (a + 0.5) * (r * r + 2.0 * b) / s;
    grad->alpha += -std::log(omega) + std::log(s) + boost::math::digamma(a) -
                   boost::math::digamma(a + 0.5);
    grad->beta += -a / b + (a + 0.5) * 2.0 * (1.0 + v) / s;
  }
  if (grad_y) *grad_y += (a + 0.5) * 2.0 * r * v / s;
  return value;
}

double evidential_reg(double y, double yhat, double q, const NIGParams& g, NIGGrad* grad,
                      double* grad_yhat) {
  const double phi = evidential::total_evidence(g);
  const double t = tilted_loss(y, yhat, q);
  if (grad) {
    grad->v += 2.0 * t;
    grad->alpha += t;
    grad->beta += -t / (g.beta() * g.beta());
  }
  if (grad_yhat) *grad_yhat += phi * tilted_loss_derivative(y, yhat, q);
  return phi * t;
}

double evidential_loss(double y, double q, const NIGParams& g, double lambda_reg, NIGGrad* grad) {
  const double nll = evidential_nll(y, g, grad);
  if (lambda_reg == 0.0) return nll;
  NIGGrad reg_grad;
  double reg_yhat = 0.0;
  const double reg = evidential_reg(y, g.gamma(), q, g, grad ? &reg_grad : nullptr,
                                    grad ? &reg_yhat : nullptr);
  if (grad) {
    grad->gamma += lambda_reg * (reg_grad.gamma + reg_yhat);
    grad->v += lambda_reg * reg_grad.v;
    grad->alpha += lambda_reg * reg_grad.alpha;
    grad->beta += lambda_reg * reg_grad.beta;
  }
  return nll + lambda_reg * reg;
}

namespace {

std::size_t complementary_index(std::span<const double> levels, std::size_t i) {
  const double want = 1.0 - levels[i];
  std::size_t best = 0;
  double best_gap = std::abs(levels[0] - want);
  for (std::size_t k = 1; k < levels.size(); ++k) {
    const double gap = std::abs(levels[k] - want);
    if (gap < best_gap) {
      best = k;
      best_gap = gap;
    }
  }
  return best;
}

}  // namespace

namespace {

// Targets of each row sorted ascending, with prefix sums, so that counts and
// sums over y <= t or y < t come from a binary search.
class SortedRows {
 public:
  explicit SortedRows(BatchView targets) : m_(targets.cols), values_(targets.values.begin(), targets.values.end()),
                                           prefix_(targets.rows * (targets.cols + 1), 0.0) {
    for (std::size_t b = 0; b < targets.rows; ++b) {
      auto* row = values_.data() + b * m_;
      std::sort(row, row + m_);
      double* p = prefix_.data() + b * (m_ + 1);
      for (std::size_t j = 0; j < m_; ++j) p[j + 1] = p[j] + row[j];
    }
  }
  std::size_t count_le(std::size_t b, double t) const {
    const auto* row = values_.data() + b * m_;
    return static_cast<std::size_t>(std::upper_bound(row, row + m_, t) - row);
  }
  std::size_t count_lt(std::size_t b, double t) const {
    const auto* row = values_.data() + b * m_;
    return static_cast<std::size_t>(std::lower_bound(row, row + m_, t) - row);
  }
  /// Sum of the first k sorted targets of row b.
  double head_sum(std::size_t b, std::size_t k) const { return prefix_[b * (m_ + 1) + k]; }
  std::size_t cols() const { return m_; }

 private:
  std::size_t m_;
  std::vector<double> values_;
  std::vector<double> prefix_;
};

}  // namespace

CalibrationTerms cal_loss(BatchView predicted, BatchView targets, std::span<const double> levels,
                          double lambda_cal, std::span<double> grad_predicted) {
  const std::size_t batch = predicted.rows;
  const std::size_t n = predicted.cols;
  const std::size_t m = targets.cols;
  if (batch == 0 || m == 0) throw DomainError("cal_loss: empty batch");
  if (targets.rows != batch) throw ShapeError("cal_loss: predicted and target batch sizes differ");
  if (levels.size() != n) throw ShapeError("cal_loss: one level per predicted quantile required");
  if (!grad_predicted.empty() && grad_predicted.size() != batch * n) {
    throw ShapeError("cal_loss: gradient buffer length mismatch");
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  const double inv_b = 1.0 / static_cast<double>(batch);
  const double total = static_cast<double>(batch * m);
  const bool want_grad = !grad_predicted.empty();
  const SortedRows sorted(targets);

  CalibrationTerms terms;
  terms.coverage.resize(n);
  std::vector<std::size_t> hits(batch);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t covered = 0;
    for (std::size_t b = 0; b < batch; ++b) covered += sorted.count_le(b, predicted(b, i));
    const double coverage = static_cast<double>(covered) / total;
    terms.coverage[i] = coverage;

    if (coverage < levels[i] || coverage > levels[i]) {
      const bool under = coverage < levels[i];
      double sum = 0.0;
      std::size_t count = 0;
      for (std::size_t b = 0; b < batch; ++b) {
        const double qhat = predicted(b, i);
        if (under) {
          // Targets strictly above qhat.
          const std::size_t le = sorted.count_le(b, qhat);
          hits[b] = m - le;
          sum += (sorted.head_sum(b, m) - sorted.head_sum(b, le)) - static_cast<double>(hits[b]) * qhat;
        } else {
          const std::size_t lt = sorted.count_lt(b, qhat);
          hits[b] = lt;
          sum += static_cast<double>(lt) * qhat - sorted.head_sum(b, lt);
        }
        count += hits[b];
      }
      if (count > 0) {
        const double inv_count = 1.0 / static_cast<double>(count);
        terms.coverage_obj += inv_n * sum * inv_count;
        if (want_grad) {
          const double scale = (1.0 - lambda_cal) * inv_n * inv_count;
          for (std::size_t b = 0; b < batch; ++b) {
            grad_predicted[b * n + i] += (under ? -scale : scale) * static_cast<double>(hits[b]);
          }
        }
      }
    }

    // Sharpness only applies while the centered interval between quantile i
    // and its complement holds at least its nominal share of the targets.
    const std::size_t c = complementary_index(levels, i);
    const double sign = levels[i] <= 0.5 ? -1.0 : 1.0;
    std::size_t inside = 0;
    for (std::size_t b = 0; b < batch; ++b) {
      const double lo = std::min(predicted(b, i), predicted(b, c));
      const double hi = std::max(predicted(b, i), predicted(b, c));
      inside += sorted.count_le(b, hi) - sorted.count_lt(b, lo);
    }
    if (static_cast<double>(inside) / total < std::abs(levels[i] - levels[c])) continue;
    for (std::size_t b = 0; b < batch; ++b) {
      terms.sharpness_obj += inv_n * inv_b * sign * (predicted(b, i) - predicted(b, c));
      if (want_grad) {
        grad_predicted[b * n + i] += lambda_cal * inv_n * inv_b * sign;
        grad_predicted[b * n + c] -= lambda_cal * inv_n * inv_b * sign;
      }
    }
  }
  terms.value = (1.0 - lambda_cal) * terms.coverage_obj + lambda_cal * terms.sharpness_obj;
  return terms;
}

CalibrationTerms band_cal_loss(BatchView lower, BatchView upper, BatchView targets, double p,
                               double lambda_cal, std::span<double> grad_lower,
                               std::span<double> grad_upper) {
  const std::size_t batch = lower.rows;
  const std::size_t n = lower.cols;
  if (batch == 0) throw DomainError("band_cal_loss: empty batch");
  if (upper.rows != batch || upper.cols != n || targets.rows != batch || targets.cols != n) {
    throw ShapeError("band_cal_loss: bounds and targets must all be [B, N]");
  }
  const bool want_grad = !grad_lower.empty();
  if (want_grad && (grad_lower.size() != batch * n || grad_upper.size() != batch * n)) {
    throw ShapeError("band_cal_loss: gradient buffer length mismatch");
  }
  // Averaged over the 2N bounds.
  const double inv_2n = 0.5 / static_cast<double>(n);
  const double inv_b = 1.0 / static_cast<double>(batch);

  CalibrationTerms terms;
  terms.coverage.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t inside = 0;
    for (std::size_t b = 0; b < batch; ++b) {
      const double y = targets(b, i);
      inside += (lower(b, i) <= y && y <= upper(b, i)) ? 1 : 0;
    }
    const double coverage = static_cast<double>(inside) / static_cast<double>(batch);
    terms.coverage[i] = coverage;

    if (coverage != p) {
      const bool under = coverage < p;
      // Upper bound: raised by points above it, or lowered toward points below.
      // Lower bound mirrors it.
      double up_sum = 0.0, lo_sum = 0.0;
      std::size_t up_count = 0, lo_count = 0;
      for (std::size_t b = 0; b < batch; ++b) {
        const double y = targets(b, i);
        const double hi = upper(b, i);
        const double lo = lower(b, i);
        if (under ? y > hi : y < hi) {
          up_sum += under ? y - hi : hi - y;
          ++up_count;
        }
        if (under ? y < lo : y > lo) {
          lo_sum += under ? lo - y : y - lo;
          ++lo_count;
        }
      }
      if (up_count > 0) terms.coverage_obj += inv_2n * up_sum / static_cast<double>(up_count);
      if (lo_count > 0) terms.coverage_obj += inv_2n * lo_sum / static_cast<double>(lo_count);
      if (want_grad) {
        const double w = (1.0 - lambda_cal) * inv_2n;
        for (std::size_t b = 0; b < batch; ++b) {
          const double y = targets(b, i);
          if (up_count > 0 && (under ? y > upper(b, i) : y < upper(b, i))) {
            grad_upper[b * n + i] += (under ? -w : w) / static_cast<double>(up_count);
          }
          if (lo_count > 0 && (under ? y < lower(b, i) : y > lower(b, i))) {
            grad_lower[b * n + i] += (under ? w : -w) / static_cast<double>(lo_count);
          }
        }
      }
    }

    if (coverage < p) continue;  // sharpness is only traded against surplus coverage
    for (std::size_t b = 0; b < batch; ++b) {
      terms.sharpness_obj += 2.0 * inv_2n * inv_b * (upper(b, i) - lower(b, i));
      if (want_grad) {
        grad_upper[b * n + i] += lambda_cal * 2.0 * inv_2n * inv_b;
        grad_lower[b * n + i] -= lambda_cal * 2.0 * inv_2n * inv_b;
      }
    }
  }
  terms.value = (1.0 - lambda_cal) * terms.coverage_obj + lambda_cal * terms.sharpness_obj;
  return terms;
}

double interval_loss(std::span<const double> lower, std::span<const double> upper,
                     std::span<const double> y, double interval_q,
                     std::span<double> grad_lower, std::span<double> grad_upper) {
  const std::size_t n = lower.size();
  if (upper.size() != n || y.size() != n) throw ShapeError("interval_loss: length mismatch");
  if (n == 0) throw DomainError("interval_loss: empty input");
  const bool want_grad = !grad_lower.empty();
  if (want_grad && (grad_lower.size() != n || grad_upper.size() != n)) {
    throw ShapeError("interval_loss: gradient buffer length mismatch");
  }
  const double penalty = 2.0 / interval_q;
  const double inv_n = 1.0 / static_cast<double>(n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    total += upper[i] - lower[i];
    double d_lo = -1.0, d_hi = 1.0;
    if (y[i] < lower[i]) {
      total += penalty * (lower[i] - y[i]);
      d_lo += penalty;
    }
    if (y[i] > upper[i]) {
      total += penalty * (y[i] - upper[i]);
      d_hi -= penalty;
    }
    if (want_grad) {
      grad_lower[i] += inv_n * d_lo;
      grad_upper[i] += inv_n * d_hi;
    }
  }
  return inv_n * total;
}

double interval_loss(std::span<const double> lower, std::span<const double> upper, double y,
                     double interval_q) {
  std::vector<double> targets(lower.size(), y);
  return interval_loss(lower, upper, targets, interval_q);
}

}  // namespace ceqr::losses
