#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ceqr/evidential.hpp"

namespace ceqr::losses {

/// Quantile midpoints (2i - 1) / (2N), i = 1..N, for N > 1.
class QuantileLevels {
 public:
  static QuantileLevels midpoints(std::size_t n);
  /// Arbitrary strictly increasing levels in (0, 1).
  explicit QuantileLevels(std::vector<double> levels);

  std::size_t size() const noexcept { return levels_.size(); }
  std::span<const double> values() const noexcept { return levels_; }
  double operator[](std::size_t i) const { return levels_[i]; }

 private:
  std::vector<double> levels_;
};

struct LossWeights {
  double kappa = 1.0;
  double lambda_reg = 0.5;
  double lambda_cal = 0.5;
  double coverage_p = 0.9;
  double interval_q = 0.1;  ///< miscoverage rate in the interval score's 2/q
  void validate() const;
  double lower_level() const { return 0.5 * (1.0 - coverage_p); }
  double upper_level() const { return 0.5 * (1.0 + coverage_p); }
};

/// Row-major read-only view of a [rows, cols] batch.
struct BatchView {
  std::span<const double> values;
  std::size_t rows = 0;
  std::size_t cols = 0;

  BatchView() = default;
  BatchView(std::span<const double> v, std::size_t r, std::size_t c);
  double operator()(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
  std::span<const double> row(std::size_t r) const { return values.subspan(r * cols, cols); }
};

double huber(double e, double kappa);
double huber_derivative(double e, double kappa);

/// |q - 1{e < 0}| L_kappa(e) / kappa.
double quantile_huber(double e, double q, double kappa);
double quantile_huber_derivative(double e, double q, double kappa);

/// (1/N) sum_i sum_j rho_{tau_i}(target_j - theta_i). When `grad_theta` is
/// non-empty, d loss / d theta is accumulated into it; targets carry no
/// gradient.
double qr_loss(std::span<const double> theta, std::span<const double> target,
               std::span<const double> levels, double kappa,
               std::span<double> grad_theta = {});

/// q (y - yhat) for y >= yhat, (1 - q)(yhat - y) otherwise.
double tilted_loss(double y, double yhat, double q);
/// d tilted_loss / d yhat.
double tilted_loss_derivative(double y, double yhat, double q);

struct NIGGrad {
  double gamma = 0.0;
  double v = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
};

/// Negative log of the Student-t marginal with Omega = 2 beta (1 + v).
double evidential_nll(double y, const evidential::NIGParams& g, NIGGrad* grad = nullptr,
                      double* grad_y = nullptr);

/// Total evidence times the tilted loss.
double evidential_reg(double y, double yhat, double q, const evidential::NIGParams& g,
                      NIGGrad* grad = nullptr, double* grad_yhat = nullptr);

/// nll + lambda_reg * reg, with the prediction taken as gamma.
double evidential_loss(double y, double q, const evidential::NIGParams& g, double lambda_reg,
                       NIGGrad* grad = nullptr);

struct CalibrationTerms {
  double coverage_obj = 0.0;
  double sharpness_obj = 0.0;
  double value = 0.0;
  std::vector<double> coverage;  ///< empirical coverage per quantile index
};

/// Coverage/sharpness calibration of a [B, N] set of predicted quantiles at
/// `levels` against [B, M] target samples. Coverage of quantile i is the
/// fraction of all (b, j) with y_bj <= qhat_bi. An under-covered quantile is
/// pushed up by the mean exceedance over the targets above it; an
/// over-covered one is pulled down by the mean shortfall over the targets
/// below it. Sharpness is the signed distance to the quantile at the
/// complementary level, counted only while the interval between the two holds
/// at least its nominal share of targets.
CalibrationTerms cal_loss(BatchView predicted, BatchView targets, std::span<const double> levels,
                          double lambda_cal, std::span<double> grad_predicted = {});

/// The same objective applied to a central band [lower, upper] with nominal
/// coverage p. The width penalty is active only when coverage is at least p. Inputs are [B, N]; column i of `targets` pairs with column i of
/// the bounds.
CalibrationTerms band_cal_loss(BatchView lower, BatchView upper, BatchView targets, double p,
                               double lambda_cal, std::span<double> grad_lower = {},
                               std::span<double> grad_upper = {});

/// Interval score averaged over N paired bounds and targets.
double interval_loss(std::span<const double> lower, std::span<const double> upper,
                     std::span<const double> y, double interval_q,
                     std::span<double> grad_lower = {}, std::span<double> grad_upper = {});
/// Broadcast form: one target for all N intervals.
double interval_loss(std::span<const double> lower, std::span<const double> upper, double y,
                     double interval_q);

/// Quantile-value objective: regression plus calibration.
inline double total_z_loss(double qr, double cal) { return qr + cal; }
/// Evidential objective: evidential loss plus calibration plus interval score.
inline double total_el_loss(double evidential, double cal, double interval) {
  return evidential + cal + interval;
}

}  // namespace ceqr::losses
