#pragma once

#include <cstddef>
#include <cstdint>
#include <ostream>
#include <vector>

#include "ceqr/losses.hpp"

namespace ceqr::synthetic {

/// sin(3x) cos(2x) + 0.5 exp(-x^2) + x^2 - 0.1 x
double target_function(double x);
/// Variance 1.5 exp(-0.4 |x|), scaled by `noise_scale`.
double noise_variance(double x, double noise_scale = 1.0);

struct DataConfig {
  double train_lo = -3.0;
  double train_hi = 3.0;
  double test_lo = -5.0;
  double test_hi = 5.0;
  double noise_scale = 1.0;  ///< multiplies the variance; 0 gives noise-free targets
  void validate() const;
};

struct Dataset {
  std::vector<double> train_x, train_y;
  std::vector<double> test_x, test_y;
  DataConfig config;
};

/// Train x uniform on the train range, test x uniform on the test range.
Dataset generate(std::size_t n_train, std::size_t n_test, std::uint64_t seed,
                 const DataConfig& config = {});

struct ModelConfig {
  std::vector<std::size_t> hidden = {64, 64};
  std::size_t steps = 4000;
  std::size_t batch_size = 256;
  double learning_rate = 1e-3;
  /// Standardize inputs and targets with train-set statistics.
  bool normalize = true;
  losses::LossWeights loss;
  std::uint64_t seed = 0;
  /// Mean band width on the train set is recorded every this many steps.
  std::size_t history_every = 100;
  void validate() const;
};

struct CurvePoint {
  double x = 0.0;
  double y_true = 0.0;  ///< noise-free f(x)
  double y = 0.0;       ///< observed sample
  double q05 = 0.0;
  double q95 = 0.0;
  double aleatoric = 0.0;
  double epistemic = 0.0;
  bool in_distribution = false;
};

struct Report {
  double coverage_in = 0.0;   ///< 5th-95th band coverage on test points inside the train range
  double coverage_out = 0.0;  ///< same, outside it (logged only)
  double epistemic_in = 0.0;  ///< mean on |x| <= 3
  double epistemic_ood = 0.0; ///< mean on 4 <= |x| <= 5
  double inflation() const { return epistemic_ood / epistemic_in; }
  double final_loss = 0.0;
  std::vector<CurvePoint> curve;  ///< test points sorted by x
  std::vector<double> aleatoric_history;
};

/// Trains a dense network with the evidential head on the train split using
/// the evidential loss, band calibration and interval score, then audits the
/// test split. Throws TrainingError naming the step on a non-finite loss.
Report fit_and_evaluate(const Dataset& data, const ModelConfig& config);

/// x,y_true,y,q05,q95,aleatoric,epistemic,in_distribution
void write_curve_csv(std::ostream& out, const Report& report);

}  // namespace ceqr::synthetic
