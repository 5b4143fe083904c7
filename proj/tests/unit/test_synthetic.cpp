#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "ceqr/errors.hpp"
#include "ceqr/synthetic.hpp"

using namespace ceqr;
using namespace ceqr::synthetic;

TEST(Synthetic, TargetFunctionAtZero) { EXPECT_DOUBLE_EQ(target_function(0.0), 0.5); }

TEST(Synthetic, NoiseLaw) {
  EXPECT_NEAR(std::sqrt(noise_variance(0.0)), 1.2247, 5e-5);
  EXPECT_NEAR(std::sqrt(noise_variance(5.0)), 0.4505, 1e-4);
  EXPECT_DOUBLE_EQ(noise_variance(-5.0), noise_variance(5.0));
  EXPECT_EQ(noise_variance(1.0, 0.0), 0.0);
}

TEST(Synthetic, GenerateIsDeterministicAndInRange) {
  const auto a = generate(500, 300, 17);
  const auto b = generate(500, 300, 17);
  EXPECT_EQ(a.train_x, b.train_x);
  EXPECT_EQ(a.train_y, b.train_y);
  EXPECT_EQ(a.test_y, b.test_y);
  EXPECT_NE(generate(500, 300, 18).train_y, a.train_y);
  for (double x : a.train_x) {
    EXPECT_GE(x, -3.0);
    EXPECT_LE(x, 3.0);
  }
  double lo = 0, hi = 0;
  for (double x : a.test_x) lo = std::min(lo, x), hi = std::max(hi, x);
  EXPECT_LT(lo, -4.0);
  EXPECT_GT(hi, 4.0);
}

TEST(Synthetic, NoiseFreeTargetsEqualFunction) {
  DataConfig cfg;
  cfg.noise_scale = 0.0;
  const auto d = generate(50, 10, 1, cfg);
  for (std::size_t k = 0; k < d.train_x.size(); ++k) {
    EXPECT_EQ(d.train_y[k], target_function(d.train_x[k]));
  }
}

TEST(Synthetic, NoiseFreeAleatoricShrinks) {
  DataConfig dc;
  dc.noise_scale = 0.0;
  const auto data = generate(500, 200, 3, dc);
  ModelConfig mc;
  mc.steps = 1500;
  mc.batch_size = 128;
  mc.history_every = 100;
  const auto report = fit_and_evaluate(data, mc);
  const auto& h = report.aleatoric_history;
  ASSERT_GE(h.size(), 10u);
  // Compare averages of the first and last thirds.
  const std::size_t third = h.size() / 3;
  double early = 0, late = 0;
  for (std::size_t k = 0; k < third; ++k) {
    early += h[k];
    late += h[h.size() - 1 - k];
  }
  EXPECT_LT(late, early);
  EXPECT_LT(h.back(), h.front());
}

TEST(Synthetic, ReportIsDeterministic) {
  const auto data = generate(300, 100, 4);
  ModelConfig mc;
  mc.steps = 200;
  const auto a = fit_and_evaluate(data, mc);
  const auto b = fit_and_evaluate(data, mc);
  EXPECT_EQ(a.coverage_in, b.coverage_in);
  EXPECT_EQ(a.epistemic_ood, b.epistemic_ood);
  std::ostringstream sa, sb;
  write_curve_csv(sa, a);
  write_curve_csv(sb, b);
  EXPECT_EQ(sa.str(), sb.str());
  EXPECT_EQ(sa.str().substr(0, sa.str().find('\n')),
            "x,y_true,y,q05,q95,aleatoric,epistemic,in_distribution");
  EXPECT_EQ(a.curve.size(), 100u);
}

TEST(Synthetic, DivergenceNamesStep) {
  auto data = generate(100, 20, 5);
  data.train_y[3] = std::numeric_limits<double>::quiet_NaN();
  ModelConfig mc;
  mc.steps = 50;
  mc.batch_size = 100;
  mc.normalize = false;
  try {
    fit_and_evaluate(data, mc);
    FAIL() << "expected TrainingError";
  } catch (const TrainingError& e) {
    EXPECT_NE(std::string(e.what()).find("step"), std::string::npos) << e.what();
  }
}

TEST(Synthetic, ConfigValidation) {
  ModelConfig mc;
  mc.steps = 0;
  EXPECT_THROW(mc.validate(), ConfigError);
  DataConfig dc;
  dc.train_lo = 4.0;
  EXPECT_THROW(dc.validate(), ConfigError);
}
