#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "ceqr/errors.hpp"
#include "ceqr/evidential.hpp"
#include "../support/oracles.hpp"

using namespace ceqr;
using namespace ceqr::evidential;

TEST(NIGParams, RejectsInvalidParameters) {
  EXPECT_THROW(NIGParams(0, 0.0, 2, 1), DomainError);
  EXPECT_THROW(NIGParams(0, 1, 1.0, 1), DomainError);
  EXPECT_THROW(NIGParams(0, 1, 2, -1), DomainError);
  EXPECT_THROW(NIGParams(NAN, 1, 2, 1), DomainError);
  EXPECT_NO_THROW(NIGParams(-3, 1e-3, 1.0001, 1e-3));
}

TEST(NigDensity, HandEvaluatedValue) {
  const NIGParams g(0, 1, 2, 1);
  EXPECT_NEAR(nig_density(0.0, 1.0, g), std::exp(-1.0) / std::sqrt(2 * M_PI), 1e-14);
  EXPECT_NEAR(nig_density(0.0, 1.0, g), 0.14676, 5e-6);
}

TEST(NigDensity, SymmetricAboutGamma) {
  const NIGParams g(1.5, 0.7, 3.2, 2.0);
  for (double d : {0.1, 0.5, 2.0, 7.0}) {
    for (double s2 : {0.2, 1.0, 5.0}) {
      EXPECT_DOUBLE_EQ(nig_density(1.5 + d, s2, g), nig_density(1.5 - d, s2, g));
    }
  }
}

TEST(NigDensity, NonPositiveVarianceIsDomainError) {
  const NIGParams g(0, 1, 2, 1);
  EXPECT_THROW(nig_density(0, 0.0, g), DomainError);
  EXPECT_THROW(nig_density(0, -1.0, g), DomainError);
}

TEST(NigDensity, IntegratesToOne) {
  for (auto [v, a, b] : {std::tuple{0.1, 1.1, 0.1}, std::tuple{1.0, 2.0, 1.0},
                         std::tuple{10.0, 10.0, 10.0}, std::tuple{0.5, 5.0, 3.0}}) {
    EXPECT_NEAR(test::nig_mass(NIGParams(0.3, v, a, b)), 1.0, 1e-3) << v << " " << a << " " << b;
  }
}

TEST(StudentT, HandEvaluatedValue) {
  EXPECT_NEAR(student_t_marginal_logpdf(0.0, NIGParams(0, 1, 2, 1)), std::log(0.375), 1e-13);
  EXPECT_NEAR(student_t_marginal_logpdf(0.0, NIGParams(0, 1, 2, 1)), -0.98083, 5e-6);
}

TEST(StudentT, MaximizedAtGamma) {
  const NIGParams g(2.0, 0.4, 1.7, 0.9);
  const double peak = student_t_marginal_logpdf(2.0, g);
  for (double d : {1e-3, 0.1, 1.0, 10.0}) {
    EXPECT_LT(student_t_marginal_logpdf(2.0 + d, g), peak);
    EXPECT_LT(student_t_marginal_logpdf(2.0 - d, g), peak);
  }
}

TEST(StudentT, MatchesQuadratureOfNormalTimesNig) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> v(0.2, 5), a(1.5, 6), b(0.2, 4), y(-3, 3);
  for (int k = 0; k < 5; ++k) {
    const NIGParams g(0.5, v(rng), a(rng), b(rng));
    const double yy = y(rng);
    EXPECT_NEAR(std::exp(student_t_marginal_logpdf(yy, g)), test::marginal_by_quadrature(yy, g),
                1e-4);
  }
}

TEST(Decompose, DirectFormula) {
  const auto u = decompose(NIGParams(0, 2, 3, 4));
  EXPECT_DOUBLE_EQ(u.prediction, 0.0);
  EXPECT_DOUBLE_EQ(u.aleatoric, 2.0);
  EXPECT_DOUBLE_EQ(u.epistemic, 1.0);
}

TEST(Decompose, LargeEvidenceRemovesEpistemicOnly) {
  const auto lo = decompose(NIGParams(0, 1, 3, 4));
  const auto hi = decompose(NIGParams(0, 1e12, 3, 4));
  EXPECT_LT(hi.epistemic, 1e-11);
  EXPECT_DOUBLE_EQ(hi.aleatoric, lo.aleatoric);
}

TEST(Decompose, AleatoricMatchesInverseGammaMean) {
  for (auto [a, b] : {std::pair{1.5, 0.5}, std::pair{2.0, 1.0}, std::pair{7.0, 9.0}}) {
    EXPECT_NEAR(decompose(NIGParams(0, 1, a, b)).aleatoric,
                test::expected_variance_by_quadrature(a, b), 1e-4);
  }
}

TEST(TotalEvidence, DirectFormulaAndMonotonicity) {
  EXPECT_DOUBLE_EQ(total_evidence(NIGParams(7, 1, 2, 1)), 5.0);
  const double base = total_evidence(NIGParams(0, 1, 2, 1));
  EXPECT_GT(total_evidence(NIGParams(0, 1.5, 2, 1)), base);
  EXPECT_GT(total_evidence(NIGParams(0, 1, 2.5, 1)), base);
  EXPECT_LT(total_evidence(NIGParams(0, 1, 2, 1.5)), base);
}

namespace {

NIGQuantileSet uniform_set(std::size_t actions, std::size_t n, double v, double alpha,
                           double beta, double gap) {
  std::vector<NIGParams> params;
  for (std::size_t a = 0; a < actions; ++a) {
    for (std::size_t level = 0; level < 2; ++level) {
      for (std::size_t i = 0; i < n; ++i) {
        params.emplace_back(level == 0 ? 0.0 : gap, v, alpha, beta);
      }
    }
  }
  return NIGQuantileSet(actions, n, std::move(params));
}

}  // namespace

TEST(ActionUncertainties, SharedSdGivesTwiceSd) {
  const auto set = uniform_set(2, 5, 2.0, 3.0, 4.0, 0.0);
  const double s = evidential_sd(NIGParams(0, 2, 3, 4));
  EXPECT_DOUBLE_EQ(s, 1.0);
  for (std::size_t a = 0; a < 2; ++a) {
    const auto u = action_uncertainties(set, a);
    EXPECT_NEAR(u.epistemic, 2.0 * s, 1e-15);
    EXPECT_EQ(u.aleatoric, 0.0);
  }
}

TEST(ActionUncertainties, AleatoricIsMeanGap) {
  const auto set = uniform_set(1, 4, 1, 2, 1, 1.5);
  EXPECT_DOUBLE_EQ(action_uncertainties(set, 0).aleatoric, 1.5);
}

TEST(ActionUncertainties, PermutationEquivariantOverActions) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.5, 3.0);
  const std::size_t n = 3;
  std::vector<NIGParams> a0, a1;
  for (int k = 0; k < 2 * static_cast<int>(n); ++k) a0.emplace_back(u(rng), u(rng), 1 + u(rng), u(rng));
  for (int k = 0; k < 2 * static_cast<int>(n); ++k) a1.emplace_back(u(rng), u(rng), 1 + u(rng), u(rng));
  std::vector<NIGParams> fwd = a0, rev = a1;
  fwd.insert(fwd.end(), a1.begin(), a1.end());
  rev.insert(rev.end(), a0.begin(), a0.end());
  const NIGQuantileSet s1(2, n, fwd), s2(2, n, rev);
  EXPECT_EQ(action_uncertainties(s1, 0).epistemic, action_uncertainties(s2, 1).epistemic);
  EXPECT_EQ(action_uncertainties(s1, 1).aleatoric, action_uncertainties(s2, 0).aleatoric);
}

TEST(NIGQuantileSet, FlatLayoutIsFieldActionLevelQuantile) {
  const std::size_t A = 2, N = 3;
  std::vector<double> block(4 * A * 2 * N);
  for (std::size_t f = 0; f < 4; ++f) {
    for (std::size_t a = 0; a < A; ++a) {
      for (std::size_t l = 0; l < 2; ++l) {
        for (std::size_t i = 0; i < N; ++i) {
          const double tag = 100.0 * a + 10.0 * l + i;
          block[((f * A + a) * 2 + l) * N + i] = f == 0 ? tag : (f == 2 ? 2.0 + tag : 1.0 + tag);
        }
      }
    }
  }
  const auto set = NIGQuantileSet::from_flat(block, A, N);
  const auto& p = set.at(1, Percentile::p95, 2);
  EXPECT_EQ(p.gamma(), 112.0);
  EXPECT_EQ(p.v(), 113.0);
  EXPECT_EQ(p.alpha(), 114.0);
  EXPECT_EQ(p.beta(), 113.0);
  EXPECT_THROW(NIGQuantileSet::from_flat(std::span(block).subspan(1), A, N), ShapeError);
}
