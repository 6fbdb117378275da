#include <gtest/gtest.h>

#include <algorithm>

#include "mom/baselines.hpp"
#include "mom/mom.hpp"
#include "mom/testing/oracles.hpp"
#include "sample_fixtures.hpp"

using namespace mom;

namespace {

SupervisedSample regression_point(const Vector& z, const Vector& c) {
  SupervisedSample s;
  s.sample.z = z;
  s.c = c;
  return s;
}

std::vector<SupervisedSample> linear_data(Rng& rng, const Matrix& theta, std::size_t T) {
  std::vector<SupervisedSample> out;
  for (std::size_t t = 0; t < T; ++t) {
    Vector z(theta.cols());
    for (Index k = 0; k < z.size(); ++k) z(k) = rng.normal();
    out.push_back(regression_point(z, theta * z));
  }
  return out;
}

}  // namespace

TEST(Ols, StandardBasisInterpolates) {
  Rng rng(1);
  std::vector<SupervisedSample> data;
  Matrix C = fixtures::random_theta(rng, 4, 3);
  for (Index k = 0; k < 3; ++k) data.push_back(regression_point(Vector::Unit(3, k), C.col(k)));
  const auto fit = ols_fit(data);
  EXPECT_FALSE(fit.used_pseudo_inverse);
  EXPECT_TRUE(fit.theta_hat.theta.isApprox(C, 1e-12));
}

TEST(Ols, RecoversNoiselessMap) {
  Rng rng(2);
  const Matrix theta = fixtures::random_theta(rng, 6, 4);
  const auto fit = ols_fit(linear_data(rng, theta, 50));
  EXPECT_LT((fit.theta_hat.theta - theta).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Ols, UnderdeterminedUsesPseudoInverse) {
  Rng rng(3);
  const Matrix theta = fixtures::random_theta(rng, 5, 6);
  const auto data = linear_data(rng, theta, 3);
  const auto fit = ols_fit(data);
  EXPECT_TRUE(fit.used_pseudo_inverse);
  for (const auto& s : data)
    EXPECT_LT((fit.theta_hat.theta * s.sample.z - s.c).norm(), 1e-9);
  EXPECT_THROW(ols_fit(data, false), SingularGram);
}

TEST(Ridge, ZeroPenaltyIsOls) {
  Rng rng(4);
  const auto data = linear_data(rng, fixtures::random_theta(rng, 3, 3), 20);
  EXPECT_TRUE(ridge_fit(data, 0.0).theta_hat.theta.isApprox(ols_fit(data).theta_hat.theta));
}

TEST(Ridge, HandComputedScalarCase) {
  // (3*1 + 5*2) / (1 + 4 + 2 * 0.5) = 13 / 6
  std::vector<SupervisedSample> data{regression_point(Vector{{1.0}}, Vector{{3.0}}),
                                     regression_point(Vector{{2.0}}, Vector{{5.0}})};
  EXPECT_NEAR(ridge_fit(data, 0.5).theta_hat.theta(0, 0), 13.0 / 6.0, 1e-15);
}

TEST(Ridge, ShrinkageBoundAndMonotoneNorm) {
  Rng rng(5);
  const auto data = linear_data(rng, fixtures::random_theta(rng, 4, 3), 30);
  Matrix cz = Matrix::Zero(4, 3);
  for (const auto& s : data) cz += s.c * s.sample.z.transpose();
  double prev = std::numeric_limits<double>::infinity();
  for (double lam : {1e-3, 1e-1, 1.0, 10.0, 1e4}) {
    const double nrm = ridge_fit(data, lam).theta_hat.theta.norm();
    EXPECT_LE(nrm, prev);
    EXPECT_LE(nrm, cz.norm() / (30.0 * lam) + 1e-12);
    prev = nrm;
  }
}

TEST(SpoPlus, VanishesAtTruthAndIsNonnegative) {
  InstanceGenerator gen(ProblemSpec::sp_default(1), 6);
  const auto data = gen.batch(0, 20);
  Rng rng(6);
  for (const auto& s : data) {
    const Matrix exact = s.c * s.sample.z.transpose() / s.sample.z.squaredNorm();
    EXPECT_NEAR(spo_plus_loss(s, exact), 0.0, 1e-9);
    for (int k = 0; k < 5; ++k)
      EXPECT_GE(spo_plus_loss(s, fixtures::random_theta(rng, 40, 6)), -1e-9);
  }
}

TEST(SpoPlus, SubgradientMatchesFiniteDifferences) {
  InstanceGenerator gen(ProblemSpec::fk_default(1), 7);
  const auto data = gen.batch(0, 10);
  Rng rng(7);
  for (const auto& s : data) {
    const Matrix theta = fixtures::random_theta(rng, s.c.size(), s.sample.d());
    const Matrix fd = oracles::finite_difference_gradient(
        [&](const Matrix& th) { return spo_plus_loss(s, th); }, theta);
    EXPECT_LE(oracles::relative_error(spo_plus_subgradient(s, theta), fd), 1e-4);
  }
}

TEST(SpoPlus, FitImprovesOnZero) {
  InstanceGenerator gen(ProblemSpec::fk_default(2), 8);
  const auto data = gen.batch(0, 100);
  SpoPlusConfig cfg;
  cfg.steps = 400;
  cfg.step = 0.01;
  const auto rep = spo_plus_fit(data, cfg);
  double zero = 0.0, fitted = 0.0;
  const Matrix origin = Matrix::Zero(rep.theta_hat.theta.rows(), rep.theta_hat.theta.cols());
  for (const auto& s : data) {
    zero += spo_plus_loss(s, origin);
    fitted += spo_plus_loss(s, rep.theta_hat.theta);
  }
  EXPECT_LT(fitted, zero);
  EXPECT_EQ(rep.skipped, 0u);
  const auto again = spo_plus_fit(data, cfg);
  EXPECT_EQ(again.theta_hat.theta, rep.theta_hat.theta);
}

TEST(ScaleContrast, DoublingCostsDoublesOlsAndLeavesMomAlone) {
  InstanceGenerator gen(ProblemSpec::fk_default(1), 9);
  auto data = gen.batch(0, 60);
  const Matrix ols = ols_fit(data).theta_hat.theta;
  MomFitConfig cfg;
  const Matrix mom = mom_fit(training_refs(data), cfg).theta_hat.theta;
  for (auto& s : data) s.c *= 2.0;
  EXPECT_TRUE(ols_fit(data).theta_hat.theta.isApprox(2.0 * ols, 1e-12));
  EXPECT_EQ(mom_fit(training_refs(data), cfg).theta_hat.theta, mom);
}

TEST(Probe, ZeroMeanScaleNoiseConverges) {
  Rng rng(10);
  const Matrix theta = fixtures::random_theta(rng, 3, 4);
  const auto rows = ols_scale_consistency_probe(theta, {0.0, 0.8, 0.2}, {100, 10000}, 3);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_LT(rows[1].deviation, rows[0].deviation);
  const auto shifted = ols_scale_consistency_probe(theta, {0.5, 0.8, 0.2}, {100, 10000}, 3);
  EXPECT_LT(shifted[1].deviation, 0.1 * theta.norm());
}
