#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include "mom/features.hpp"
#include "sample_fixtures.hpp"

using namespace mom;

namespace {

Matrix random_points(Rng& rng, Index T, Index d) {
  Matrix P(T, d);
  for (Index i = 0; i < T; ++i)
    for (Index j = 0; j < d; ++j) P(i, j) = rng.normal();
  return P;
}

double min_eigenvalue(const Matrix& K) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(K, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

}  // namespace

TEST(Kernel, RbfSelfSimilarityIsOne) {
  Rng rng(1);
  for (double g : {0.1, 1.0, 7.0}) {
    const Vector z = random_points(rng, 1, 4).row(0).transpose();
    EXPECT_EQ(kernel_eval(KernelSpec::rbf(g), z, z), 1.0);
  }
}

TEST(Kernel, PolynomialHandValues) {
  const Vector zero = Vector::Zero(2);
  EXPECT_EQ(kernel_eval(KernelSpec::polynomial(1.0, 2), zero, zero), 1.0);
  const Vector ones = Vector::Ones(2);
  EXPECT_EQ(kernel_eval(KernelSpec::polynomial(2.0, 2), ones, ones), 4.0);
}

TEST(Kernel, Symmetric) {
  Rng rng(2);
  const Matrix P = random_points(rng, 2, 5);
  for (const auto& spec : {KernelSpec::linear(), KernelSpec::polynomial(1.5, 3),
                           KernelSpec::rbf(2.0)}) {
    EXPECT_EQ(kernel_eval(spec, P.row(0).transpose(), P.row(1).transpose()),
              kernel_eval(spec, P.row(1).transpose(), P.row(0).transpose()));
  }
}

TEST(Kernel, GramMatricesArePositiveSemidefinite) {
  Rng rng(3);
  for (int rep = 0; rep < 20; ++rep) {
    const Matrix P = random_points(rng, 30, 4);
    EXPECT_GE(min_eigenvalue(gram_matrix(KernelSpec::rbf(1.0 + rep), P)), -1e-8);
    EXPECT_GE(min_eigenvalue(gram_matrix(KernelSpec::polynomial(2.0, 1 + rep % 4), P)),
              -1e-8);
  }
}

TEST(Kernel, LinearOrthonormalGramIsIdentity) {
  std::vector<TrainingSample> data;
  const TrainingSample base = fixtures::two_variable_sample();
  for (Index k = 0; k < 3; ++k) {
    TrainingSample s = base;
    s.z = Vector::Unit(3, k);
    data.push_back(s);
  }
  KernelSpec spec = KernelSpec::linear();
  spec.normalize = false;
  const auto out = kernelize_dataset(sample_refs(data), spec);
  for (Index k = 0; k < 3; ++k) EXPECT_EQ(out.samples[k].z, Vector::Unit(3, k));
}

TEST(Kernel, RbfGramDiagonalIsOne) {
  Rng rng(4);
  EXPECT_TRUE(gram_matrix(KernelSpec::rbf(0.5), random_points(rng, 10, 3))
                  .diagonal()
                  .isApprox(Vector::Ones(10)));
}

TEST(Kernel, TransformerReproducesTrainingRows) {
  Rng rng(5);
  std::vector<TrainingSample> data;
  for (int t = 0; t < 15; ++t) data.push_back(fixtures::random_sample(rng, 5, 2, 3));
  for (const auto& spec : {KernelSpec::polynomial(1.0, 2), KernelSpec::rbf(3.0)}) {
    const auto out = kernelize_dataset(sample_refs(data), spec);
    double top = 0.0;
    for (std::size_t t = 0; t < data.size(); ++t) {
      EXPECT_EQ(out.transformer(data[t].z), out.samples[t].z);
      top = std::max(top, out.samples[t].z.norm());
      EXPECT_EQ(out.samples[t].x_star, data[t].x_star);
    }
    EXPECT_NEAR(top, 1.0, 1e-12);
  }
}

TEST(Kernel, RejectsBadSpecs) {
  EXPECT_THROW(KernelSpec::rbf(0.0).validate(), std::invalid_argument);
  EXPECT_THROW(KernelSpec::polynomial(1.0, 0).validate(), std::invalid_argument);
  EXPECT_EQ(parse_kernel_kind("rbf"), KernelKind::Rbf);
  EXPECT_THROW(parse_kernel_kind("sigmoid"), std::invalid_argument);
}
