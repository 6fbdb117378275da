#include <gtest/gtest.h>

#include "mom/lp_core.hpp"
#include "mom/lp_oracle.hpp"
#include "mom/testing/random_lp.hpp"

using namespace mom;

namespace {

StandardFormLP one_row(double c1, double c2) {
  StandardFormLP lp;
  lp.c = Vector{{c1, c2}};
  lp.A = Matrix{{1.0, 1.0}};
  lp.b = Vector{{1.0}};
  return lp;
}

}  // namespace

TEST(SolveLp, CheaperVariableSaturates) {
  const auto res = solve_lp(one_row(1, 2));
  ASSERT_TRUE(res.ok());
  EXPECT_EQ(res.get().basis.indices(), std::vector<Index>{0});
  EXPECT_DOUBLE_EQ(res.get().x(0), 1.0);
  EXPECT_EQ(res.get().x(1), 0.0);
  EXPECT_DOUBLE_EQ(res.get().objective, 1.0);
}

TEST(SolveLp, SymmetricCase) {
  const auto res = solve_lp(one_row(2, 1));
  ASSERT_TRUE(res.ok());
  EXPECT_EQ(res.get().basis.indices(), std::vector<Index>{1});
  EXPECT_DOUBLE_EQ(res.get().objective, 1.0);
}

TEST(SolveLp, SolutionInvariants) {
  Rng rng(3);
  for (int k = 0; k < 50; ++k) {
    const StandardFormLP lp = oracles::random_nondegenerate_lp(rng, 6, 3);
    const auto res = solve_lp(lp);
    ASSERT_TRUE(res.ok()) << res.detail;
    const auto& s = res.get();
    EXPECT_LE((lp.A * s.x - lp.b).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_GE(s.x.minCoeff(), -1e-12);
    for (Index j : s.basis.complement()) EXPECT_EQ(s.x(j), 0.0);
    const Matrix eye = s.basis_inverse * basis_columns(lp.A, s.basis);
    EXPECT_TRUE(eye.isIdentity(1e-9));
    EXPECT_NEAR(s.objective, lp.c.dot(s.x), 1e-12);
  }
}

TEST(SolveLp, Infeasible) {
  StandardFormLP lp = one_row(1, 2);
  lp.b(0) = -1.0;
  EXPECT_EQ(solve_lp(lp).status, SolveStatus::Infeasible);
  EXPECT_EQ(vertex_enumeration_oracle(lp).status, SolveStatus::Infeasible);
}

TEST(SolveLp, Unbounded) {
  StandardFormLP lp;
  lp.c = Vector{{0.0, -1.0}};
  lp.A = Matrix{{1.0, -1.0}};
  lp.b = Vector{{1.0}};
  EXPECT_EQ(solve_lp(lp).status, SolveStatus::Unbounded);
}

TEST(SolveLp, RankDeficientRejected) {
  StandardFormLP lp;
  lp.c = Vector{{1.0, 2.0, 3.0}};
  lp.A = Matrix{{1.0, 1.0, 1.0}, {2.0, 2.0, 2.0}};
  lp.b = Vector{{1.0, 2.0}};
  const auto res = solve_lp(lp);
  EXPECT_EQ(res.status, SolveStatus::Degenerate);
}

TEST(SolveLp, DegenerateReportedThenPerturbed) {
  // Optimum x = (1, 0, 0) with two rows: one basic variable sits at zero.
  StandardFormLP lp;
  lp.c = Vector{{1.0, 2.0, 3.0}};
  lp.A = Matrix{{1.0, 1.0, 0.0}, {1.0, 0.0, 1.0}};
  lp.b = Vector{{1.0, 1.0}};
  const auto plain = solve_lp(lp);
  EXPECT_EQ(plain.status, SolveStatus::Degenerate);
  ASSERT_TRUE(plain.value.has_value());
  EXPECT_NEAR(plain.value->objective, 1.0, 1e-12);

  const auto perturbed = solve_lp(lp, SolverOptions{}.with_perturbation());
  ASSERT_TRUE(perturbed.ok());
  EXPECT_NEAR(perturbed.get().objective, 1.0, 1e-9);
  EXPECT_TRUE(check_optimality(lp.c, lp.A, perturbed.get().basis));
}

TEST(SolveLp, KnapsackByHand) {
  // x1 + x2 budget row and two upper-bound rows with slacks.
  StandardFormLP lp;
  lp.c = Vector{{-2.0, -1.0, 0.0, 0.0, 0.0}};
  lp.A = Matrix{{0.5, 0.5, 1.0, 0.0, 0.0},
                {1.0, 0.0, 0.0, 1.0, 0.0},
                {0.0, 1.0, 0.0, 0.0, 1.0}};
  lp.b = Vector{{0.75, 1.0, 1.0}};
  const auto res = solve_lp(lp);
  ASSERT_TRUE(res.ok()) << res.detail;
  EXPECT_NEAR(res.get().x(0), 1.0, 1e-12);
  EXPECT_NEAR(res.get().x(1), 0.5, 1e-12);
  EXPECT_NEAR(res.get().objective, -2.5, 1e-12);
}

TEST(SolveLp, ScaledObjectiveKeepsBasis) {
  Rng rng(11);
  for (int k = 0; k < 30; ++k) {
    StandardFormLP lp = oracles::random_nondegenerate_lp(rng, 7, 3);
    const Basis base = solve_lp(lp).get().basis;
    for (double alpha : {0.5, 3.0, 100.0}) {
      StandardFormLP scaled = lp;
      scaled.c *= alpha;
      EXPECT_EQ(solve_lp(scaled).get().basis, base);
    }
  }
}

TEST(ExtractBasis, Examples) {
  const auto b1 = extract_basis(Vector{{1.0, 0.0}}, 1);
  ASSERT_TRUE(b1.ok());
  EXPECT_EQ(b1.get().indices(), std::vector<Index>{0});
  EXPECT_EQ(b1.get().complement(), std::vector<Index>{1});

  const auto b2 = extract_basis(Vector{{0.3, 0.0, 0.7}}, 2);
  ASSERT_TRUE(b2.ok());
  EXPECT_EQ(b2.get().indices(), (std::vector<Index>{0, 2}));
  EXPECT_EQ(b2.get().complement(), std::vector<Index>{1});

  EXPECT_EQ(extract_basis(Vector{{1.0, 0.0, 0.0}}, 2).status,
            SolveStatus::Degenerate);
}

TEST(ReducedCosts, Examples) {
  const Basis first({0}, 2);
  const Vector r1 = reduced_costs(Vector{{1.0, 2.0}}, Matrix{{1.0, 1.0}}, first);
  EXPECT_EQ(r1(0), 0.0);
  EXPECT_DOUBLE_EQ(r1(1), 1.0);
  const Vector r2 = reduced_costs(Vector{{2.0, 1.0}}, Matrix{{1.0, 1.0}}, first);
  EXPECT_DOUBLE_EQ(r2(1), -1.0);

  EXPECT_TRUE(check_optimality(Vector{{1.0, 2.0}}, Matrix{{1.0, 1.0}}, first));
  EXPECT_FALSE(check_optimality(Vector{{2.0, 1.0}}, Matrix{{1.0, 1.0}}, first));
}

TEST(ReducedCosts, SingularBasisThrows) {
  const Matrix A{{1.0, 1.0, 0.0}, {1.0, 1.0, 1.0}};
  EXPECT_THROW(reduced_costs(Vector{{1.0, 1.0, 1.0}}, A, Basis({0, 1}, 3)),
               LpError);
}

TEST(ReducedCosts, BasicEntriesExactlyZero) {
  Rng rng(5);
  for (int k = 0; k < 40; ++k) {
    const StandardFormLP lp = oracles::random_nondegenerate_lp(rng, 8, 4);
    for_each_feasible_basis(lp, [&](const Basis& basis, const Vector&) {
      const Vector r = reduced_costs(lp.c, lp.A, basis);
      for (Index j : basis.indices()) EXPECT_EQ(r(j), 0.0);
    });
  }
}

TEST(SuboptimalityBound, Examples) {
  const StandardFormLP lp = one_row(2, 1);
  const Vector x_star{{0.0, 1.0}};
  EXPECT_DOUBLE_EQ(suboptimality_bound(lp, Basis({0}, 2), x_star), 1.0);
  EXPECT_DOUBLE_EQ(suboptimality_bound(lp, Basis({1}, 2), x_star), 0.0);
}

TEST(Oracle, AgreesWithSimplexAndBoundsHold) {
  Rng rng(17);
  for (int k = 0; k < 60; ++k) {
    const StandardFormLP lp = oracles::random_nondegenerate_lp(rng, 8, 4);
    const auto fast = solve_lp(lp);
    const auto slow = vertex_enumeration_oracle(lp);
    ASSERT_TRUE(fast.ok());
    ASSERT_TRUE(slow.ok());
    EXPECT_NEAR(fast.get().objective, slow.get().objective, 1e-8);
    EXPECT_EQ(fast.get().basis, slow.get().basis);
    for_each_feasible_basis(lp, [&](const Basis& basis, const Vector& x) {
      const double gap = lp.c.dot(x) - slow.get().objective;
      EXPECT_GE(suboptimality_bound(lp, basis, slow.get().x), gap - 1e-8);
      EXPECT_EQ(check_optimality(lp.c, lp.A, basis), basis == slow.get().basis);
    });
  }
}
