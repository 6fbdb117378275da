#include <gtest/gtest.h>

#include <cmath>

#include "mom/datagen.hpp"
#include "mom/mom.hpp"
#include "mom/testing/oracles.hpp"

using namespace mom;

TEST(Grid, EdgeAndConstraintCounts) {
  for (Index k = 2; k <= 7; ++k) {
    GridSpec g{k};
    EXPECT_EQ(g.edges(), 2 * k * (k - 1));
    const StandardFormLP lp = build_grid_lp(g, Vector::Ones(g.edges()));
    EXPECT_EQ(lp.rows(), k * k - 1);
    EXPECT_EQ(lp.cols(), g.edges());
  }
  const StandardFormLP five = build_grid_lp(GridSpec{5}, Vector::Ones(40));
  EXPECT_EQ(five.cols(), 40);
  EXPECT_EQ(five.rows(), 24);
}

TEST(Grid, IncidenceColumnsHaveOnePlusOneMinus) {
  const Matrix M = grid_incidence(GridSpec{4});
  for (Index j = 0; j < M.cols(); ++j) {
    int plus = 0, minus = 0;
    for (Index i = 0; i < M.rows(); ++i) {
      if (M(i, j) == 1.0) ++plus;
      else if (M(i, j) == -1.0) ++minus;
      else EXPECT_EQ(M(i, j), 0.0);
    }
    EXPECT_EQ(plus, 1);
    EXPECT_EQ(minus, 1);
  }
}

TEST(Grid, DroppedRowKeepsFullRank) {
  const StandardFormLP lp = build_grid_lp(GridSpec{5}, Vector::Ones(40));
  Eigen::FullPivLU<Matrix> lu(lp.A);
  EXPECT_EQ(lu.rank(), 24);
}

TEST(Grid, TwoByTwoCheapestPathCostsTwo) {
  Vector c(4);
  c << 1, 4, 2, 1;
  const auto res = solve_lp(build_grid_lp(GridSpec{2}, c), SolverOptions{}.with_perturbation());
  ASSERT_TRUE(res.ok());
  const auto oracle = oracles::cheapest_grid_path(2, c);
  EXPECT_NEAR(oracle.cost, 2.0, 1e-12);
  EXPECT_NEAR(res.get().objective, oracle.cost, 1e-9);
}

TEST(Grid, MatchesPathEnumerationOnRandomCosts) {
  Rng rng(17);
  for (int rep = 0; rep < 40; ++rep) {
    const Index k = 2 + rep % 3;
    GridSpec g{k};
    Vector c(g.edges());
    for (Index j = 0; j < c.size(); ++j) c(j) = rng.uniform(0.1, 5.0);
    const auto res = solve_lp(build_grid_lp(g, c), SolverOptions{}.with_perturbation());
    ASSERT_TRUE(res.ok());
    EXPECT_NEAR(res.get().objective, oracles::cheapest_grid_path(k, c).cost, 1e-8);
  }
}

TEST(Knapsack, Shape) {
  Vector p(2);
  p << 0.5, 0.5;
  const StandardFormLP lp = build_knapsack_lp(p, 0.75, -Vector::Ones(2));
  EXPECT_EQ(lp.rows(), 3);
  EXPECT_EQ(lp.cols(), 5);
  EXPECT_EQ(lp.c(2), 0.0);
  EXPECT_EQ(lp.c(4), 0.0);
}

TEST(Knapsack, AgreesWithGreedyOn100Instances) {
  Rng rng(5);
  KnapsackSpec spec;
  for (int rep = 0; rep < 100; ++rep) {
    const Vector p = gen_prices(spec, rng);
    const double B = gen_budget(p, rng);
    Vector u(spec.n_items);
    for (Index j = 0; j < u.size(); ++j) u(j) = rng.uniform(0.0, 10.0);
    const auto res = solve_lp(build_knapsack_lp(p, B, -u));
    ASSERT_TRUE(res.ok());
    const Vector greedy = oracles::greedy_fractional_knapsack(u, p, B);
    EXPECT_NEAR(u.dot(res.get().x.head(spec.n_items)), u.dot(greedy), 1e-7 * u.dot(greedy));
  }
}

TEST(Knapsack, LargeBudgetTakesEverything) {
  Vector p(3);
  p << 1, 2, 3;
  const auto res = solve_lp(build_knapsack_lp(p, 10.0, -Vector::Ones(3)));
  ASSERT_TRUE(res.ok());
  EXPECT_TRUE(res.get().x.head(3).isApprox(Vector::Ones(3), 1e-12));
}

TEST(Budget, TwoUnitPricesStayInRange) {
  Vector p(2);
  p << 1, 1;
  Rng rng(3);
  for (int k = 0; k < 1000; ++k) {
    const double B = gen_budget(p, rng);
    EXPECT_GE(B, 1.0);
    EXPECT_LE(B, 2.0);
  }
}

TEST(Budget, SingleItemCollapsesToLow) {
  Vector p(1);
  p << 1.0;
  Rng rng(3);
  for (int k = 0; k < 100; ++k) EXPECT_EQ(gen_budget(p, rng), 1.0);
}

TEST(Budget, NeverBelowLargestPrice) {
  Rng rng(11);
  KnapsackSpec spec;
  for (int k = 0; k < 10000; ++k) {
    const Vector p = gen_prices(spec, rng);
    EXPECT_GE(gen_budget(p, rng), p.maxCoeff());
  }
}

TEST(Prices, OnlineModeInUnitInterval) {
  Rng rng(2);
  KnapsackSpec spec;
  spec.price_mode = PriceMode::Uniform01;
  for (int k = 0; k < 200; ++k) {
    const Vector p = gen_prices(spec, rng);
    EXPECT_GT(p.minCoeff(), 0.0);
    EXPECT_LE(p.maxCoeff(), 1.0);
  }
}

TEST(Costs, ShortestPathFormulaAtUnitCovariate) {
  Rng rng(8);
  const Matrix V = gen_ground_truth(40, 6, rng);
  Vector z = Vector::Zero(6);
  z(5) = 1.0;
  NoiseSpec noise;
  NoiseDraw draw{Vector::Ones(40), Vector::Zero(40), 1.0};
  const Vector c = sp_costs(V, z, noise, draw);
  for (Index j = 0; j < 40; ++j) EXPECT_NEAR(c(j), V(j, 5) / std::sqrt(6.0) + 3.0 + 1.0, 1e-14);
}

TEST(Costs, KnapsackFormulaAtUnitCovariate) {
  Rng rng(8);
  const Matrix V = gen_ground_truth(10, 5, rng);
  Vector z = Vector::Zero(5);
  z(4) = 1.0;
  NoiseDraw draw{Vector::Ones(10), Vector::Zero(10), 1.0};
  const Vector u = fk_utilities(V, z, NoiseSpec{}, draw);
  for (Index j = 0; j < 10; ++j) EXPECT_EQ(u(j), V(j, 4));
}

TEST(Noise, ScaleFiresOnlyAboveHalf) {
  NoiseSpec noise;
  noise.alpha_bar = 2.0;
  Rng rng(1);
  EXPECT_EQ(draw_noise(noise, 3, 0.51, rng).alpha, 3.0);
  EXPECT_EQ(draw_noise(noise, 3, 0.5, rng).alpha, 1.0);
  EXPECT_EQ(draw_noise(noise, 3, -1.0, rng).alpha, 1.0);
}

TEST(Noise, MomentsWithinThreeStandardErrors) {
  NoiseSpec noise;
  noise.eps_bar = 0.5;
  noise.alpha_bar = 1.0;
  Rng rng(99);
  const int draws = 10000;
  double eps_sum = 0.0, eps_sq = 0.0;
  int fired = 0, above = 0;
  for (int k = 0; k < draws; ++k) {
    const Vector z = gen_gaussian_covariates(3, rng);
    const NoiseDraw d = draw_noise(noise, 1, z(0), rng);
    eps_sum += d.eps(0);
    eps_sq += d.eps(0) * d.eps(0);
    fired += d.alpha == 2.0 ? 1 : 0;
    above += z(0) > 0.5 ? 1 : 0;
  }
  const double mean = eps_sum / draws;
  const double sd = std::sqrt(eps_sq / draws - mean * mean);
  EXPECT_LT(std::abs(mean - 1.0), 3.0 * sd / std::sqrt(draws));
  EXPECT_EQ(fired, above);
  const double p_normal = 0.5 * std::erfc(0.5 / std::sqrt(2.0));
  const double se = std::sqrt(p_normal * (1 - p_normal) / draws);
  EXPECT_LT(std::abs(static_cast<double>(fired) / draws - p_normal), 3.0 * se);
}

TEST(Generator, NoiselessLinearShortestPathIsAffine) {
  ProblemSpec spec = ProblemSpec::sp_default(1);
  InstanceGenerator gen(spec, 4);
  const auto data = gen.batch(0, 500);
  Matrix Z(500, 6), C(500, 40);
  for (int t = 0; t < 500; ++t) {
    Z.row(t) = data[t].sample.z.transpose();
    C.row(t) = data[t].c.transpose();
  }
  const Matrix W = Z.colPivHouseholderQr().solve(C);
  EXPECT_LT((Z * W - C).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Generator, EveryInstanceSolvesToItsStoredOptimum) {
  for (Family f : {Family::ShortestPath, Family::Knapsack}) {
    ProblemSpec spec = f == Family::ShortestPath ? ProblemSpec::sp_default(2)
                                                 : ProblemSpec::fk_default(2);
    spec.noise.eps_bar = 0.3;
    InstanceGenerator gen(spec, 12);
    for (const auto& s : gen.batch(0, 50)) {
      const auto res = solve_lp({s.c, s.sample.A, s.sample.b},
                                SolverOptions{}.with_perturbation());
      ASSERT_TRUE(res.ok());
      EXPECT_TRUE(same_solution(res.get().x, s.sample.x_star));
      EXPECT_EQ(s.sample.z(s.sample.d() - 1), 1.0);
    }
  }
}

TEST(Generator, SameSeedSameData) {
  ProblemSpec spec = ProblemSpec::fk_default(2);
  spec.noise.eta_bar = 0.5;
  InstanceGenerator a(spec, 21, 3), b(spec, 21, 3);
  const auto da = a.batch(0, 20);
  const auto db = b.batch(0, 20);
  for (int t = 0; t < 20; ++t) {
    EXPECT_EQ(da[t].c, db[t].c);
    EXPECT_EQ(da[t].sample.A, db[t].sample.A);
    EXPECT_EQ(da[t].sample.x_star, db[t].sample.x_star);
  }
  EXPECT_EQ(a.ground_truth(), b.ground_truth());
}

TEST(Generator, GrowingTheStreamKeepsThePrefix) {
  InstanceGenerator a(ProblemSpec::sp_default(1), 8), b(ProblemSpec::sp_default(1), 8);
  const auto small = a.batch(0, 5);
  const auto big = b.batch(0, 15);
  for (int t = 0; t < 5; ++t) EXPECT_EQ(small[t].c, big[t].c);
}

TEST(Generator, NormalizedKnapsackEntriesInUnitRange) {
  InstanceGenerator gen(ProblemSpec::fk_normalized(1), 6);
  for (const auto& s : gen.batch(0, 100)) {
    EXPECT_LE(s.sample.z.norm(), 1.0 + 1e-12);
    EXPECT_LE(s.sample.A.cwiseAbs().maxCoeff(), 1.0);
    EXPECT_LE(s.sample.b.maxCoeff(), 1.0);
    EXPECT_LE(s.sample.x_star.maxCoeff(), 1.0 + 1e-9);
  }
}

TEST(Separable, MarginAndConstantsHold) {
  SeparableSpec spec;
  const auto st = gen_separable_stream(spec, 200, 3);
  ASSERT_EQ(st.samples.size(), 200u);
  EXPECT_GE(st.margin, 1.0);
  for (const auto& s : st.samples) {
    EXPECT_TRUE((st.theta_star * s.sample.z - s.c).isZero(0.0));
    const Vector r = nonbasic_reduced_costs(s.sample, s.c);
    EXPECT_GE(r.minCoeff(), 1.0 - 1e-9);
    EXPECT_LE(basis_inverse_norm(s.sample), st.sigma_bar + 1e-12);
  }
  EXPECT_NEAR(st.theta_bar, st.theta_star.norm(), 1e-12);
}

TEST(Separable, FixedConstraintsShareTheLp) {
  SeparableSpec spec;
  spec.fixed_constraints = true;
  spec.problem.knapsack.n_items = 4;
  spec.problem.d = 3;
  spec.min_raw_margin = 0.1;
  const auto st = gen_separable_stream(spec, 50, 2);
  for (const auto& s : st.samples) {
    EXPECT_EQ(s.sample.A, st.samples.front().sample.A);
    EXPECT_EQ(s.sample.b, st.samples.front().sample.b);
  }
}

TEST(Separable, GridSigmaMatchesDirectSvd) {
  Vector c(4);
  c << 1, 4, 2, 1;
  const auto res = solve_lp(build_grid_lp(GridSpec{2}, c), SolverOptions{}.with_perturbation());
  const auto& sol = res.get();
  const StandardFormLP lp = build_grid_lp(GridSpec{2}, c);
  const TrainingSample s = make_training_sample(sol.x, lp.A, lp.b, Vector::Ones(1), sol.basis);
  Eigen::JacobiSVD<Matrix> svd(basis_columns(lp.A, sol.basis).inverse());
  EXPECT_NEAR(basis_inverse_norm(s), svd.singularValues()(0), 1e-12);
}

TEST(Separable, MomFitDrivesMarginViolationDown) {
  SeparableSpec spec;
  const auto st = gen_separable_stream(spec, 300, 5);
  MomFitConfig cfg;
  cfg.lambda = 1e-4;
  const auto rep = mom_fit(training_refs(st.samples), cfg);
  EXPECT_LE(mean_margin_violation(training_refs(st.samples), rep.theta_hat), 0.05);
}

TEST(FamilyNames, RoundTrip) {
  EXPECT_EQ(parse_family("sp"), Family::ShortestPath);
  EXPECT_EQ(parse_family(to_string(Family::Knapsack)), Family::Knapsack);
  EXPECT_THROW(parse_family("tsp"), std::invalid_argument);
}
