#pragma once

// The acceptance suite behind `mom selftest` and the acceptance test binary.
// Each criterion is a seeded, self-contained check returning pass/fail and a
// detail string of measured values. Details never contain timings, so the
// written result file is byte-identical across runs with the same seed.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "mom/baselines.hpp"
#include "mom/datagen.hpp"
#include "mom/features.hpp"
#include "mom/harness.hpp"
#include "mom/lp_core.hpp"
#include "mom/lp_oracle.hpp"
#include "mom/margin.hpp"
#include "mom/mom.hpp"
#include "mom/online.hpp"
#include "mom/testing/oracles.hpp"
#include "mom/testing/random_lp.hpp"

namespace mom::acceptance {

struct Outcome {
  int id = 0;
  std::string title;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;  ///< wall time, reported on the console only
};

namespace detail {

using Clock = std::chrono::steady_clock;

inline double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

inline std::string num(double v) { return format_double(v); }

inline std::string count_of(std::size_t hit, std::size_t total) {
  return std::to_string(hit) + "/" + std::to_string(total);
}

inline std::vector<StandardFormLP> random_lps(std::uint64_t seed, std::size_t count) {
  Rng rng = Rng::stream(seed, 101, 0);
  std::vector<StandardFormLP> out;
  for (std::size_t k = 0; k < count; ++k)
    out.push_back(oracles::random_nondegenerate_lp_upto(rng, 8, 4));
  return out;
}

inline Matrix gaussian(Rng& rng, Index rows, Index cols, double scale = 1.0) {
  return scale * oracles::gaussian_matrix(rng, rows, cols);
}

inline double smallest_eigenvalue(const Matrix& K) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(K, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

// Knapsack stream shared by the mistake-bound and collapse checks: four
// items, three covariates, constraints fixed for the whole stream.
inline SeparableSpec small_separable_spec() {
  SeparableSpec spec;
  spec.problem.knapsack.n_items = 4;
  spec.problem.d = 3;
  spec.min_raw_margin = 0.1;
  spec.fixed_constraints = true;
  return spec;
}

inline std::uint64_t seed_for(std::uint64_t seed, int criterion, std::size_t k) {
  return splitmix64(seed ^ (static_cast<std::uint64_t>(criterion) << 32) ^ (k + 1));
}

inline std::vector<double> per_trial(const std::vector<ResultRow>& rows,
                                     const std::string& method, const std::string& metric,
                                     std::size_t trials) {
  std::vector<double> out(trials, std::numeric_limits<double>::quiet_NaN());
  for (const auto& r : rows)
    if (r.method == method && r.metric == metric && r.trial < trials) out[r.trial] = r.value;
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------- 1 - 3

inline Outcome solver_matches_oracle(std::uint64_t seed) {
  const auto t0 = detail::Clock::now();
  const auto lps = detail::random_lps(seed, 200);
  std::size_t agree = 0;
  double worst = 0.0;
  for (const auto& lp : lps) {
    try {
      const LPResult fast = solve_lp(lp);
      const LPResult slow = vertex_enumeration_oracle(lp);
      if (!fast.ok() || !slow.ok()) continue;
      const double gap = std::abs(fast.get().objective - slow.get().objective);
      worst = std::max(worst, gap);
      if (gap <= 1e-8 && fast.get().basis == slow.get().basis) ++agree;
    } catch (const std::exception&) {
    }
  }
  const double secs = detail::seconds_since(t0);
  Outcome o{1, "LP solver matches vertex enumeration", agree == lps.size() && secs < 10.0,
            "agree=" + detail::count_of(agree, lps.size()) + " max_objective_gap=" +
                detail::num(worst) + (secs < 10.0 ? "" : " runtime_over_10s"),
            secs};
  return o;
}

inline Outcome optimality_test_exact(std::uint64_t seed) {
  const auto t0 = detail::Clock::now();
  const auto lps = detail::random_lps(seed, 200);
  std::size_t bases = 0, wrong = 0, exceptions = 0;
  for (const auto& lp : lps) {
    try {
      const Basis best = vertex_enumeration_oracle(lp).get().basis;
      for_each_feasible_basis(lp, [&](const Basis& basis, const Vector&) {
        ++bases;
        if (check_optimality(lp.c, lp.A, basis) != (basis == best)) ++wrong;
      });
    } catch (const std::exception&) {
      ++exceptions;
    }
  }
  return {2, "optimality test holds exactly at the optimal basis",
          wrong == 0 && exceptions == 0,
          "bases=" + std::to_string(bases) + " wrong=" + std::to_string(wrong) +
              " exceptions=" + std::to_string(exceptions),
          detail::seconds_since(t0)};
}

inline Outcome suboptimality_bound_holds(std::uint64_t seed) {
  const auto t0 = detail::Clock::now();
  const auto lps = detail::random_lps(seed, 200);
  std::size_t bases = 0, violations = 0, exceptions = 0;
  double slack = std::numeric_limits<double>::infinity();
  for (const auto& lp : lps) {
    try {
      const LPSolution best = vertex_enumeration_oracle(lp).get();
      for_each_feasible_basis(lp, [&](const Basis& basis, const Vector& x) {
        ++bases;
        const double gap = lp.c.dot(x) - best.objective;
        const double bound = suboptimality_bound(lp, basis, best.x);
        slack = std::min(slack, bound - gap);
        if (bound < gap - 1e-8) ++violations;
      });
    } catch (const std::exception&) {
      ++exceptions;
    }
  }
  return {3, "reduced-cost bound dominates the suboptimality gap",
          violations == 0 && exceptions == 0,
          "bases=" + std::to_string(bases) + " violations=" + std::to_string(violations) +
              " exceptions=" + std::to_string(exceptions) + " min_slack=" + detail::num(slack),
          detail::seconds_since(t0)};
}

// -------------------------------------------------------------------- 4

inline Outcome subgradients_match_finite_differences(std::uint64_t seed) {
  const auto t0 = detail::Clock::now();
  Rng rng = Rng::stream(seed, 104, 0);
  constexpr double kink_gap = 1e-3;
  double worst_margin = 0.0, worst_spo = 0.0;
  std::size_t margin_points = 0, spo_points = 0;

  while (margin_points < 100) {
    const StandardFormLP lp = oracles::random_nondegenerate_lp_upto(rng, 8, 4);
    const LPSolution sol = solve_lp(lp).get();
    const Index d = rng.uniform_int(1, 4);
    const TrainingSample s =
        make_training_sample(sol.x, lp.A, lp.b, detail::gaussian(rng, d, 1).col(0), sol.basis);
    const ParameterMatrix p{detail::gaussian(rng, s.n(), d), 0.0};
    const Vector r = nonbasic_reduced_costs(s, predict_objective(p, s.z));
    if ((r.array() - 1.0).abs().minCoeff() < kink_gap) continue;
    const Matrix fd = oracles::finite_difference_gradient(
        [&](const Matrix& th) { return margin_violation(s, {th, 0.0}); }, p.theta, 1e-6);
    worst_margin = std::max(worst_margin, oracles::relative_error(margin_subgradient(s, p), fd));
    ++margin_points;
  }

  // SPO+ is piecewise linear in theta with kinks where the inner LP changes
  // basis; points whose inner optimum has a reduced-cost gap below the
  // threshold are skipped.
  for (std::size_t attempts = 0; spo_points < 100 && attempts < 100000; ++attempts) {
    const Index n_items = rng.uniform_int(2, 5);
    Vector prices(n_items);
    for (Index j = 0; j < n_items; ++j) prices(j) = rng.uniform(0.05, 1.0);
    const double budget = rng.uniform(prices.maxCoeff(), prices.sum());
    const Index d = rng.uniform_int(1, 4);
    const Matrix truth = detail::gaussian(rng, n_items, d);
    const Vector z = detail::gaussian(rng, d, 1).col(0);
    const StandardFormLP lp = build_knapsack_lp(prices, budget, -(truth * z));
    const LPResult base = solve_lp(lp);
    if (!base.ok()) continue;
    SupervisedSample s{make_training_sample(base.get().x, lp.A, lp.b, z, base.get().basis),
                       lp.c, true};
    const Matrix theta = detail::gaussian(rng, lp.cols(), d);
    const Vector w = 2.0 * (theta * z) - s.c;
    const LPResult inner = solve_lp({w, lp.A, lp.b});
    if (!inner.ok()) continue;
    const Vector r = reduced_costs(w, lp.A, inner.get().basis);
    double gap = std::numeric_limits<double>::infinity();
    for (Index j : inner.get().basis.complement()) gap = std::min(gap, r(j));
    if (gap < kink_gap * std::max(1.0, w.norm())) continue;
    const Matrix fd = oracles::finite_difference_gradient(
        [&](const Matrix& th) { return spo_plus_loss(s, th); }, theta, 1e-6);
    worst_spo = std::max(worst_spo, oracles::relative_error(spo_plus_subgradient(s, theta), fd));
    ++spo_points;
  }
  return {4, "margin and SPO+ subgradients match central differences",
          margin_points == 100 && spo_points == 100 && worst_margin <= 1e-4 && worst_spo <= 1e-4,
          "margin_points=" + std::to_string(margin_points) + " margin_max_rel_err=" +
              detail::num(worst_margin) + " spo_points=" + std::to_string(spo_points) +
              " spo_max_rel_err=" + detail::num(worst_spo),
          detail::seconds_since(t0)};
}

// -------------------------------------------------------------------- 5

inline Outcome scale_invariance(std::uint64_t seed) {
  const auto t0 = detail::Clock::now();
  const auto lps = detail::random_lps(seed ^ 0x55, 50);
  std::size_t same = 0, total = 0;
  for (const auto& lp : lps) {
    const Basis base = solve_lp(lp).get().basis;
    for (double a : {0.5, 3.0, 100.0}) {
      ++total;
      const LPResult scaled = solve_lp({a * lp.c, lp.A, lp.b});
      if (scaled.ok() && scaled.get().basis == base) ++same;
    }
  }

  // Rescale every training cost by its own positive factor, re-solve for
  // x*, and refit both learners.
  InstanceGenerator gen(ProblemSpec::fk_default(2), seed, 5);
  const auto data = gen.batch(0, 200);
  Rng rng = Rng::stream(seed, 105, 0);
  std::vector<SupervisedSample> scaled;
  for (const auto& s : data) {
    const double a = std::exp(rng.uniform(-3.0, 3.0));
    const Vector c = a * s.c;
    const LPSolution sol = solve_lp({c, s.sample.A, s.sample.b}).get();
    scaled.push_back({make_training_sample(sol.x, s.sample.A, s.sample.b, s.sample.z, sol.basis),
                      c, true});
  }
  MomFitConfig cfg;
  cfg.max_iters = 300;
  cfg.tol_objective = 1e-4;
  const Matrix mom_a = mom_fit(training_refs(data), cfg).theta_hat.theta;
  const Matrix mom_b = mom_fit(training_refs(scaled), cfg).theta_hat.theta;
  const Matrix ols_a = ols_fit(data).theta_hat.theta;
  const Matrix ols_b = ols_fit(scaled).theta_hat.theta;
  const bool mom_identical = mom_a == mom_b;
  const double ols_change = (ols_a - ols_b).norm() / std::max(ols_a.norm(), 1e-300);
  return {5, "scale invariance of the LP and of MOM, not of OLS",
          same == total && mom_identical && ols_change > 1e-6,
          "same_basis=" + detail::count_of(same, total) +
              " mom_bit_identical=" + (mom_identical ? "yes" : "no") +
              " ols_relative_change=" + detail::num(ols_change),
          detail::seconds_since(t0)};
}

// -------------------------------------------------------------------- 6

inline Outcome separable_recovery(std::uint64_t seed) {
  const auto t0 = detail::Clock::now();
  ExperimentConfig cfg;
  cfg.grids.lambda = {1e-4, 1e-3, 1e-2};
  std::vector<double> rates;
  std::string lambdas;
  for (std::size_t k = 0; k < 10; ++k) {
    const std::uint64_t s = detail::seed_for(seed, 6, k);
    auto stream = gen_separable_stream(SeparableSpec{}, 2000, s);
    const SupervisedSpan all(stream.samples);
    const SupervisedSpan train = all.first(1000);
    const SupervisedSpan test = all.last(1000);
    const MethodSpec mom{MethodKind::Mom};
    const Hyperparams h = tune(mom, candidates(mom, cfg.grids, 0.0), train.first(800),
                               train.last(200), cfg, s, Family::Knapsack);
    const FittedModel model = fit_method(mom, h, train, cfg, s);
    rates.push_back(evaluate_model(Family::Knapsack, test, model).match_rate);
    lambdas += (lambdas.empty() ? "" : ",") + detail::num(h.lambda);
  }
  const double med = median(rates);
  const double secs = detail::seconds_since(t0);
  return {6, "MOM recovers decisions on separable knapsack data",
          med >= 0.95 && secs < 120.0,
          "median_match_rate=" + detail::num(med) + " min=" +
              detail::num(*std::min_element(rates.begin(), rates.end())) +
              " lambdas=" + lambdas + (secs < 120.0 ? "" : " runtime_over_2min"),
          secs};
}

// -------------------------------------------------------------------- 7

inline Outcome suboptimality_below_margin_loss(std::uint64_t seed) {
  const auto t0 = detail::Clock::now();
  InstanceGenerator gen(ProblemSpec::fk_normalized(1), seed, 7);
  const auto data = gen.batch(0, 500);
  Rng rng = Rng::stream(seed, 107, 0);
  std::vector<Matrix> thetas;
  const Index n = data.front().sample.n();
  const Index d = data.front().sample.d();
  for (int k = 0; k < 20; ++k) thetas.push_back(detail::gaussian(rng, n, d, std::pow(10.0, k % 5 - 2)));
  std::size_t checks = 0, violations = 0, exceptions = 0;
  double slack = std::numeric_limits<double>::infinity();
  bool bounded = true;
  for (const auto& s : data) {
    bounded = bounded && s.sample.A.cwiseAbs().maxCoeff() <= 1.0 &&
              s.sample.b.cwiseAbs().maxCoeff() <= 1.0 && s.sample.z.norm() <= 1.0;
    for (const auto& th : thetas) {
      try {
        const ParameterMatrix p{th, 0.0};
        const double sub = suboptimality_loss(s.sample, predict_objective(p, s.sample.z));
        const double margin = margin_violation(s.sample, p);
        slack = std::min(slack, margin - sub);
        ++checks;
        if (sub > margin + 1e-8) ++violations;
      } catch (const std::exception&) {
        ++exceptions;
      }
    }
  }
  return {7, "suboptimality loss is at most the margin loss on bounded data",
          bounded && violations == 0 && exceptions == 0 && checks == 10000,
          "checks=" + std::to_string(checks) + " violations=" + std::to_string(violations) +
              " exceptions=" + std::to_string(exceptions) + " data_bounded=" +
              (bounded ? "yes" : "no") + " min_slack=" + detail::num(slack),
          detail::seconds_since(t0)};
}

// ---------------------------------------------------------------- 8, 11

inline Outcome perceptron_mistake_bound(std::uint64_t seed) {
  const auto t0 = detail::Clock::now();
  std::size_t within = 0, flat = 0;
  std::string mistakes;
  for (std::size_t k = 0; k < 10; ++k) {
    const auto st = gen_separable_stream(detail::small_separable_spec(), 5000,
                                         detail::seed_for(seed, 8, k));
    OnlineRunConfig oc;
    oc.algorithm = OnlineAlgorithm::Perceptron;
    const auto run = online_run(training_refs(st.samples), oc);
    const double n = static_cast<double>(st.samples.front().sample.n());
    const double m = static_cast<double>(st.samples.front().sample.m());
    const double bound = st.theta_bar * st.theta_bar *
                         (1.0 + st.sigma_bar * st.sigma_bar * m * m * n);
    const auto total = run.cumulative_mistakes.back();
    if (static_cast<double>(total) <= bound) ++within;
    if (run.cumulative_mistakes[1999] == total) ++flat;
    mistakes += (mistakes.empty() ? "" : ",") + std::to_string(total);
  }
  return {8, "perceptron mistakes stay under the bound and stop",
          within == 10 && flat >= 8,
          "within_bound=" + detail::count_of(within, 10) +
              " flat_2000_to_5000=" + detail::count_of(flat, 10) + " mistakes=" + mistakes,
          detail::seconds_since(t0)};
}

inline Outcome naive_update_collapse(std::uint64_t seed) {
  const auto t0 = detail::Clock::now();
  std::size_t collapsed = 0, matched = 0;
  std::string ratios, rates;
  for (std::size_t k = 0; k < 10; ++k) {
    const auto st = gen_separable_stream(detail::small_separable_spec(), 2000,
                                         detail::seed_for(seed, 8, k));
    const auto refs = training_refs(st.samples);
    OnlineRunConfig naive;
    naive.algorithm = OnlineAlgorithm::NaiveSuboptOgd;
    naive.eta = 1.0;
    naive.decay = StepDecay::InverseSqrt;
    const auto nrun = online_run(refs, naive);
    const double peak = *std::max_element(nrun.theta_norms.begin(), nrun.theta_norms.end());
    const double ratio = peak > 0.0 ? nrun.theta_norms.back() / peak : 1.0;
    if (ratio < 0.1) ++collapsed;

    OnlineRunConfig ogd;
    ogd.algorithm = OnlineAlgorithm::Ogd;
    ogd.eta = 1.0;
    ogd.radius = st.theta_bar;
    const auto orun = online_run(refs, ogd);
    const double rate = orun.match_rate(1600, 2000);
    if (rate >= 0.90) ++matched;
    ratios += (ratios.empty() ? "" : ",") + detail::num(std::round(ratio * 1000) / 1000);
    rates += (rates.empty() ? "" : ",") + detail::num(rate);
  }
  return {11, "naive suboptimality updates collapse while MOM-OGD matches",
          collapsed >= 8 && matched >= 8,
          "collapsed=" + detail::count_of(collapsed, 10) + " ogd_match_ge_0.9=" +
              detail::count_of(matched, 10) + " norm_ratios=" + ratios + " ogd_rates=" + rates,
          detail::seconds_since(t0)};
}

// ------------------------------------------------------------ 9, 10, 13

inline ExperimentConfig offline_config(Family f, NoiseSpec noise, std::size_t T_train,
                                       std::uint64_t seed, std::vector<MethodSpec> methods) {
  ExperimentConfig cfg;
  cfg.family = f;
  cfg.noise = noise;
  cfg.T_train = T_train;
  cfg.T_test = 1000;
  cfg.trials = 10;
  cfg.seed = seed;
  cfg.methods = std::move(methods);
  return cfg;
}

inline Outcome misspecification_echo(std::uint64_t seed) {
  const auto t0 = detail::Clock::now();
  NoiseSpec deg6;
  deg6.deg = 6;
  const auto high = run_offline_experiment(offline_config(
      Family::ShortestPath, deg6, 1000, detail::seed_for(seed, 9, 0),
      {{MethodKind::Mom}, {MethodKind::Ols}}));
  const auto mom = detail::per_trial(high.rows, "mom", "rel-loss-sp", 10);
  const auto ols = detail::per_trial(high.rows, "ols", "rel-loss-sp", 10);
  std::size_t wins = 0;
  for (std::size_t k = 0; k < 10; ++k) wins += mom[k] < ols[k] ? 1 : 0;

  const auto linear = run_offline_experiment(offline_config(
      Family::ShortestPath, NoiseSpec{}, 1000, detail::seed_for(seed, 9, 1), {{MethodKind::Ols}}));
  const double ols_linear = median(detail::per_trial(linear.rows, "ols", "rel-loss-sp", 10));
  const double secs = detail::seconds_since(t0);
  return {9, "MOM beats OLS under misspecification; OLS exact when linear",
          wins >= 8 && ols_linear <= 0.01 && secs < 900.0,
          "deg6_mom_wins=" + detail::count_of(wins, 10) + " deg6_median_mom=" +
              detail::num(median(mom)) + " deg6_median_ols=" + detail::num(median(ols)) +
              " deg1_median_ols=" + detail::num(ols_linear) +
              (secs < 900.0 ? "" : " runtime_over_15min"),
          secs};
}

inline Outcome attack_power_echo(std::uint64_t seed) {
  const auto t0 = detail::Clock::now();
  auto run = [&](double alpha_bar) {
    NoiseSpec noise;
    noise.alpha_bar = alpha_bar;
    const auto res = run_offline_experiment(offline_config(
        Family::ShortestPath, noise, 1000, detail::seed_for(seed, 10, 0),
        {{MethodKind::Mom}, {MethodKind::Ols}}));
    return std::pair{median(detail::per_trial(res.rows, "mom", "rel-loss-sp", 10)),
                     median(detail::per_trial(res.rows, "ols", "rel-loss-sp", 10))};
  };
  const auto [mom0, ols0] = run(0.0);
  const auto [mom2, ols2] = run(2.0);
  const double mom_change = std::abs(mom2 - mom0) / std::max(mom0, 1e-300);
  return {10, "scale attack leaves MOM alone and degrades OLS",
          mom_change < 0.25 && ols2 > 2.0 * ols0,
          "mom_median=" + detail::num(mom0) + "->" + detail::num(mom2) +
              " mom_relative_change=" + detail::num(mom_change) + " ols_median=" +
              detail::num(ols0) + "->" + detail::num(ols2),
          detail::seconds_since(t0)};
}

inline Outcome kernel_properties(std::uint64_t seed) {
  const auto t0 = detail::Clock::now();
  Rng rng = Rng::stream(seed, 113, 0);
  double worst = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 20; ++k) {
    const Matrix P = detail::gaussian(rng, 40, 1 + k % 6);
    worst = std::min(worst, detail::smallest_eigenvalue(
                                gram_matrix(KernelSpec::rbf(0.1 + 0.5 * k), P)));
    worst = std::min(worst, detail::smallest_eigenvalue(gram_matrix(
                                KernelSpec::polynomial(0.5 + 0.25 * k, 1 + k % 4), P)));
  }
  NoiseSpec deg4;
  deg4.deg = 4;
  auto cfg = offline_config(Family::Knapsack, deg4, 500, detail::seed_for(seed, 13, 0),
                            {{MethodKind::Mom}, {MethodKind::MomKernel, KernelKind::Rbf}});
  cfg.validation_fraction = 0.25;
  cfg.mom_max_epochs = 2000;
  const auto res = run_offline_experiment(cfg);
  const auto linear = detail::per_trial(res.rows, "mom", "rel-loss-fk", 10);
  const auto kernel = detail::per_trial(res.rows, "mom-kernel-rbf", "rel-loss-fk", 10);
  std::size_t wins = 0;
  for (std::size_t k = 0; k < 10; ++k) wins += kernel[k] < linear[k] ? 1 : 0;
  return {13, "kernel Gram matrices are PSD; rbf MOM beats linear MOM at deg 4",
          worst >= -1e-8 && wins >= 7,
          "min_gram_eigenvalue=" + detail::num(worst) + " kernel_wins=" +
              detail::count_of(wins, 10) + " median_linear=" + detail::num(median(linear)) +
              " median_kernel=" + detail::num(median(kernel)),
          detail::seconds_since(t0)};
}

// ------------------------------------------------------------------- 12

inline Outcome regression_scale_consistency(std::uint64_t seed) {
  const auto t0 = detail::Clock::now();
  auto decay = [&](double alpha_mean) {
    std::vector<double> small, large;
    for (std::size_t k = 0; k < 10; ++k) {
      Rng rng = Rng::stream(seed, 112, k);
      const Matrix theta = detail::gaussian(rng, 6, 4);
      const auto rows = ols_scale_consistency_probe(theta, {alpha_mean, 0.5, 0.1}, {500, 5000},
                                                    detail::seed_for(seed, 12, k));
      small.push_back(rows[0].deviation);
      large.push_back(rows[1].deviation);
    }
    return std::pair{median(small), median(large)};
  };
  const auto [a500, a5000] = decay(0.0);
  const auto [b500, b5000] = decay(0.5);
  return {12, "OLS stays consistent under feature-independent scale noise",
          a5000 <= 0.6 * a500 && b5000 <= 0.6 * b500,
          "mean0_deviation=" + detail::num(a500) + "->" + detail::num(a5000) +
              " mean0.5_deviation=" + detail::num(b500) + "->" + detail::num(b5000),
          detail::seconds_since(t0)};
}

// ---------------------------------------------------------------- suite

using Check = std::function<Outcome(std::uint64_t)>;

inline std::vector<Check> checks() {
  return {solver_matches_oracle,
          optimality_test_exact,
          suboptimality_bound_holds,
          subgradients_match_finite_differences,
          scale_invariance,
          separable_recovery,
          suboptimality_below_margin_loss,
          perceptron_mistake_bound,
          misspecification_echo,
          attack_power_echo,
          naive_update_collapse,
          regression_scale_consistency,
          kernel_properties};
}

inline std::string status_line(const Outcome& o) {
  char head[32];
  std::snprintf(head, sizeof head, "%s C%02d ", o.pass ? "PASS" : "FAIL", o.id);
  return head + o.title + " | " + o.detail;
}

/// Runs every check in order. A check that throws is recorded as a failure
/// with the exception text as its detail. `on_result` sees each outcome as
/// soon as it is available.
inline std::vector<Outcome> run_suite(std::uint64_t seed,
                                      const std::function<void(const Outcome&)>& on_result = {}) {
  std::vector<Outcome> out;
  int id = 0;
  for (const auto& check : checks()) {
    ++id;
    const auto t0 = detail::Clock::now();
    Outcome o;
    try {
      o = check(seed);
    } catch (const std::exception& e) {
      o = {id, "check raised", false, std::string("exception=") + e.what(), 0.0};
    }
    o.seconds = detail::seconds_since(t0);
    if (on_result) on_result(o);
    out.push_back(std::move(o));
  }
  std::sort(out.begin(), out.end(), [](const Outcome& a, const Outcome& b) { return a.id < b.id; });
  return out;
}

/// CSV of criterion, status, title and measured values; no timings.
inline void write_results(const std::vector<Outcome>& outcomes, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
  os << "criterion,status,title,detail\r\n";
  for (const auto& o : outcomes)
    os << o.id << ',' << (o.pass ? "PASS" : "FAIL") << ',' << csv_field(o.title) << ','
       << csv_field(o.detail) << "\r\n";
  if (!os.flush()) throw std::runtime_error("write to '" + path + "' failed");
}

inline std::string read_bytes(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

/// Compares two result files byte for byte.
inline Outcome determinism(const std::string& first, const std::string& second) {
  const std::string a = read_bytes(first);
  const std::string b = read_bytes(second);
  std::size_t at = 0;
  while (at < std::min(a.size(), b.size()) && a[at] == b[at]) ++at;
  const bool same = !a.empty() && a == b;
  return {14, "selftest result files are byte-identical across runs", same,
          "bytes=" + std::to_string(a.size()) + "/" + std::to_string(b.size()) +
              (same ? "" : " first_difference_at=" + std::to_string(at))};
}

}  // namespace mom::acceptance
