#pragma once

// Streaming learners. Each step predicts c_hat = theta_t z_t, solves the LP
// for the decision x_t, then updates theta from the observed x*_t only:
//   ogd         projected online subgradient descent on the margin loss
//   perceptron  coordinate-wise rank-one updates while a reduced cost <= 1/2
//   ftrl        refit the regularised offline problem on the prefix
//   naive       subgradient descent on the suboptimality loss, whose
//               minimiser theta = 0 makes it collapse

#include <cmath>
#include <functional>
#include <vector>

#include "mom/common.hpp"
#include "mom/lp_core.hpp"
#include "mom/margin.hpp"
#include "mom/mom.hpp"

namespace mom {

enum class OnlineAlgorithm { Ogd, Perceptron, Ftrl, NaiveSuboptOgd };
enum class StepDecay { Constant, InverseSqrt };

inline const char* to_string(OnlineAlgorithm a) {
  switch (a) {
    case OnlineAlgorithm::Ogd: return "ogd";
    case OnlineAlgorithm::Perceptron: return "perceptron";
    case OnlineAlgorithm::Ftrl: return "ftrl";
    case OnlineAlgorithm::NaiveSuboptOgd: return "naive-subopt-ogd";
  }
  return "unknown";
}

struct OnlineRunConfig {
  double eta = 0.1;
  double radius = 0.0;  ///< 0 leaves theta unconstrained
  OnlineAlgorithm algorithm = OnlineAlgorithm::Ogd;
  StepDecay decay = StepDecay::Constant;
  bool record_trajectory = false;
  SolverOptions solver;
  /// Epoch cap and gap tolerance for each refit of the ftrl learner.
  std::size_t ftrl_max_epochs = 200;
  double ftrl_tol = 1e-4;
  std::uint64_t seed = 0;

  double step(std::size_t t) const {
    return decay == StepDecay::Constant ? eta : eta / std::sqrt(static_cast<double>(t));
  }
};

/// Scores a decision for step t (for instance a relative loss against the
/// hidden true cost). Learners never see the cost themselves.
using StepEvaluator = std::function<double(std::size_t t, const Vector& x)>;

struct OnlineRunResult {
  std::vector<Vector> decisions;   ///< empty vector where the solve failed
  std::vector<Matrix> thetas;      ///< theta_1..theta_{T+1}, or only the last
  std::vector<double> theta_norms; ///< |theta_t|_F for t = 1..T+1
  std::vector<double> per_step_margin_loss;
  std::vector<double> per_step_relative_loss;
  std::vector<bool> mistake_flags;
  std::vector<double> cumulative_regret;
  std::vector<std::size_t> cumulative_mistakes;
  std::size_t skipped = 0;  ///< steps whose predicted LP could not be solved
  std::size_t updates = 0;  ///< rank-one updates (perceptron) or nonzero steps

  std::size_t mistakes() const {
    return cumulative_mistakes.empty() ? 0 : cumulative_mistakes.back();
  }

  /// Fraction of steps in [from, to) whose decision matched x*.
  double match_rate(std::size_t from, std::size_t to) const {
    std::size_t hit = 0;
    for (std::size_t t = from; t < to; ++t) hit += mistake_flags[t] ? 0 : 1;
    return to > from ? static_cast<double>(hit) / static_cast<double>(to - from) : 0.0;
  }
};

/// Step size that balances the OGD regret bound for a stream of length T:
/// 2 theta_bar / ((sqrt(n) + sigma_bar m n) sqrt(T)).
inline double ogd_regret_step_size(double theta_bar, double sigma_bar, Index n, Index m,
                                   std::size_t T) {
  const double nn = static_cast<double>(n);
  const double mm = static_cast<double>(m);
  return 2.0 * theta_bar /
         ((std::sqrt(nn) + sigma_bar * mm * nn) * std::sqrt(static_cast<double>(T)));
}

namespace detail {

class OnlineRecorder {
 public:
  OnlineRecorder(OnlineRunResult& out, const OnlineRunConfig& cfg,
                 const StepEvaluator& eval)
      : out_(out), cfg_(cfg), eval_(eval) {}

  void start(const Matrix& theta) { snapshot(theta, true); }

  /// Predicts and records the decision for step t with the current theta.
  /// Returns the decision, or an empty vector if the solve failed.
  Vector decide(std::size_t t, const TrainingSample& s, const Matrix& theta) {
    const ParameterMatrix p{theta, 0.0};
    out_.per_step_margin_loss.push_back(margin_violation(s, p));
    auto pres = mom_prescribe(p, s.A, s.b, s.z, cfg_.solver);
    Vector x;
    bool mistake = true;
    if (pres.ok()) {
      x = pres.get().solution.x;
      mistake = !same_solution(x, s.x_star);
    } else {
      ++out_.skipped;
    }
    out_.mistake_flags.push_back(mistake);
    const std::size_t before = out_.cumulative_mistakes.empty() ? 0 : out_.cumulative_mistakes.back();
    out_.cumulative_mistakes.push_back(before + (mistake ? 1 : 0));
    if (eval_) {
      const double loss = x.size() ? eval_(t, x) : 0.0;
      out_.per_step_relative_loss.push_back(loss);
      const double acc = out_.cumulative_regret.empty() ? 0.0 : out_.cumulative_regret.back();
      out_.cumulative_regret.push_back(acc + loss);
    }
    out_.decisions.push_back(x);
    return x;
  }

  void after_update(const Matrix& theta, bool last) { snapshot(theta, last); }

 private:
  void snapshot(const Matrix& theta, bool force) {
    out_.theta_norms.push_back(theta.norm());
    if (cfg_.record_trajectory || force) {
      if (!cfg_.record_trajectory && !out_.thetas.empty()) out_.thetas.clear();
      out_.thetas.push_back(theta);
    }
  }

  OnlineRunResult& out_;
  const OnlineRunConfig& cfg_;
  const StepEvaluator& eval_;
};

inline void check_stream(const SampleRefs& data) {
  check_dataset(data);
}

}  // namespace detail

inline OnlineRunResult ogd_run(const SampleRefs& data, const OnlineRunConfig& cfg,
                               const StepEvaluator& eval = {}) {
  detail::check_stream(data);
  if (!(cfg.eta > 0.0)) throw std::invalid_argument("ogd needs eta > 0");
  OnlineRunResult out;
  detail::OnlineRecorder rec(out, cfg, eval);
  ParameterMatrix theta = ParameterMatrix::zeros(data.front()->n(), data.front()->d(),
                                                 cfg.radius);
  rec.start(theta.theta);
  for (std::size_t t = 0; t < data.size(); ++t) {
    const TrainingSample& s = *data[t];
    rec.decide(t, s, theta.theta);
    const Matrix g = margin_subgradient(s, theta);
    if (!g.isZero(0.0)) ++out.updates;
    theta.theta -= cfg.step(t + 1) * g;
    theta.project();
    rec.after_update(theta.theta, t + 1 == data.size());
  }
  return out;
}

/// Perceptron driven by the optimality condition. For each nonbasic index i
/// in turn, the reduced cost is recomputed from the working matrix and, if
/// at most 1/2, row i gains z' while the basic rows lose (A_B^{-1} A_i) z'.
inline OnlineRunResult perceptron_run(const SampleRefs& data,
                                      const OnlineRunConfig& cfg = {},
                                      const StepEvaluator& eval = {}) {
  detail::check_stream(data);
  OnlineRunResult out;
  detail::OnlineRecorder rec(out, cfg, eval);
  Matrix theta = Matrix::Zero(data.front()->n(), data.front()->d());
  rec.start(theta);
  for (std::size_t t = 0; t < data.size(); ++t) {
    const TrainingSample& s = *data[t];
    rec.decide(t, s, theta);
    const auto& B = s.basic();
    const auto& N = s.nonbasic();
    for (std::size_t k = 0; k < N.size(); ++k) {
      const Vector c_hat = theta * s.z;
      double r = c_hat(N[k]);
      for (std::size_t b = 0; b < B.size(); ++b)
        r -= s.tableau(static_cast<Index>(b), static_cast<Index>(k)) * c_hat(B[b]);
      if (r > 0.5) continue;
      theta.row(N[k]) += s.z.transpose();
      for (std::size_t b = 0; b < B.size(); ++b)
        theta.row(B[b]) -=
            s.tableau(static_cast<Index>(b), static_cast<Index>(k)) * s.z.transpose();
      ++out.updates;
    }
    rec.after_update(theta, t + 1 == data.size());
  }
  return out;
}

/// theta_{t+1} minimises the offline objective on the first t samples with
/// lambda = 1/sqrt(t); each refit warm-starts from the previous dual state.
inline OnlineRunResult ftrl_run(const SampleRefs& data, const OnlineRunConfig& cfg = {},
                                const StepEvaluator& eval = {}) {
  detail::check_stream(data);
  OnlineRunResult out;
  detail::OnlineRecorder rec(out, cfg, eval);
  MarginDualSolver solver(data.front()->n(), data.front()->d(), cfg.seed);
  MomFitConfig fit;
  fit.radius = cfg.radius;
  fit.max_iters = cfg.ftrl_max_epochs;
  fit.tol_objective = cfg.ftrl_tol;
  fit.seed = cfg.seed;
  Matrix theta = Matrix::Zero(data.front()->n(), data.front()->d());
  rec.start(theta);
  SampleRefs prefix;
  for (std::size_t t = 0; t < data.size(); ++t) {
    rec.decide(t, *data[t], theta);
    prefix.push_back(data[t]);
    solver.add(data[t]);
    const double lambda = 1.0 / std::sqrt(static_cast<double>(t + 1));
    theta = detail::fit_dual(prefix, fit, lambda, &solver).theta_hat.theta;
    ++out.updates;
    rec.after_update(theta, t + 1 == data.size());
  }
  return out;
}

/// Online descent on the suboptimality loss with gradient (x*_t - x_t) z_t'.
/// Steps whose predicted LP fails leave theta unchanged.
inline OnlineRunResult naive_subopt_ogd_run(const SampleRefs& data,
                                            const OnlineRunConfig& cfg,
                                            const StepEvaluator& eval = {}) {
  detail::check_stream(data);
  if (!(cfg.eta > 0.0)) throw std::invalid_argument("naive descent needs eta > 0");
  OnlineRunResult out;
  detail::OnlineRecorder rec(out, cfg, eval);
  ParameterMatrix theta = ParameterMatrix::zeros(data.front()->n(), data.front()->d(),
                                                 cfg.radius);
  rec.start(theta.theta);
  for (std::size_t t = 0; t < data.size(); ++t) {
    const TrainingSample& s = *data[t];
    const Vector x = rec.decide(t, s, theta.theta);
    if (x.size() && !same_solution(x, s.x_star, 0.0)) {
      theta.theta -= cfg.step(t + 1) * (s.x_star - x) * s.z.transpose();
      theta.project();
      ++out.updates;
    }
    rec.after_update(theta.theta, t + 1 == data.size());
  }
  return out;
}

inline OnlineRunResult online_run(const SampleRefs& data, const OnlineRunConfig& cfg,
                                  const StepEvaluator& eval = {}) {
  switch (cfg.algorithm) {
    case OnlineAlgorithm::Ogd: return ogd_run(data, cfg, eval);
    case OnlineAlgorithm::Perceptron: return perceptron_run(data, cfg, eval);
    case OnlineAlgorithm::Ftrl: return ftrl_run(data, cfg, eval);
    case OnlineAlgorithm::NaiveSuboptOgd: return naive_subopt_ogd_run(data, cfg, eval);
  }
  throw std::invalid_argument("unknown online algorithm");
}

}  // namespace mom
