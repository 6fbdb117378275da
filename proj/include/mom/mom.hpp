#pragma once

// Offline estimation: minimise
//   F(theta) = (lambda/2) |theta|_F^2 + (1/T) sum_t margin_violation(D_t; theta)
// over the Frobenius ball, then prescribe decisions for new contexts.
//
// Each hinge (1 - r_i)_+ is linear in theta through a feature matrix W_ti
// with <W_ti, theta> = r_i, so F is a bias-free linear SVM in which every
// label is +1. The default solver runs dual coordinate descent on that SVM;
// a projected subgradient method with iterate averaging is also provided.

#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "mom/common.hpp"
#include "mom/lp_core.hpp"
#include "mom/margin.hpp"
#include "mom/rng.hpp"

namespace mom {

enum class MomSolver { DualCoordinate, Subgradient };
enum class StepSchedule { PolyakStyle, InverseSqrt };

struct MomFitConfig {
  double lambda = 0.0;  ///< 0 selects 1/sqrt(T)
  double radius = 0.0;  ///< 0 means unconstrained
  std::size_t max_iters = 20000;
  double tol_objective = 1e-6;
  MomSolver solver = MomSolver::DualCoordinate;
  StepSchedule step_schedule = StepSchedule::InverseSqrt;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(lambda >= 0.0)) throw std::invalid_argument("lambda must be >= 0");
    if (!(radius >= 0.0)) throw std::invalid_argument("radius must be >= 0");
    if (max_iters < 1) throw std::invalid_argument("max_iters must be >= 1");
  }
};

struct MomFitReport {
  ParameterMatrix theta_hat;
  double final_objective = 0.0;
  std::size_t iterations_used = 0;
  bool converged = false;
  std::vector<double> objective_trace;
};

inline void check_dataset(const SampleRefs& data) {
  require_dims(!data.empty(), "dataset is empty");
  const Index n = data.front()->n();
  const Index d = data.front()->d();
  for (const auto* s : data)
    require_dims(s->n() == n && s->d() == d,
                 "samples must share variable count and covariate dimension");
}

inline double mean_margin_violation(const SampleRefs& data, const ParameterMatrix& p) {
  double total = 0.0;
  for (const auto* s : data) total += margin_violation(*s, p);
  return total / static_cast<double>(data.size());
}

inline double mom_objective(const SampleRefs& data, const ParameterMatrix& p,
                            double lambda) {
  return 0.5 * lambda * p.theta.squaredNorm() + mean_margin_violation(data, p);
}

inline double mom_objective(const std::vector<TrainingSample>& data,
                            const ParameterMatrix& p, double lambda) {
  return mom_objective(sample_refs(data), p, lambda);
}

/// Warm-startable dual coordinate descent for the unconstrained problem.
/// Samples are held by pointer and must outlive the solver.
class MarginDualSolver {
 public:
  struct Outcome {
    std::size_t epochs = 0;
    bool converged = false;
    std::vector<double> objective_trace;
  };

  MarginDualSolver(Index n, Index d, std::uint64_t seed = 0)
      : theta_(Matrix::Zero(n, d)), rng_(seed) {}

  void add(const TrainingSample* s) {
    require_dims(s->n() == theta_.rows() && s->d() == theta_.cols(),
                 "sample shape does not match the solver");
    const Index k = s->tableau.cols();
    Entry e;
    e.sample = s;
    e.alpha = Vector::Zero(k);
    e.curvature = (1.0 + s->tableau.colwise().squaredNorm().array()).matrix().transpose() *
                  s->z.squaredNorm();
    entries_.push_back(std::move(e));
  }

  std::size_t size() const { return entries_.size(); }
  const Matrix& theta() const { return theta_; }

  /// Objective F at the current iterate for the given lambda.
  double objective(double lambda) const {
    double hinge = 0.0;
    ParameterMatrix p{theta_, 0.0};
    for (const auto& e : entries_) hinge += margin_violation(*e.sample, p);
    return 0.5 * lambda * theta_.squaredNorm() +
           hinge / static_cast<double>(entries_.size());
  }

  /// Runs epochs until the relative duality gap is at most `tol`. The gap is
  /// measured every `kFullEvery` epochs, right before a sweep that visits
  /// every sample; the sweeps in between skip samples whose hinges were all
  /// idle (alpha = 0, reduced cost above 1) at their last visit.
  Outcome solve(double lambda, std::size_t max_epochs, double tol) {
    require_dims(!entries_.empty(), "dataset is empty");
    const double T = static_cast<double>(entries_.size());
    const double C = 1.0 / (lambda * T);
    bool clipped = false;
    for (auto& e : entries_) {
      e.idle = false;
      for (Index k = 0; k < e.alpha.size(); ++k) {
        if (e.alpha(k) > C) {
          e.alpha(k) = C;
          clipped = true;
        }
      }
    }
    if (clipped) rebuild_theta();

    Outcome out;
    std::vector<std::size_t> order(entries_.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    while (out.epochs < max_epochs) {
      rng_.shuffle(order);
      const bool full = out.epochs % kFullEvery == 0;
      for (std::size_t t : order)
        if (full || !entries_[t].idle) sweep(entries_[t], C);
      ++out.epochs;
      if (out.epochs % kFullEvery != 0 && out.epochs < max_epochs) continue;

      const auto [primal, dual] = primal_dual(C);
      out.objective_trace.push_back(lambda * primal);
      if (primal - dual <= tol * std::max(std::abs(primal), 1e-300)) {
        out.converged = true;
        break;
      }
    }
    return out;
  }

 private:
  struct Entry {
    const TrainingSample* sample = nullptr;
    Vector alpha;      // one dual variable per nonbasic index
    Vector curvature;  // |W_ti|_F^2
    bool idle = false;
  };

  static constexpr std::size_t kFullEvery = 10;

  // Within one sample theta only enters through u = theta z, which moves by
  // (row change) * |z|^2, so the row changes are collected in dw and applied
  // as a single rank-one update.
  void sweep(Entry& e, double C) {
    const TrainingSample& s = *e.sample;
    const auto& B = s.basic();
    const auto& N = s.nonbasic();
    const double zz = s.z.squaredNorm();
    if (zz == 0.0) return;
    Vector u = theta_ * s.z;
    Vector uB(static_cast<Index>(B.size()));
    for (std::size_t b = 0; b < B.size(); ++b) uB(static_cast<Index>(b)) = u(B[b]);
    Vector dw = Vector::Zero(theta_.rows());
    bool moved = false;
    bool idle = true;
    for (std::size_t k = 0; k < N.size(); ++k) {
      const Index kk = static_cast<Index>(k);
      const double r = u(N[k]) - s.tableau.col(kk).dot(uB);
      const double grad = r - 1.0;
      double& a = e.alpha(kk);
      if (a > 0.0 || grad <= 0.0) idle = false;
      if ((a <= 0.0 && grad >= 0.0) || (a >= C && grad <= 0.0)) continue;
      const double next = std::clamp(a - grad / e.curvature(kk), 0.0, C);
      const double delta = next - a;
      if (delta == 0.0) continue;
      a = next;
      moved = true;
      dw(N[k]) += delta;
      u(N[k]) += delta * zz;
      for (std::size_t b = 0; b < B.size(); ++b) {
        const double h = s.tableau(static_cast<Index>(b), kk);
        if (h == 0.0) continue;
        dw(B[b]) -= delta * h;
        uB(static_cast<Index>(b)) -= delta * h * zz;
      }
    }
    if (moved) theta_.noalias() += dw * s.z.transpose();
    e.idle = idle;
  }

  void rebuild_theta() {
    theta_.setZero();
    for (const auto& e : entries_) {
      const TrainingSample& s = *e.sample;
      for (std::size_t k = 0; k < s.nonbasic().size(); ++k)
        theta_.row(s.nonbasic()[k]) += e.alpha(static_cast<Index>(k)) * s.z.transpose();
      const Vector pull = s.tableau * e.alpha;
      for (std::size_t b = 0; b < s.basic().size(); ++b)
        theta_.row(s.basic()[b]) -= pull(static_cast<Index>(b)) * s.z.transpose();
    }
  }

  // SVM-scaled primal (|theta|^2/2 + C * hinge) and dual objectives.
  std::pair<double, double> primal_dual(double C) const {
    double hinge = 0.0;
    double alpha_sum = 0.0;
    ParameterMatrix p{theta_, 0.0};
    for (const auto& e : entries_) {
      hinge += margin_violation(*e.sample, p);
      alpha_sum += e.alpha.sum();
    }
    const double half_norm = 0.5 * theta_.squaredNorm();
    return {half_norm + C * hinge, alpha_sum - half_norm};
  }

  Matrix theta_;
  std::vector<Entry> entries_;
  Rng rng_;
};

namespace detail {

inline double resolve_lambda(const MomFitConfig& cfg, std::size_t T) {
  return cfg.lambda > 0.0 ? cfg.lambda : 1.0 / std::sqrt(static_cast<double>(T));
}

// The ball-constrained minimiser coincides with the unconstrained one at
// some larger ridge weight lambda + mu; |theta(lambda + mu)| decreases in mu,
// so mu is located by bisection on a log scale.
inline MomFitReport fit_dual(const SampleRefs& data, const MomFitConfig& cfg,
                             double lambda, MarginDualSolver* warm = nullptr) {
  std::optional<MarginDualSolver> own;
  if (!warm) {
    own.emplace(data.front()->n(), data.front()->d(), cfg.seed);
    for (const auto* s : data) own->add(s);
    warm = &*own;
  }
  MarginDualSolver& solver = *warm;
  MomFitReport report;
  auto run = [&](double lam) {
    auto out = solver.solve(lam, cfg.max_iters, cfg.tol_objective);
    report.iterations_used += out.epochs;
    report.converged = out.converged;
    report.objective_trace.insert(report.objective_trace.end(),
                                  out.objective_trace.begin(),
                                  out.objective_trace.end());
  };
  run(lambda);
  const double R = cfg.radius;
  if (R > 0.0 && solver.theta().norm() > R) {
    double lo = 0.0;
    double hi = lambda;
    for (int k = 0; k < 60; ++k) {
      run(lambda + hi);
      if (solver.theta().norm() <= R) break;
      lo = hi;
      hi *= 4.0;
    }
    Matrix feasible = solver.theta();
    bool all_converged = report.converged;
    for (int k = 0; k < 40 && hi - lo > 1e-6 * hi; ++k) {
      const double mid = lo > 0.0 ? std::sqrt(lo * hi) : 0.5 * hi;
      run(lambda + mid);
      all_converged = all_converged && report.converged;
      if (solver.theta().norm() <= R) {
        hi = mid;
        feasible = solver.theta();
      } else {
        lo = mid;
      }
    }
    report.converged = all_converged;
    report.theta_hat = ParameterMatrix{feasible, R};
  } else {
    report.theta_hat = ParameterMatrix{solver.theta(), R};
  }
  report.theta_hat.project();
  report.final_objective = mom_objective(data, report.theta_hat, lambda);
  return report;
}

inline MomFitReport fit_subgradient(const SampleRefs& data, const MomFitConfig& cfg,
                                    double lambda) {
  const Index n = data.front()->n();
  const Index d = data.front()->d();
  const double T = static_cast<double>(data.size());
  double sigma = 0.0;
  double znorm = 0.0;
  for (const auto* s : data) {
    sigma = std::max(sigma, basis_inverse_norm(*s));
    znorm = std::max(znorm, s->z.norm());
  }
  const double m = static_cast<double>(data.front()->m());
  const double lipschitz = (2.0 + std::sqrt(m) * sigma) * std::max(znorm, 1e-12);
  const double eta0 = 1.0 / (lambda + lipschitz);

  ParameterMatrix iterate = ParameterMatrix::zeros(n, d, cfg.radius);
  Matrix running_sum = Matrix::Zero(n, d);
  ParameterMatrix best = iterate;
  double best_value = mom_objective(data, best, lambda);
  const double delta0 = 0.1 * best_value;

  MomFitReport report;
  constexpr std::size_t window = 50;
  for (std::size_t k = 1; k <= cfg.max_iters; ++k) {
    Matrix grad = lambda * iterate.theta;
    for (const auto* s : data) accumulate_margin_subgradient(*s, iterate, 1.0 / T, grad);
    double step = eta0 / std::sqrt(static_cast<double>(k));
    if (cfg.step_schedule == StepSchedule::PolyakStyle) {
      const double value = mom_objective(data, iterate, lambda);
      const double target = best_value - delta0 / std::sqrt(static_cast<double>(k));
      const double g2 = grad.squaredNorm();
      if (g2 > 0.0) step = std::max(value - target, 0.0) / g2;
    }
    iterate.theta -= step * grad;
    iterate.project();

    running_sum += iterate.theta;
    ParameterMatrix averaged{running_sum / static_cast<double>(k), cfg.radius};
    averaged.project();
    const double value = mom_objective(data, averaged, lambda);
    if (value < best_value) {
      best_value = value;
      best = averaged;
    }
    report.objective_trace.push_back(best_value);
    report.iterations_used = k;
    if (k > window) {
      const double before = report.objective_trace[k - 1 - window];
      if (before - best_value <= cfg.tol_objective * std::max(std::abs(before), 1e-300)) {
        report.converged = true;
        break;
      }
    }
  }
  report.theta_hat = best;
  report.final_objective = best_value;
  return report;
}

}  // namespace detail

inline MomFitReport mom_fit(const SampleRefs& data, const MomFitConfig& cfg) {
  cfg.validate();
  check_dataset(data);
  const double lambda = detail::resolve_lambda(cfg, data.size());
  if (cfg.solver == MomSolver::Subgradient)
    return detail::fit_subgradient(data, cfg, lambda);
  return detail::fit_dual(data, cfg, lambda);
}

inline MomFitReport mom_fit(const std::vector<TrainingSample>& data,
                            const MomFitConfig& cfg) {
  return mom_fit(sample_refs(data), cfg);
}

struct Prescription {
  Vector c_hat;
  LPSolution solution;
};

/// c_hat = theta z, then x_hat solves LP(c_hat, A, b). A degenerate
/// predicted problem is retried with the perturbed solve.
inline LpOutcome<Prescription> mom_prescribe(const ParameterMatrix& theta,
                                             const Matrix& A, const Vector& b,
                                             const Vector& z,
                                             const SolverOptions& opts = {}) {
  Vector c_hat = predict_objective(theta, z);
  require_dims(c_hat.size() == A.cols(), "theta rows must equal A.cols()");
  StandardFormLP lp{c_hat, A, b};
  LPResult res = solve_lp(lp, opts);
  if (res.status == SolveStatus::Degenerate && !opts.perturb)
    res = solve_lp(lp, opts.with_perturbation());
  if (!res.ok()) return LpOutcome<Prescription>::failure(res.status, res.detail);
  return LpOutcome<Prescription>::success({std::move(c_hat), std::move(*res.value)});
}

}  // namespace mom
