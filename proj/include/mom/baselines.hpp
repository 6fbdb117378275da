#pragma once

// Learners that regress on the observed cost vectors: least squares, ridge,
// and SPO+ by mini-batch stochastic subgradient descent.

#include <cmath>
#include <span>
#include <vector>

#include "mom/common.hpp"
#include "mom/datagen.hpp"
#include "mom/lp_core.hpp"
#include "mom/margin.hpp"
#include "mom/rng.hpp"

namespace mom {

using SupervisedSpan = std::span<const SupervisedSample>;

struct RegressionFit {
  ParameterMatrix theta_hat;
  bool used_pseudo_inverse = false;
};

namespace detail {

inline void check_supervised(SupervisedSpan data) {
  require_dims(!data.empty(), "dataset is empty");
  const Index n = data.front().c.size();
  const Index d = data.front().sample.d();
  for (const auto& s : data)
    require_dims(s.c.size() == n && s.sample.d() == d,
                 "samples must share cost length and covariate dimension");
}

// Sum z z' and sum c z'.
inline std::pair<Matrix, Matrix> moment_matrices(SupervisedSpan data) {
  const Index n = data.front().c.size();
  const Index d = data.front().sample.d();
  Matrix zz = Matrix::Zero(d, d);
  Matrix cz = Matrix::Zero(n, d);
  for (const auto& s : data) {
    zz.noalias() += s.sample.z * s.sample.z.transpose();
    cz.noalias() += s.c * s.sample.z.transpose();
  }
  return {zz, cz};
}

}  // namespace detail

/// Raised when the covariate Gram matrix is singular and the pseudo-inverse
/// fallback is disabled.
class SingularGram : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// theta = (sum c z')(sum z z')^{-1}. A singular Gram matrix falls back to
/// the minimum-norm least-squares solution when allowed.
inline RegressionFit ols_fit(SupervisedSpan data, bool allow_pseudo_inverse = true) {
  detail::check_supervised(data);
  auto [zz, cz] = detail::moment_matrices(data);
  RegressionFit out;
  Eigen::FullPivLU<Matrix> lu(zz);
  lu.setThreshold(1e-12);
  if (lu.isInvertible()) {
    out.theta_hat.theta = lu.solve(cz.transpose()).transpose();
    return out;
  }
  if (!allow_pseudo_inverse) throw SingularGram("covariate Gram matrix is singular");
  Matrix Z(static_cast<Index>(data.size()), zz.rows());
  Matrix C(static_cast<Index>(data.size()), cz.rows());
  for (std::size_t t = 0; t < data.size(); ++t) {
    Z.row(static_cast<Index>(t)) = data[t].sample.z.transpose();
    C.row(static_cast<Index>(t)) = data[t].c.transpose();
  }
  out.theta_hat.theta = Z.completeOrthogonalDecomposition().solve(C).transpose();
  out.used_pseudo_inverse = true;
  return out;
}

/// Per-sample averaged penalty: theta = (sum c z')(sum z z' + T lambda I)^{-1}.
inline RegressionFit ridge_fit(SupervisedSpan data, double lambda) {
  if (!(lambda >= 0.0)) throw std::invalid_argument("ridge lambda must be >= 0");
  if (lambda == 0.0) return ols_fit(data);
  detail::check_supervised(data);
  auto [zz, cz] = detail::moment_matrices(data);
  zz.diagonal().array() += static_cast<double>(data.size()) * lambda;
  RegressionFit out;
  out.theta_hat.theta = zz.llt().solve(cz.transpose()).transpose();
  return out;
}

// ----------------------------------------------------------------- SPO+

/// (2 c_hat - c)'x* - min over the feasible set of (2 c_hat - c)'x, and the
/// minimiser. Nullopt when the inner problem has no optimum.
struct SpoPlusTerm {
  double loss = 0.0;
  Vector inner_x;
};

inline std::optional<SpoPlusTerm> spo_plus_term(const SupervisedSample& s,
                                                const Matrix& theta,
                                                const SolverOptions& opts = {}) {
  require_dims(theta.rows() == s.c.size() && theta.cols() == s.sample.d(),
               "theta shape must be n x d");
  const Vector w = 2.0 * (theta * s.sample.z) - s.c;
  const LPResult res = solve_lp({w, s.sample.A, s.sample.b}, opts.with_perturbation());
  if (!res.ok()) return std::nullopt;
  const Vector& x = res.get().x;
  return SpoPlusTerm{w.dot(s.sample.x_star) - w.dot(x), x};
}

inline double spo_plus_loss(const SupervisedSample& s, const Matrix& theta,
                            const SolverOptions& opts = {}) {
  auto term = spo_plus_term(s, theta, opts);
  if (!term) throw LpError(SolveStatus::Unbounded, "SPO+ inner problem has no optimum");
  return term->loss;
}

/// 2 (x* - x_tilde) z'.
inline Matrix spo_plus_subgradient(const SupervisedSample& s, const Matrix& theta,
                                   const SolverOptions& opts = {}) {
  auto term = spo_plus_term(s, theta, opts);
  if (!term) throw LpError(SolveStatus::Unbounded, "SPO+ inner problem has no optimum");
  return 2.0 * (s.sample.x_star - term->inner_x) * s.sample.z.transpose();
}

struct SpoPlusConfig {
  double step = 0.1;     ///< base step; step k uses step / sqrt(k)
  double lambda = 0.0;   ///< Frobenius penalty (lambda / 2)|theta|^2
  std::size_t batch = 5;
  std::size_t steps = 2000;
  std::uint64_t seed = 0;
  SolverOptions solver;

  void validate() const {
    if (!(step > 0.0)) throw std::invalid_argument("SPO+ step must be > 0");
    if (!(lambda >= 0.0)) throw std::invalid_argument("SPO+ lambda must be >= 0");
    if (batch == 0 || steps == 0) throw std::invalid_argument("SPO+ batch and steps must be >= 1");
  }
};

struct SpoPlusReport {
  ParameterMatrix theta_hat;
  std::size_t skipped = 0;  ///< per-sample inner solves without an optimum
  bool converged = false;   ///< mean batch loss settled over the last tenth of the run
  std::vector<double> batch_loss;
};

inline SpoPlusReport spo_plus_fit(SupervisedSpan data, const SpoPlusConfig& cfg) {
  cfg.validate();
  detail::check_supervised(data);
  const Index n = data.front().c.size();
  const Index d = data.front().sample.d();
  Rng rng(cfg.seed);
  SpoPlusReport out;
  out.theta_hat = ParameterMatrix::zeros(n, d);
  Matrix& theta = out.theta_hat.theta;
  const auto T = static_cast<std::int64_t>(data.size());
  for (std::size_t k = 1; k <= cfg.steps; ++k) {
    Matrix grad = cfg.lambda * theta;
    double loss = 0.0;
    std::size_t used = 0;
    for (std::size_t b = 0; b < cfg.batch; ++b) {
      const auto& s = data[static_cast<std::size_t>(rng.uniform_int(0, T - 1))];
      auto term = spo_plus_term(s, theta, cfg.solver);
      if (!term) {
        ++out.skipped;
        continue;
      }
      grad += 2.0 / static_cast<double>(cfg.batch) * (s.sample.x_star - term->inner_x) *
              s.sample.z.transpose();
      loss += term->loss;
      ++used;
    }
    out.batch_loss.push_back(used ? loss / static_cast<double>(used) : 0.0);
    theta -= cfg.step / std::sqrt(static_cast<double>(k)) * grad;
  }
  const std::size_t tenth = std::max<std::size_t>(1, cfg.steps / 10);
  if (cfg.steps >= 2 * tenth) {
    double last = 0.0, prev = 0.0;
    for (std::size_t k = 0; k < tenth; ++k) {
      last += out.batch_loss[cfg.steps - 1 - k];
      prev += out.batch_loss[cfg.steps - 1 - tenth - k];
    }
    out.converged = last <= 1.05 * prev + 1e-12;
  }
  return out;
}

// ---------------------------------------------- scale consistency probe

/// Observed costs are (1 + alpha)(theta* z + noise) with alpha uniform on
/// [alpha_mean - alpha_halfwidth, alpha_mean + alpha_halfwidth], independent
/// of z.
struct ScaleNoiseSpec {
  double alpha_mean = 0.0;
  double alpha_halfwidth = 0.5;
  double additive_sd = 0.1;
};

struct ProbeRow {
  std::size_t T = 0;
  double deviation = 0.0;  ///< |theta_T - (1 + E alpha) theta*|_F
};

inline std::vector<SupervisedSample> scale_noised_regression_data(const Matrix& theta_star,
                                                                  const ScaleNoiseSpec& noise,
                                                                  std::size_t T, Rng& rng) {
  const Index n = theta_star.rows();
  const Index d = theta_star.cols();
  std::vector<SupervisedSample> out;
  out.reserve(T);
  for (std::size_t t = 0; t < T; ++t) {
    SupervisedSample s;
    s.sample.z = gen_gaussian_covariates(d, rng);
    Vector c = theta_star * s.sample.z;
    for (Index j = 0; j < n; ++j) c(j) += noise.additive_sd * rng.normal();
    const double alpha = rng.uniform(noise.alpha_mean - noise.alpha_halfwidth,
                                     noise.alpha_mean + noise.alpha_halfwidth);
    s.c = (1.0 + alpha) * c;
    s.consistent = false;
    out.push_back(std::move(s));
  }
  return out;
}

inline std::vector<ProbeRow> ols_scale_consistency_probe(const Matrix& theta_star,
                                                         const ScaleNoiseSpec& noise,
                                                         const std::vector<std::size_t>& T_list,
                                                         std::uint64_t seed) {
  std::vector<ProbeRow> rows;
  const Matrix target = (1.0 + noise.alpha_mean) * theta_star;
  for (std::size_t k = 0; k < T_list.size(); ++k) {
    Rng rng = Rng::stream(seed, kSplitStream, k);
    const auto data = scale_noised_regression_data(theta_star, noise, T_list[k], rng);
    const RegressionFit fit = ols_fit(data);
    rows.push_back({T_list[k], (fit.theta_hat.theta - target).norm()});
  }
  return rows;
}

}  // namespace mom
