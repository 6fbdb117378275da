#pragma once

// Inverse-LP training samples, the linear objective predictor, the hinge
// loss on predicted reduced costs and its subgradient, and the decision
// losses used for evaluation.

#include <memory>
#include <vector>

#include "mom/common.hpp"
#include "mom/lp_core.hpp"

namespace mom {

/// One observation (x*, A, b, z) together with its optimal basis. The cost
/// vector that produced x* is deliberately not part of this type.
struct TrainingSample {
  Vector x_star;
  Matrix A;
  Vector b;
  Vector z;
  Basis basis;
  Matrix basis_inverse;  ///< A_B^{-1}
  Matrix tableau;        ///< A_B^{-1} A_N, one column per nonbasic index

  Index n() const { return A.cols(); }
  Index m() const { return A.rows(); }
  Index d() const { return z.size(); }
  const std::vector<Index>& basic() const { return basis.indices(); }
  const std::vector<Index>& nonbasic() const { return basis.complement(); }
};

/// Builds a sample, deriving the basis from the support of x* unless one is
/// supplied (required when x* is degenerate).
inline TrainingSample make_training_sample(Vector x_star, Matrix A, Vector b,
                                           Vector z,
                                           std::optional<Basis> basis = std::nullopt,
                                           double tol = 1e-9) {
  require_dims(x_star.size() == A.cols(), "x* length must equal A.cols()");
  require_dims(b.size() == A.rows(), "rhs length must equal A.rows()");
  require_dims(z.size() >= 1, "covariates must be nonempty");
  TrainingSample s;
  if (basis) {
    require_dims(basis->total() == A.cols() && basis->size() == A.rows(),
                 "basis shape does not match A");
    s.basis = std::move(*basis);
  } else {
    s.basis = extract_basis(x_star, A.rows(), tol).get();
  }
  const double scale = std::max(1.0, x_star.cwiseAbs().maxCoeff());
  for (Index j : s.basis.complement())
    if (std::abs(x_star(j)) > 1e3 * tol * scale)
      throw LpError(SolveStatus::Degenerate, "x* is nonzero off the basis");
  const double residual = (A * x_star - b).cwiseAbs().maxCoeff();
  if (residual > 1e-6 * std::max(1.0, b.cwiseAbs().maxCoeff()))
    throw LpError(SolveStatus::Infeasible, "A x* differs from b");

  s.basis_inverse = basis_inverse(A, s.basis);
  const auto& N = s.basis.complement();
  Matrix AN(A.rows(), static_cast<Index>(N.size()));
  for (std::size_t k = 0; k < N.size(); ++k) AN.col(static_cast<Index>(k)) = A.col(N[k]);
  s.tableau = s.basis_inverse * AN;
  s.x_star = std::move(x_star);
  s.A = std::move(A);
  s.b = std::move(b);
  s.z = std::move(z);
  return s;
}

using SampleRefs = std::vector<const TrainingSample*>;

inline SampleRefs sample_refs(const std::vector<TrainingSample>& samples) {
  SampleRefs refs;
  refs.reserve(samples.size());
  for (const auto& s : samples) refs.push_back(&s);
  return refs;
}

/// Largest singular value of A_B^{-1}.
inline double basis_inverse_norm(const TrainingSample& s) {
  Eigen::JacobiSVD<Matrix> svd(s.basis_inverse);
  return svd.singularValues()(0);
}

/// Linear predictor c_hat = theta * z with an optional Frobenius-ball bound.
struct ParameterMatrix {
  Matrix theta;
  double radius = 0.0;  ///< 0 means unconstrained

  static ParameterMatrix zeros(Index n, Index d, double radius = 0.0) {
    return {Matrix::Zero(n, d), radius};
  }

  /// Rescales theta onto the ball when it lies outside.
  void project() {
    if (radius <= 0.0) return;
    const double norm = theta.norm();
    if (norm > radius) theta *= radius / norm;
  }
};

inline Vector predict_objective(const ParameterMatrix& p, const Vector& z) {
  require_dims(p.theta.cols() == z.size(), "theta columns must equal z length");
  return p.theta * z;
}

/// Reduced costs of c_hat at the sample's basis, restricted to N:
/// c_N - (A_B^{-1} A_N)' c_B.
inline Vector nonbasic_reduced_costs(const TrainingSample& s, const Vector& c_hat) {
  require_dims(c_hat.size() == s.n(), "objective length must equal n");
  const auto& B = s.basic();
  const auto& N = s.nonbasic();
  Vector cB(static_cast<Index>(B.size()));
  for (std::size_t k = 0; k < B.size(); ++k) cB(static_cast<Index>(k)) = c_hat(B[k]);
  Vector r = s.tableau.transpose() * cB;
  for (std::size_t k = 0; k < N.size(); ++k)
    r(static_cast<Index>(k)) = c_hat(N[k]) - r(static_cast<Index>(k));
  return r;
}

inline double margin_violation(const TrainingSample& s, const ParameterMatrix& p) {
  require_dims(p.theta.rows() == s.n(), "theta rows must equal n");
  const Vector r = nonbasic_reduced_costs(s, predict_objective(p, s.z));
  double loss = 0.0;
  for (Index k = 0; k < r.size(); ++k) loss += positive_part(1.0 - r(k));
  return loss;
}

/// Adds `weight` times a subgradient of margin_violation at p into `grad`.
/// A hinge counts as active only when 1 - r_i is strictly positive.
inline void accumulate_margin_subgradient(const TrainingSample& s,
                                          const ParameterMatrix& p, double weight,
                                          Matrix& grad) {
  const Vector r = nonbasic_reduced_costs(s, predict_objective(p, s.z));
  const auto& B = s.basic();
  const auto& N = s.nonbasic();
  Vector active = Vector::Zero(r.size());
  for (Index k = 0; k < r.size(); ++k)
    if (1.0 - r(k) > 0.0) active(k) = weight;
  if (active.isZero(0.0)) return;
  for (std::size_t k = 0; k < N.size(); ++k)
    if (active(static_cast<Index>(k)) != 0.0)
      grad.row(N[k]) -= active(static_cast<Index>(k)) * s.z.transpose();
  const Vector pull = s.tableau * active;
  for (std::size_t k = 0; k < B.size(); ++k)
    grad.row(B[k]) += pull(static_cast<Index>(k)) * s.z.transpose();
}

inline Matrix margin_subgradient(const TrainingSample& s, const ParameterMatrix& p) {
  require_dims(p.theta.rows() == s.n() && p.theta.cols() == s.d(),
               "theta shape must be n x d");
  Matrix g = Matrix::Zero(s.n(), s.d());
  accumulate_margin_subgradient(s, p, 1.0, g);
  return g;
}

/// c_hat'x* - c_hat'x_hat with x_hat optimal for c_hat. Degenerate
/// predicted problems are resolved through the perturbed solve.
inline double suboptimality_loss(const TrainingSample& s, const Vector& c_hat,
                                 const SolverOptions& opts = {}) {
  require_dims(c_hat.size() == s.n(), "objective length must equal n");
  const LPResult res = solve_lp({c_hat, s.A, s.b}, opts.with_perturbation());
  const LPSolution& sol = res.get();
  return c_hat.dot(s.x_star) - c_hat.dot(sol.x);
}

inline double estimate_loss(const Vector& c, const Vector& x_pred,
                            const Vector& x_star) {
  require_dims(c.size() == x_pred.size() && c.size() == x_star.size(),
               "estimate loss operands must share length");
  return c.dot(x_pred - x_star);
}

/// Raised when a relative loss would divide by zero.
class DivisionByZero : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// c'(x - x*) / c'x*.
inline double relative_loss_sp(const Vector& c, const Vector& x_pred,
                               const Vector& x_star) {
  const double denom = c.dot(x_star);
  if (denom == 0.0) throw DivisionByZero("optimal cost is zero");
  return estimate_loss(c, x_pred, x_star) / denom;
}

/// c'(x* - x) / |c|.
inline double relative_loss_fk(const Vector& c, const Vector& x_pred,
                               const Vector& x_star) {
  const double denom = c.norm();
  if (denom == 0.0) throw DivisionByZero("cost vector is zero");
  return c.dot(x_star - x_pred) / denom;
}

inline double squared_prediction_error(const Vector& c_hat, const Vector& c) {
  return 0.5 * (c_hat - c).squaredNorm();
}

}  // namespace mom
