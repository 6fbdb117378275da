#pragma once

// Standard-form linear programs  min c'x  s.t.  Ax = b, x >= 0,
// a two-phase revised simplex that tracks its basis explicitly, and the
// reduced-cost machinery built on top of a basis.

#include <algorithm>
#include <limits>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "mom/common.hpp"
#include "mom/rng.hpp"

namespace mom {

struct StandardFormLP {
  Vector c;
  Matrix A;
  Vector b;

  Index rows() const { return A.rows(); }
  Index cols() const { return A.cols(); }

  void validate() const {
    require_dims(A.rows() >= 1, "LP needs at least one constraint");
    require_dims(A.cols() >= A.rows(), "LP needs n >= m");
    require_dims(c.size() == A.cols(), "objective length must equal A.cols()");
    require_dims(b.size() == A.rows(), "rhs length must equal A.rows()");
  }
};

/// A set of basic column indices B (kept sorted) and its complement N.
class Basis {
 public:
  Basis() = default;

  Basis(std::vector<Index> basic, Index n) : n_(n) {
    std::sort(basic.begin(), basic.end());
    for (std::size_t k = 0; k < basic.size(); ++k) {
      require_dims(basic[k] >= 0 && basic[k] < n, "basis index out of range");
      require_dims(k == 0 || basic[k] != basic[k - 1],
                   "basis indices must be distinct");
    }
    basic_ = std::move(basic);
    std::vector<char> mark(static_cast<std::size_t>(n), 0);
    for (Index j : basic_) mark[static_cast<std::size_t>(j)] = 1;
    for (Index j = 0; j < n; ++j)
      if (!mark[static_cast<std::size_t>(j)]) nonbasic_.push_back(j);
  }

  const std::vector<Index>& indices() const { return basic_; }
  const std::vector<Index>& complement() const { return nonbasic_; }
  Index size() const { return static_cast<Index>(basic_.size()); }
  Index total() const { return n_; }

  bool contains(Index j) const {
    return std::binary_search(basic_.begin(), basic_.end(), j);
  }

  bool operator==(const Basis& other) const = default;

 private:
  std::vector<Index> basic_;
  std::vector<Index> nonbasic_;
  Index n_ = 0;
};

enum class SolveStatus { Optimal, Infeasible, Unbounded, Degenerate };

inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::Unbounded: return "unbounded";
    case SolveStatus::Degenerate: return "degenerate";
  }
  return "unknown";
}

/// Raised by operations whose only failure mode is a bad basis.
class LpError : public std::runtime_error {
 public:
  LpError(SolveStatus status, const std::string& detail)
      : std::runtime_error(std::string(to_string(status)) + ": " + detail),
        status_(status) {}
  SolveStatus status() const { return status_; }

 private:
  SolveStatus status_;
};

/// Value-or-status result. A Degenerate outcome of solve_lp may still carry
/// the (optimal, degenerate) vertex the simplex stopped at.
template <class T>
struct LpOutcome {
  SolveStatus status = SolveStatus::Optimal;
  std::string detail;
  std::optional<T> value;

  bool ok() const { return status == SolveStatus::Optimal && value.has_value(); }

  const T& get() const {
    if (!value) throw LpError(status, detail);
    return *value;
  }

  static LpOutcome success(T v) { return {SolveStatus::Optimal, {}, std::move(v)}; }
  static LpOutcome failure(SolveStatus s, std::string why,
                           std::optional<T> partial = std::nullopt) {
    return {s, std::move(why), std::move(partial)};
  }
};

struct SolverOptions {
  double tol = 1e-9;
  std::size_t max_pivots = 0;  ///< 0 selects 10*n*m per phase
  bool perturb = false;        ///< on degeneracy, perturb b and re-solve
  double perturb_epsilon = 1e-7;
  std::uint64_t perturb_seed = 0x51ed2701;

  SolverOptions with_perturbation(bool on = true) const {
    SolverOptions o = *this;
    o.perturb = on;
    return o;
  }
};

struct LPSolution {
  Vector x;
  Basis basis;
  Matrix basis_inverse;  ///< A_B^{-1}, columns ordered as basis.indices()
  Vector dual_price;     ///< (A_B^{-1})' c_B
  double objective = 0.0;
  bool perturbed = false;  ///< basis was selected on a perturbed rhs
};

using LPResult = LpOutcome<LPSolution>;

inline Matrix basis_columns(const Matrix& A, const Basis& basis) {
  Matrix AB(A.rows(), basis.size());
  for (Index k = 0; k < basis.size(); ++k)
    AB.col(k) = A.col(basis.indices()[static_cast<std::size_t>(k)]);
  return AB;
}

/// A_B^{-1}; throws LpError(Degenerate) when A_B is not square or singular.
inline Matrix basis_inverse(const Matrix& A, const Basis& basis) {
  if (basis.size() != A.rows())
    throw LpError(SolveStatus::Degenerate, "basis size differs from row count");
  Eigen::FullPivLU<Matrix> lu(basis_columns(A, basis));
  if (!lu.isInvertible())
    throw LpError(SolveStatus::Degenerate, "basis submatrix is singular");
  return lu.inverse();
}

/// x_B = A_B^{-1} b, x_N = 0 exactly.
inline Vector basic_solution(const StandardFormLP& lp, const Basis& basis) {
  const Matrix inv = basis_inverse(lp.A, basis);
  const Vector xB = inv * lp.b;
  Vector x = Vector::Zero(lp.cols());
  for (Index k = 0; k < basis.size(); ++k)
    x(basis.indices()[static_cast<std::size_t>(k)]) = xB(k);
  return x;
}

/// B = {i : x_i > tol}; Degenerate unless |B| = m.
inline LpOutcome<Basis> extract_basis(const Vector& x, Index m,
                                      double tol = 1e-9) {
  std::vector<Index> basic;
  for (Index i = 0; i < x.size(); ++i)
    if (x(i) > tol) basic.push_back(i);
  if (static_cast<Index>(basic.size()) != m) {
    std::ostringstream os;
    os << basic.size() << " positive components, expected " << m;
    return LpOutcome<Basis>::failure(SolveStatus::Degenerate, os.str());
  }
  return LpOutcome<Basis>::success(Basis(std::move(basic), x.size()));
}

/// r = c - A'(A_B^{-1})' c_B with r_B forced to exactly zero.
inline Vector reduced_costs(const Vector& c, const Matrix& A,
                            const Basis& basis) {
  require_dims(c.size() == A.cols(), "objective length must equal A.cols()");
  const Matrix inv = basis_inverse(A, basis);
  Vector cB(basis.size());
  for (Index k = 0; k < basis.size(); ++k)
    cB(k) = c(basis.indices()[static_cast<std::size_t>(k)]);
  const Vector price = inv.transpose() * cB;
  Vector r = c - A.transpose() * price;
  for (Index j : basis.indices()) r(j) = 0.0;
  return r;
}

/// Optimality test on the nonbasic reduced costs.
inline bool check_optimality(const Vector& c, const Matrix& A,
                             const Basis& basis, double tol = 1e-9) {
  const Vector r = reduced_costs(c, A, basis);
  for (Index j : basis.complement())
    if (r(j) < -tol) return false;
  return true;
}

/// Upper bound on c'x_B - c'x* for the basic solution x_B of `basis`:
/// max_i x*_i * sum_{i in N} (-r_i)_+.
inline double suboptimality_bound(const StandardFormLP& lp, const Basis& basis,
                                  const Vector& x_star) {
  require_dims(x_star.size() == lp.cols(), "x* length must equal A.cols()");
  const Vector r = reduced_costs(lp.c, lp.A, basis);
  double violation = 0.0;
  for (Index j : basis.complement()) violation += positive_part(-r(j));
  return x_star.maxCoeff() * violation;
}

namespace detail {

enum class PhaseEnd { Optimal, Unbounded, PivotLimit };

// Working tableau for the revised simplex: rows are sign-normalised so the
// rhs is non-negative and m artificial identity columns follow the n
// structural ones.
struct SimplexWork {
  Matrix A;
  Vector b;
  std::vector<Index> basis;  // by row position
  std::vector<char> in_basis;
  std::size_t pivots = 0;
};

inline Eigen::PartialPivLU<Matrix> factor_basis(const SimplexWork& w) {
  const Index m = w.A.rows();
  Matrix AB(m, m);
  for (Index r = 0; r < m; ++r)
    AB.col(r) = w.A.col(w.basis[static_cast<std::size_t>(r)]);
  return Eigen::PartialPivLU<Matrix>(AB);
}

// Bland's rule: lowest-index improving column enters; among tied ratios the
// lowest-index basic variable leaves.
inline PhaseEnd run_phase(SimplexWork& w, const Vector& cost, Index eligible,
                          double tol, std::size_t max_pivots) {
  const Index m = w.A.rows();
  const double price_tol = tol * std::max(1.0, cost.cwiseAbs().maxCoeff());
  for (;;) {
    const auto lu = factor_basis(w);
    const Vector xB = lu.solve(w.b);
    Vector cB(m);
    for (Index r = 0; r < m; ++r) cB(r) = cost(w.basis[static_cast<std::size_t>(r)]);
    const Vector y = lu.transpose().solve(cB);

    Index entering = -1;
    for (Index j = 0; j < eligible; ++j) {
      if (w.in_basis[static_cast<std::size_t>(j)]) continue;
      if (cost(j) - w.A.col(j).dot(y) < -price_tol) {
        entering = j;
        break;
      }
    }
    if (entering < 0) return PhaseEnd::Optimal;
    if (w.pivots >= max_pivots) return PhaseEnd::PivotLimit;

    const Vector d = lu.solve(w.A.col(entering));
    const double pivot_tol = tol * std::max(1.0, d.cwiseAbs().maxCoeff());
    Index leave = -1;
    double best = std::numeric_limits<double>::infinity();
    for (Index r = 0; r < m; ++r) {
      if (d(r) <= pivot_tol) continue;
      const double ratio = std::max(xB(r), 0.0) / d(r);
      const double slack = tol * std::max(1.0, std::abs(best));
      if (leave < 0 || ratio < best - slack ||
          (ratio <= best + slack &&
           w.basis[static_cast<std::size_t>(r)] <
               w.basis[static_cast<std::size_t>(leave)])) {
        if (leave < 0 || ratio < best - slack) best = ratio;
        leave = r;
      }
    }
    if (leave < 0) return PhaseEnd::Unbounded;

    w.in_basis[static_cast<std::size_t>(w.basis[static_cast<std::size_t>(leave)])] = 0;
    w.basis[static_cast<std::size_t>(leave)] = entering;
    w.in_basis[static_cast<std::size_t>(entering)] = 1;
    ++w.pivots;
  }
}

inline LPSolution assemble_solution(const StandardFormLP& lp, const Basis& basis,
                                    const Vector& rhs) {
  LPSolution sol;
  sol.basis = basis;
  const Matrix AB = basis_columns(lp.A, basis);
  Eigen::PartialPivLU<Matrix> lu(AB);
  sol.basis_inverse = lu.inverse();
  const Vector xB = lu.solve(rhs);
  sol.x = Vector::Zero(lp.cols());
  Vector cB(basis.size());
  for (Index k = 0; k < basis.size(); ++k) {
    const Index j = basis.indices()[static_cast<std::size_t>(k)];
    sol.x(j) = xB(k);
    cB(k) = lp.c(j);
  }
  sol.dual_price = sol.basis_inverse.transpose() * cB;
  sol.objective = lp.c.dot(sol.x);
  return sol;
}

// Plain two-phase solve of LP(c, A, rhs). Returns Degenerate (with the
// vertex attached) when the optimum has fewer than m positive components.
inline LPResult simplex(const StandardFormLP& lp, const Vector& rhs,
                        const SolverOptions& opts) {
  const Index m = lp.rows();
  const Index n = lp.cols();
  const double tol = opts.tol;
  const std::size_t max_pivots =
      opts.max_pivots > 0 ? opts.max_pivots
                          : static_cast<std::size_t>(10 * n * m);

  SimplexWork w;
  w.A = Matrix::Zero(m, n + m);
  w.b = rhs;
  for (Index r = 0; r < m; ++r) {
    const double sign = rhs(r) < 0.0 ? -1.0 : 1.0;
    w.A.row(r).head(n) = sign * lp.A.row(r);
    w.b(r) = sign * rhs(r);
    w.A(r, n + r) = 1.0;
  }
  w.in_basis.assign(static_cast<std::size_t>(n + m), 0);
  for (Index r = 0; r < m; ++r) {
    w.basis.push_back(n + r);
    w.in_basis[static_cast<std::size_t>(n + r)] = 1;
  }

  // Phase 1: minimise the sum of artificials.
  Vector phase1_cost = Vector::Zero(n + m);
  phase1_cost.tail(m).setOnes();
  PhaseEnd end = run_phase(w, phase1_cost, n, tol, max_pivots);
  if (end == PhaseEnd::PivotLimit)
    return LPResult::failure(SolveStatus::Degenerate, "pivot limit reached in phase 1");
  {
    const auto lu = factor_basis(w);
    const Vector xB = lu.solve(w.b);
    double infeasibility = 0.0;
    for (Index r = 0; r < m; ++r)
      if (w.basis[static_cast<std::size_t>(r)] >= n) infeasibility += std::max(xB(r), 0.0);
    if (infeasibility > tol * std::max(1.0, w.b.cwiseAbs().maxCoeff()))
      return LPResult::failure(SolveStatus::Infeasible, "phase-1 optimum is positive");
  }

  // Pivot zero-level artificials out; a row with no structural pivot is
  // linearly dependent on the others.
  for (Index r = 0; r < m; ++r) {
    if (w.basis[static_cast<std::size_t>(r)] < n) continue;
    const auto lu = factor_basis(w);
    const Vector row = lu.transpose().solve(Vector::Unit(m, r));
    const Vector tableau_row = w.A.leftCols(n).transpose() * row;
    const double scale = std::max(1.0, tableau_row.cwiseAbs().maxCoeff());
    Index entering = -1;
    for (Index j = 0; j < n; ++j) {
      if (w.in_basis[static_cast<std::size_t>(j)]) continue;
      if (std::abs(tableau_row(j)) > 1e3 * tol * scale) {
        entering = j;
        break;
      }
    }
    if (entering < 0)
      return LPResult::failure(SolveStatus::Degenerate,
                               "constraint matrix is rank deficient");
    w.in_basis[static_cast<std::size_t>(w.basis[static_cast<std::size_t>(r)])] = 0;
    w.basis[static_cast<std::size_t>(r)] = entering;
    w.in_basis[static_cast<std::size_t>(entering)] = 1;
  }

  // Phase 2 on the structural columns.
  Vector phase2_cost = Vector::Zero(n + m);
  phase2_cost.head(n) = lp.c;
  w.pivots = 0;
  end = run_phase(w, phase2_cost, n, tol, max_pivots);
  if (end == PhaseEnd::Unbounded)
    return LPResult::failure(SolveStatus::Unbounded,
                             "entering column has no positive ratio");
  if (end == PhaseEnd::PivotLimit)
    return LPResult::failure(SolveStatus::Degenerate, "pivot limit reached in phase 2");

  LPSolution sol = assemble_solution(lp, Basis(w.basis, n), rhs);
  Index positive = 0;
  for (Index j : sol.basis.indices())
    if (sol.x(j) > tol) ++positive;
  if (positive < m) {
    std::ostringstream os;
    os << "optimal vertex has " << positive << " positive components, expected " << m;
    return LPResult::failure(SolveStatus::Degenerate, os.str(), std::move(sol));
  }
  return LPResult::success(std::move(sol));
}

}  // namespace detail

/// Two-phase revised simplex with Bland's rule. With `opts.perturb` set the
/// rhs is shifted by uniform noise in [0, perturb_epsilon] before solving;
/// the resulting basis is then re-evaluated against the original rhs, so the
/// returned x solves the unperturbed problem and may hold basic zeros.
inline LPResult solve_lp(const StandardFormLP& lp, const SolverOptions& opts = {}) {
  lp.validate();
  if (!opts.perturb) return detail::simplex(lp, lp.b, opts);

  Rng rng(opts.perturb_seed);
  Vector shifted = lp.b;
  for (Index r = 0; r < shifted.size(); ++r)
    shifted(r) += opts.perturb_epsilon * rng.uniform();
  LPResult perturbed = detail::simplex(lp, shifted, opts);
  if (perturbed.ok()) {
    LPSolution sol = detail::assemble_solution(lp, perturbed.value->basis, lp.b);
    const double feas_tol = 1e3 * opts.tol * std::max(1.0, lp.b.cwiseAbs().maxCoeff());
    if (sol.x.minCoeff() >= -feas_tol) {
      for (Index j = 0; j < sol.x.size(); ++j)
        if (sol.x(j) < 0.0) sol.x(j) = 0.0;
      sol.objective = lp.c.dot(sol.x);
      sol.perturbed = true;
      return LPResult::success(std::move(sol));
    }
  }
  // Fall back to the unperturbed solve; a degenerate optimal vertex is still
  // an optimal basis, so it is reported as such.
  LPResult plain = detail::simplex(lp, lp.b, opts);
  if (plain.status == SolveStatus::Degenerate && plain.value)
    return LPResult::success(std::move(*plain.value));
  return plain;
}

}  // namespace mom
