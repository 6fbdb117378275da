#pragma once

// Brute-force reference solver: enumerate every basis of a small LP.
// Exponential in n; meant for cross-checking solve_lp in tests.

#include <functional>
#include <vector>

#include "mom/lp_core.hpp"

namespace mom {

constexpr Index kMaxOracleColumns = 10;

/// Calls `visit(basis, x)` for every column subset of size m whose
/// submatrix is invertible and whose basic solution is feasible.
inline void for_each_feasible_basis(
    const StandardFormLP& lp,
    const std::function<void(const Basis&, const Vector&)>& visit,
    double tol = 1e-9) {
  lp.validate();
  require_dims(lp.cols() <= kMaxOracleColumns,
               "vertex enumeration is limited to n <= 10");
  const Index m = lp.rows();
  const Index n = lp.cols();
  std::vector<Index> pick(static_cast<std::size_t>(m));
  std::iota(pick.begin(), pick.end(), Index{0});
  const double feas_tol = tol * std::max(1.0, lp.b.cwiseAbs().maxCoeff());
  for (;;) {
    Basis basis(pick, n);
    Eigen::FullPivLU<Matrix> lu(basis_columns(lp.A, basis));
    if (lu.isInvertible()) {
      const Vector xB = lu.solve(lp.b);
      if (xB.minCoeff() >= -feas_tol) {
        Vector x = Vector::Zero(n);
        for (Index k = 0; k < m; ++k)
          x(pick[static_cast<std::size_t>(k)]) = std::max(xB(k), 0.0);
        visit(basis, x);
      }
    }
    // Next m-combination in lexicographic order.
    Index k = m - 1;
    while (k >= 0 && pick[static_cast<std::size_t>(k)] == n - m + k) --k;
    if (k < 0) break;
    ++pick[static_cast<std::size_t>(k)];
    for (Index r = k + 1; r < m; ++r)
      pick[static_cast<std::size_t>(r)] = pick[static_cast<std::size_t>(r - 1)] + 1;
  }
}

/// Minimum-objective feasible basic solution; ties keep the
/// lexicographically first basis. Does not detect unboundedness.
inline LPResult vertex_enumeration_oracle(const StandardFormLP& lp,
                                          double tol = 1e-9) {
  std::optional<Basis> best;
  double best_obj = std::numeric_limits<double>::infinity();
  for_each_feasible_basis(
      lp,
      [&](const Basis& basis, const Vector& x) {
        const double obj = lp.c.dot(x);
        if (!best || obj < best_obj - tol * std::max(1.0, std::abs(best_obj))) {
          best = basis;
          best_obj = obj;
        }
      },
      tol);
  if (!best) return LPResult::failure(SolveStatus::Infeasible, "no feasible basis");
  return LPResult::success(detail::assemble_solution(lp, *best, lp.b));
}

}  // namespace mom
