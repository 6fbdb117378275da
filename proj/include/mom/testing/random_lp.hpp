#pragma once

// Random LPs with a known unique, nondegenerate optimum, built from a primal
// vertex and a strictly complementary dual certificate.

#include <vector>

#include "mom/lp_core.hpp"
#include "mom/rng.hpp"

namespace mom::oracles {

inline Matrix gaussian_matrix(Rng& rng, Index rows, Index cols) {
  Matrix M(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) M(i, j) = rng.normal();
  return M;
}

/// x0 > 0 on a random basis B, reduced costs > 0 off it, so x0 is the unique
/// optimum and B the unique optimal basis. Bases with cond(A_B) > 1e4 are
/// re-drawn.
inline StandardFormLP random_nondegenerate_lp(Rng& rng, Index n, Index m) {
  require_dims(n > m && m >= 1, "random LP needs n > m >= 1");
  for (;;) {
    StandardFormLP lp;
    lp.A = gaussian_matrix(rng, m, n);
    std::vector<Index> cols(static_cast<std::size_t>(n));
    std::iota(cols.begin(), cols.end(), Index{0});
    rng.shuffle(cols);
    cols.resize(static_cast<std::size_t>(m));
    const Basis basis(cols, n);
    Eigen::JacobiSVD<Matrix> svd(basis_columns(lp.A, basis));
    const auto& sv = svd.singularValues();
    if (sv(sv.size() - 1) < 1e-4 * sv(0)) continue;

    Vector x0 = Vector::Zero(n);
    for (Index j : basis.indices()) x0(j) = rng.uniform(0.5, 2.0);
    Vector y(m);
    for (Index i = 0; i < m; ++i) y(i) = rng.normal();
    Vector s = Vector::Zero(n);
    for (Index j : basis.complement()) s(j) = rng.uniform(0.5, 2.0);
    lp.b = lp.A * x0;
    lp.c = lp.A.transpose() * y + s;
    return lp;
  }
}

/// Dimensions drawn with 1 <= m <= max_m and m < n <= max_n.
inline StandardFormLP random_nondegenerate_lp_upto(Rng& rng, Index max_n,
                                                   Index max_m) {
  const Index m = rng.uniform_int(1, max_m);
  const Index n = rng.uniform_int(m + 1, max_n);
  return random_nondegenerate_lp(rng, n, m);
}

}  // namespace mom::oracles
