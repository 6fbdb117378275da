#pragma once

// Independent reference computations for tests: finite differences, a naive
// matrix-vector product, the greedy fractional knapsack, monotone lattice
// path enumeration on the grid, and dense 1-D grid search.

#include <algorithm>
#include <functional>
#include <limits>
#include <numeric>
#include <vector>

#include "mom/common.hpp"

namespace mom::oracles {

/// Central differences of f at x, one entry at a time.
inline Matrix finite_difference_gradient(const std::function<double(const Matrix&)>& f,
                                         const Matrix& x, double h = 1e-6) {
  Matrix g(x.rows(), x.cols());
  Matrix probe = x;
  for (Index j = 0; j < x.cols(); ++j) {
    for (Index i = 0; i < x.rows(); ++i) {
      const double keep = probe(i, j);
      probe(i, j) = keep + h;
      const double up = f(probe);
      probe(i, j) = keep - h;
      const double down = f(probe);
      probe(i, j) = keep;
      g(i, j) = (up - down) / (2.0 * h);
    }
  }
  return g;
}

/// |a - b|_F / max(|a|_F, |b|_F), with 0/0 taken as 0.
inline double relative_error(const Matrix& a, const Matrix& b) {
  const double scale = std::max(a.norm(), b.norm());
  if (scale == 0.0) return 0.0;
  return (a - b).norm() / scale;
}

inline Vector naive_matvec(const Matrix& M, const Vector& v) {
  Vector out(M.rows());
  for (Index i = 0; i < M.rows(); ++i) {
    double acc = 0.0;
    for (Index j = 0; j < M.cols(); ++j) acc += M(i, j) * v(j);
    out(i) = acc;
  }
  return out;
}

/// max sum u_j x_j  s.t.  p'x <= budget, 0 <= x <= 1, by utility/price
/// ratio. Items with non-positive utility are left out.
inline Vector greedy_fractional_knapsack(const Vector& utility, const Vector& price,
                                         double budget) {
  const Index n = utility.size();
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
    return utility(a) / price(a) > utility(b) / price(b);
  });
  Vector x = Vector::Zero(n);
  double left = budget;
  for (Index j : order) {
    if (utility(j) <= 0.0 || left <= 0.0) break;
    const double take = std::min(1.0, left / price(j));
    x(j) = take;
    left -= take * price(j);
  }
  return x;
}

/// Cheapest south-west to north-east path on a k x k grid of east/north
/// edges, enumerating every monotone path. Edge ids follow the canonical
/// ordering: east edges row-major, then north edges row-major.
struct GridPath {
  double cost = std::numeric_limits<double>::infinity();
  std::vector<Index> edges;
};

inline GridPath cheapest_grid_path(Index k, const Vector& cost) {
  const Index east_count = k * (k - 1);
  auto east_id = [&](Index row, Index col) { return row * (k - 1) + col; };
  auto north_id = [&](Index row, Index col) { return east_count + row * k + col; };
  GridPath best;
  std::vector<Index> path;
  std::function<void(Index, Index, double)> walk = [&](Index row, Index col, double acc) {
    if (row == k - 1 && col == k - 1) {
      if (acc < best.cost) best = {acc, path};
      return;
    }
    if (col + 1 < k) {
      path.push_back(east_id(row, col));
      walk(row, col + 1, acc + cost(path.back()));
      path.pop_back();
    }
    if (row + 1 < k) {
      path.push_back(north_id(row, col));
      walk(row + 1, col, acc + cost(path.back()));
      path.pop_back();
    }
  };
  walk(0, 0, 0.0);
  return best;
}

/// Minimiser of f over the grid lo, lo + step, ..., hi.
inline std::pair<double, double> grid_search_1d(const std::function<double(double)>& f,
                                                double lo, double hi, double step) {
  double best_x = lo;
  double best_f = f(lo);
  const auto count = static_cast<long>(std::floor((hi - lo) / step + 0.5));
  for (long k = 1; k <= count; ++k) {
    const double x = lo + static_cast<double>(k) * step;
    const double v = f(x);
    if (v < best_f) {
      best_f = v;
      best_x = x;
    }
  }
  return {best_x, best_f};
}

}  // namespace mom::oracles
