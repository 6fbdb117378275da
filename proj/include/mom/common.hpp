#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace mom {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Thrown when operand shapes disagree.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline void require_dims(bool ok, const std::string& what) {
  if (!ok) throw DimensionError(what);
}

/// Two decisions are the same if they agree entrywise up to a tolerance
/// relative to the magnitude of the reference.
inline bool same_solution(const Vector& x, const Vector& reference,
                          double tol = 1e-6) {
  if (x.size() != reference.size()) return false;
  const double scale = std::max(1.0, reference.cwiseAbs().maxCoeff());
  return (x - reference).cwiseAbs().maxCoeff() <= tol * scale;
}

inline double positive_part(double v) { return v > 0.0 ? v : 0.0; }

}  // namespace mom
