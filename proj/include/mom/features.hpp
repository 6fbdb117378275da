#pragma once

// Kernel features: every covariate is replaced by its vector of kernel
// values against the stored training covariates.

#include <cmath>
#include <string>
#include <vector>

#include "mom/common.hpp"
#include "mom/margin.hpp"

namespace mom {

enum class KernelKind { Linear, Polynomial, Rbf };

inline const char* to_string(KernelKind k) {
  switch (k) {
    case KernelKind::Linear: return "linear";
    case KernelKind::Polynomial: return "polynomial";
    case KernelKind::Rbf: return "rbf";
  }
  return "unknown";
}

inline KernelKind parse_kernel_kind(const std::string& s) {
  if (s == "linear") return KernelKind::Linear;
  if (s == "polynomial" || s == "poly") return KernelKind::Polynomial;
  if (s == "rbf") return KernelKind::Rbf;
  throw std::invalid_argument("unknown kernel '" + s + "'");
}

struct KernelSpec {
  KernelKind kind = KernelKind::Linear;
  double gamma = 1.0;
  int degree = 2;
  bool normalize = true;  ///< scale features so every training row has norm <= 1

  void validate() const {
    if (!(gamma > 0.0)) throw std::invalid_argument("kernel gamma must be > 0");
    if (degree < 1) throw std::invalid_argument("kernel degree must be >= 1");
  }

  static KernelSpec linear() { return {}; }
  static KernelSpec polynomial(double gamma, int degree) {
    return {KernelKind::Polynomial, gamma, degree, true};
  }
  static KernelSpec rbf(double gamma) { return {KernelKind::Rbf, gamma, 2, true}; }
};

/// linear: a'b; polynomial: (a'b / gamma + 1)^degree; rbf: exp(-|a-b|^2 / gamma).
inline double kernel_eval(const KernelSpec& spec, const Vector& a, const Vector& b) {
  require_dims(a.size() == b.size(), "kernel arguments must share dimension");
  switch (spec.kind) {
    case KernelKind::Linear: return a.dot(b);
    case KernelKind::Polynomial: return std::pow(a.dot(b) / spec.gamma + 1.0, spec.degree);
    case KernelKind::Rbf: return std::exp(-(a - b).squaredNorm() / spec.gamma);
  }
  return 0.0;
}

/// Rows of `points` are the covariates.
inline Matrix gram_matrix(const KernelSpec& spec, const Matrix& points) {
  const Index T = points.rows();
  Matrix K(T, T);
  for (Index i = 0; i < T; ++i) {
    const Vector zi = points.row(i).transpose();
    for (Index j = 0; j <= i; ++j) {
      K(i, j) = kernel_eval(spec, zi, points.row(j).transpose());
      K(j, i) = K(i, j);
    }
  }
  return K;
}

class KernelTransformer {
 public:
  KernelTransformer(KernelSpec spec, Matrix anchors)
      : spec_(spec), anchors_(std::move(anchors)) {
    spec_.validate();
    require_dims(anchors_.rows() >= 1, "kernel transformer needs training covariates");
  }

  const KernelSpec& spec() const { return spec_; }
  const Matrix& anchors() const { return anchors_; }
  double scale() const { return scale_; }
  Index output_dim() const { return anchors_.rows(); }

  /// Fixes the divisor from the largest raw training-row norm.
  void calibrate(const Matrix& gram) {
    if (!spec_.normalize) return;
    const double top = gram.rowwise().norm().maxCoeff();
    scale_ = top > 0.0 ? top : 1.0;
  }

  /// Restores a divisor saved from an earlier calibration.
  void set_scale(double scale) {
    if (!(scale > 0.0)) throw std::invalid_argument("kernel scale must be > 0");
    scale_ = scale;
  }

  Vector operator()(const Vector& z) const {
    require_dims(z.size() == anchors_.cols(), "covariate dimension mismatch");
    Vector out(anchors_.rows());
    for (Index t = 0; t < anchors_.rows(); ++t)
      out(t) = kernel_eval(spec_, z, anchors_.row(t).transpose());
    return out / scale_;
  }

 private:
  KernelSpec spec_;
  Matrix anchors_;
  double scale_ = 1.0;
};

struct KernelizedData {
  std::vector<TrainingSample> samples;
  KernelTransformer transformer;
};

inline Matrix stack_covariates(const SampleRefs& data) {
  require_dims(!data.empty(), "dataset is empty");
  Matrix Z(static_cast<Index>(data.size()), data.front()->d());
  for (std::size_t t = 0; t < data.size(); ++t) Z.row(static_cast<Index>(t)) = data[t]->z.transpose();
  return Z;
}

/// Each training z becomes its Gram row (divided by the largest Gram-row
/// norm when normalising); the transformer maps new covariates the same way.
inline KernelizedData kernelize_dataset(const SampleRefs& train, const KernelSpec& spec) {
  KernelTransformer tf(spec, stack_covariates(train));
  const Matrix K = gram_matrix(spec, tf.anchors());
  tf.calibrate(K);
  KernelizedData out{{}, tf};
  out.samples.reserve(train.size());
  for (std::size_t t = 0; t < train.size(); ++t) {
    TrainingSample s = *train[t];
    s.z = K.row(static_cast<Index>(t)).transpose() / tf.scale();
    out.samples.push_back(std::move(s));
  }
  return out;
}

/// Covariates rewritten in an orthonormal basis of their span, dropping
/// directions whose singular value is at most `rel_tol` times the largest.
/// Margin fits only ever move theta inside this row space, so fitting on
/// `samples` and mapping back with lift() gives the same model in fewer
/// dimensions.
struct SpanCoordinates {
  Matrix basis;  ///< d x r, orthonormal columns
  std::vector<TrainingSample> samples;

  Matrix lift(const Matrix& theta) const { return theta * basis.transpose(); }
};

inline SpanCoordinates span_coordinates(const SampleRefs& data, double rel_tol = 1e-10) {
  const Matrix Z = stack_covariates(data);
  Eigen::BDCSVD<Matrix> svd(Z, Eigen::ComputeThinV);
  const Vector& sv = svd.singularValues();
  Index r = 0;
  while (r < sv.size() && sv(r) > rel_tol * sv(0)) ++r;
  SpanCoordinates out;
  out.basis = svd.matrixV().leftCols(std::max<Index>(r, 1));
  out.samples.reserve(data.size());
  for (const auto* s : data) {
    TrainingSample t = *s;
    t.z = out.basis.transpose() * s->z;
    out.samples.push_back(std::move(t));
  }
  return out;
}

}  // namespace mom
