#include "sketchreg/kernels.hpp"

#include <cmath>

#include "sketchreg/errors.hpp"

namespace sketchreg {

KernelSpec KernelSpec::linear(double kappa_sq) {
  if (kappa_sq <= 0) throw InvalidInput("kappa_sq must be positive");
  return KernelSpec{KernelFamily::Linear, 1.0, kappa_sq};
}

KernelSpec KernelSpec::gaussian(double bandwidth) {
  if (bandwidth <= 0) throw InvalidInput("bandwidth must be positive");
  return KernelSpec{KernelFamily::Gaussian, bandwidth, 1.0};
}

KernelSpec KernelSpec::sobolev_spline() {
  return KernelSpec{KernelFamily::SobolevSpline, 1.0, 0.25};
}

namespace {

void check_point(const KernelSpec& spec, const Eigen::Ref<const Vector>& x) {
  if (!x.allFinite()) throw InvalidValue("point has non-finite entries");
  switch (spec.family) {
    case KernelFamily::SobolevSpline:
      if (x.size() != 1 || x(0) < 0.0 || x(0) > 1.0)
        throw DomainError("sobolev_spline points must be scalars in [0,1]");
      break;
    case KernelFamily::Linear:
      if (x.squaredNorm() > spec.kappa_sq * (1.0 + 1e-9))
        throw DomainError("point norm exceeds declared kappa_sq bound");
      break;
    case KernelFamily::Gaussian:
      break;
  }
}

}  // namespace

void validate_dataset(const KernelSpec& spec, const DataSet& data) {
  if (data.n() < 1) throw InvalidInput("dataset must have at least one point");
  if (data.labels.size() != data.n())
    throw ShapeMismatch("labels length does not match point count");
  if (!data.labels.allFinite()) throw InvalidValue("labels have non-finite entries");
  for (Index i = 0; i < data.n(); ++i)
    check_point(spec, data.points.row(i).transpose());
}

double eval_kernel(const KernelSpec& spec,
                   const Eigen::Ref<const Vector>& x,
                   const Eigen::Ref<const Vector>& x2) {
  if (x.size() != x2.size()) throw ShapeMismatch("point dimensions differ");
  check_point(spec, x);
  check_point(spec, x2);
  switch (spec.family) {
    case KernelFamily::Linear:
      return x.dot(x2);
    case KernelFamily::Gaussian: {
      const double d2 = (x - x2).squaredNorm();
      return std::exp(-d2 / (2.0 * spec.bandwidth * spec.bandwidth));
    }
    case KernelFamily::SobolevSpline: {
      const double a = std::min(x(0), x2(0));
      const double b = std::max(x(0), x2(0));
      return (1.0 - b) * a;
    }
  }
  throw InvalidInput("unknown kernel family");
}

Matrix gram(const KernelSpec& spec, const DataSet& data) {
  validate_dataset(spec, data);
  const Index n = data.n();
  Matrix K(n, n);
  if (spec.family == KernelFamily::Linear) {
    K.noalias() = data.points * data.points.transpose();
  } else {
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j <= i; ++j)
        K(i, j) = K(j, i) =
            eval_kernel(spec, data.points.row(i).transpose(), data.points.row(j).transpose());
  }
  // Force bit-exact symmetry against rounding in the blocked products.
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < i; ++j) K(i, j) = K(j, i);
  return K;
}

Matrix cross_gram(const KernelSpec& spec, const DataSet& train,
                  const Matrix& test_points) {
  validate_dataset(spec, train);
  if (test_points.cols() != train.dim())
    throw ShapeMismatch("test point dimension does not match training data");
  const Index t = test_points.rows();
  const Index n = train.n();
  Matrix C(t, n);
  for (Index a = 0; a < t; ++a)
    for (Index i = 0; i < n; ++i)
      C(a, i) = eval_kernel(spec, test_points.row(a).transpose(),
                            train.points.row(i).transpose());
  return C;
}

}  // namespace sketchreg
