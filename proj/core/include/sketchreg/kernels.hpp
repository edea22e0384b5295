#pragma once

#include "sketchreg/types.hpp"

namespace sketchreg {

enum class KernelFamily { Linear, Gaussian, SobolevSpline };

// Positive-definite kernel together with its sup-norm bound kappa^2.
// For gaussian the bound is 1, for the spline kernel on [0,1] it is 1/4;
// for linear, kappa_sq is a declared bound on the input domain and inputs
// are validated against it.
struct KernelSpec {
  KernelFamily family = KernelFamily::Gaussian;
  double bandwidth = 1.0;  // gaussian only
  double kappa_sq = 1.0;

  static KernelSpec linear(double kappa_sq);
  static KernelSpec gaussian(double bandwidth);
  static KernelSpec sobolev_spline();
};

struct DataSet {
  Matrix points;  // n x d (d = 1 for sobolev_spline)
  Vector labels;  // n

  Index n() const { return points.rows(); }
  Index dim() const { return points.cols(); }
};

void validate_dataset(const KernelSpec& spec, const DataSet& data);

double eval_kernel(const KernelSpec& spec,
                   const Eigen::Ref<const Vector>& x,
                   const Eigen::Ref<const Vector>& x2);

// Unnormalized Gram matrix; the abstract covariance-type operators correspond
// to gram(...)/n.
Matrix gram(const KernelSpec& spec, const DataSet& data);

// Kernel rows of test points against training points: entry (t, i) =
// K(test_t, x_i).
Matrix cross_gram(const KernelSpec& spec, const DataSet& train,
                  const Matrix& test_points);

}  // namespace sketchreg
