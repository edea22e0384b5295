#pragma once

#include "sketchreg/filters.hpp"
#include "sketchreg/sketch.hpp"
#include "sketchreg/types.hpp"

namespace sketchreg {

struct RegConfig {
  double lambda = 0.1;
  FilterSpec filter;
  double whitening_tol = 1e-10;
  // The standing assumption is 1/n <= lambda <= 1; set this to bypass the
  // range check deliberately.
  bool allow_lambda_outside = false;
};

// Fitted coefficients in the sketched dual basis. Predictions at a point x
// with kernel row k_x against the training set are k_x^T G^T beta.
struct FitResult {
  Vector beta;            // length m
  Vector train_pred;      // predictions on the training Gram rows, length n
  const SketchOperator* sketch = nullptr;
  int rank = 0;           // effective rank of G Kbar G^T
  double lambda = 0.0;
  FilterSpec filter;
};

// Sketched spectral-filter regression on an unnormalized Gram matrix.
// With the identity sketch and the order-1 iterated ridge filter this reduces
// to classic kernel ridge regression k(x)^T (K + n lambda I)^{-1} y.
FitResult fit(const Matrix& K, const Vector& y, const SketchOperator& G,
              const RegConfig& cfg);

// cross has one row of kernel evaluations k(x)^T per test point.
Vector predict(const FitResult& fit, const Matrix& cross);

// Explicit weight vector for fits on a linear kernel with design matrix X
// (n x d): w such that <w, x> equals predict on every x.
Vector extract_primal_weights(const FitResult& fit, const Matrix& X);

// Direct evaluation of the same estimator in feature space for the linear
// kernel: the projection is onto the column span of X^T G^T and the filter is
// applied through a reduced eigendecomposition. Returns the weight vector.
// This is the fast path for synthetic linear models (d << n); it agrees with
// fit() on the corresponding Gram matrix.
Vector fit_linear(const Matrix& X, const Vector& y, const SketchOperator& G,
                  const RegConfig& cfg);

}  // namespace sketchreg
