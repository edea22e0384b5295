#include "sketchreg/estimator.hpp"

#include <cmath>

#include <Eigen/Cholesky>

#include "sketchreg/errors.hpp"
#include "sketchreg/linalg.hpp"
#include "sketchreg/rng.hpp"

namespace sketchreg {

namespace {

void check_lambda(double lambda, Index n, bool allow_outside) {
  if (lambda <= 0) throw InvalidRegularization("lambda must be positive");
  if (!allow_outside && (lambda < 1.0 / static_cast<double>(n) || lambda > 1.0))
    throw InvalidRegularization(
        "lambda outside [1/n, 1]; set allow_lambda_outside to override");
}

// Spectral application of the filter to a reduced symmetric PSD matrix H:
// returns V g(Lambda) V^T with eigenvalues clamped at zero.
Matrix filtered_operator(const Matrix& H, const FilterSpec& filter, double lambda) {
  linalg::EigenDecomp ed = linalg::sym_eig(H);
  Vector sig = ed.eigenvalues.cwiseMax(0.0);
  Vector g = apply_filter(filter, sig, lambda);
  return ed.eigenvectors * g.asDiagonal() * ed.eigenvectors.transpose();
}

}  // namespace

FitResult fit(const Matrix& K, const Vector& y, const SketchOperator& G,
              const RegConfig& cfg) {
  const Index n = K.rows();
  if (K.cols() != n) throw ShapeMismatch("Gram matrix must be square");
  if (y.size() != n) throw ShapeMismatch("label vector length mismatch");
  if (G.cols() != n) throw ShapeMismatch("sketch column count mismatch");
  if (!K.allFinite() || !y.allFinite()) throw InvalidInput("non-finite input");
  check_lambda(cfg.lambda, n, cfg.allow_lambda_outside);

  const Matrix K_bar = K / static_cast<double>(n);
  const Matrix A = G.apply(K_bar);                       // m x n
  Matrix M = G.apply(Matrix(A.transpose())).transpose();         // G Kbar G^T
  M = 0.5 * (M + M.transpose().eval());

  FitResult out;
  out.sketch = &G;
  out.lambda = cfg.lambda;
  out.filter = cfg.filter;

  linalg::Whitening wh = linalg::whitening_transform(M, cfg.whitening_tol);
  out.rank = wh.rank;
  if (wh.rank == 0) {
    out.beta = Vector::Zero(G.rows());
    out.train_pred = Vector::Zero(n);
    return out;
  }

  // Reduced operator representing the projected empirical covariance in an
  // orthonormal basis of the sketch subspace.
  Matrix AW = A.transpose() * wh.W;                      // n x r
  Matrix H = AW.transpose() * AW;                        // W^T A A^T W
  H = 0.5 * (H + H.transpose().eval());
  Matrix filt = filtered_operator(H, cfg.filter, cfg.lambda);

  Vector rhs = wh.W.transpose() * (A * y) / static_cast<double>(n);
  out.beta = wh.W * (filt * rhs);
  out.train_pred = K * G.apply_transpose(out.beta);
  return out;
}

Vector predict(const FitResult& fit, const Matrix& cross) {
  if (fit.sketch == nullptr) throw InvalidInput("fit has no sketch");
  if (cross.cols() != fit.sketch->cols())
    throw ShapeMismatch("kernel rows must have n columns");
  Vector lifted = fit.sketch->apply_transpose(fit.beta);  // G^T beta, length n
  return cross * lifted;
}

Vector extract_primal_weights(const FitResult& fit, const Matrix& X) {
  if (fit.sketch == nullptr) throw InvalidInput("fit has no sketch");
  if (X.rows() != fit.sketch->cols())
    throw ShapeMismatch("design matrix row count mismatch");
  Vector lifted = fit.sketch->apply_transpose(fit.beta);
  Vector w = X.transpose() * lifted;

  // The weights are only meaningful if the fit's Gram matrix was X X^T: in
  // that case X w reproduces the recorded training predictions exactly.
  if (fit.train_pred.size() == X.rows()) {
    const Vector via_linear = X * w;
    const double scale =
        std::max({fit.train_pred.cwiseAbs().maxCoeff(), via_linear.cwiseAbs().maxCoeff(), 1.0});
    if ((via_linear - fit.train_pred).cwiseAbs().maxCoeff() > 1e-8 * scale)
      throw UnsupportedKernel(
          "primal weights require a fit produced with the linear kernel on X");
  }
  return w;
}

Vector fit_linear(const Matrix& X, const Vector& y, const SketchOperator& G,
                  const RegConfig& cfg) {
  const Index n = X.rows();
  const Index d = X.cols();
  if (y.size() != n) throw ShapeMismatch("label vector length mismatch");
  if (G.cols() != n) throw ShapeMismatch("sketch column count mismatch");
  check_lambda(cfg.lambda, n, cfg.allow_lambda_outside);

  const Vector b = X.transpose() * y / static_cast<double>(n);  // S_x^* ybar

  if (G.kind() == SketchKind::Identity) {
    // No projection: identity sketch spans the whole empirical range.
    Matrix T = X.transpose() * X / static_cast<double>(n);
    T = 0.5 * (T + T.transpose().eval());
    if (cfg.filter.family == FilterFamily::IteratedRidge) {
      Matrix reg = T;
      reg.diagonal().array() += cfg.lambda;
      Eigen::LLT<Matrix> llt(reg);
      if (llt.info() != Eigen::Success)
        throw NumericalFailure("Cholesky of T + lambda I failed");
      Vector w = Vector::Zero(d);
      const int tau = static_cast<int>(cfg.filter.tau);
      for (int i = 0; i < tau; ++i) w = llt.solve(b + cfg.lambda * w);
      return w;
    }
    return filtered_operator(T, cfg.filter, cfg.lambda) * b;
  }

  // Orthonormalize the sketched basis X^T G^T and reduce.
  Matrix Z = G.apply(X).transpose();                 // d x m
  Matrix M = Z.transpose() * Z / static_cast<double>(n);
  M = 0.5 * (M + M.transpose().eval());
  linalg::Whitening wh = linalg::whitening_transform(M, cfg.whitening_tol);
  if (wh.rank == 0) return Vector::Zero(d);
  Matrix Q = Z * wh.W / std::sqrt(static_cast<double>(n));  // d x r, orthonormal
  Matrix XQ = X * Q;                                 // n x r
  Matrix H = XQ.transpose() * XQ / static_cast<double>(n);
  H = 0.5 * (H + H.transpose().eval());
  Matrix filt = filtered_operator(H, cfg.filter, cfg.lambda);
  return Q * (filt * (Q.transpose() * b));
}

}  // namespace sketchreg
