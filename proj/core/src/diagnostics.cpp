#include "sketchreg/diagnostics.hpp"

#include <cmath>

#include "sketchreg/errors.hpp"
#include "sketchreg/linalg.hpp"

namespace sketchreg::diagnostics {

double effective_dim_from_spectrum(const Vector& eigenvalues, double lambda) {
  if (lambda <= 0) throw InvalidRegularization("lambda must be positive");
  double sum = 0.0;
  for (Index i = 0; i < eigenvalues.size(); ++i) {
    const double s = std::max(eigenvalues(i), 0.0);
    sum += s / (s + lambda);
  }
  return sum;
}

double empirical_effective_dim(const Matrix& K_bar, double lambda) {
  if (lambda <= 0) throw InvalidRegularization("lambda must be positive");
  linalg::EigenDecomp ed = linalg::sym_eig(K_bar);
  return effective_dim_from_spectrum(ed.eigenvalues, lambda);
}

double projection_error_empirical(const Matrix& K_bar, const SketchOperator& G,
                                  double tol) {
  if (G.cols() != K_bar.rows()) throw ShapeMismatch("sketch column count mismatch");
  const Matrix A = G.apply(K_bar);                    // m x n
  Matrix M = G.apply(Matrix(A.transpose())).transpose();      // G Kbar G^T
  M = 0.5 * (M + M.transpose().eval());
  linalg::Whitening wh = linalg::whitening_transform(M, tol);
  Matrix resid = K_bar;
  if (wh.rank > 0) {
    Matrix AW = A.transpose() * wh.W;                 // n x r
    resid.noalias() -= AW * AW.transpose();           // Kbar G^T M^+ G Kbar
  }
  resid = 0.5 * (resid + resid.transpose().eval());
  return std::max(linalg::spectral_norm(resid), 0.0);
}

namespace {

// Orthonormal basis of the span of X^T G^T in R^d.
Matrix sketch_subspace_basis(const Matrix& X, const SketchOperator& G, double tol) {
  const Matrix Z = G.apply(X).transpose();            // d x m
  Matrix M = Z.transpose() * Z;
  M = 0.5 * (M + M.transpose().eval());
  linalg::Whitening wh = linalg::whitening_transform(M, tol);
  return Z * wh.W;                                    // d x r, orthonormal
}

}  // namespace

double projection_error_features(const Matrix& X, const SketchOperator& G,
                                 double tol) {
  if (G.cols() != X.rows()) throw ShapeMismatch("sketch column count mismatch");
  const Index n = X.rows();
  Matrix T = X.transpose() * X / static_cast<double>(n);
  T = 0.5 * (T + T.transpose().eval());
  Matrix Q = sketch_subspace_basis(X, G, tol);
  // || T^{1/2} (I - P) T^{1/2} || = || T - T^{1/2} P T^{1/2} || computed via
  // the square root of T.
  Matrix root = linalg::sym_power(T, 0.5);
  Matrix RQ = root * Q;
  Matrix resid = T - RQ * RQ.transpose();
  resid = 0.5 * (resid + resid.transpose().eval());
  return std::max(linalg::spectral_norm(resid), 0.0);
}

double projection_error_population(const SynthModel& model, const Matrix& X,
                                   const SketchOperator& G, double tol) {
  if (model.d > 100000) throw UnsupportedSize("model dimension too large");
  if (X.cols() != model.d) throw ShapeMismatch("design matrix dimension mismatch");
  Matrix Q = sketch_subspace_basis(X, G, tol);
  Vector root_sigma = model.sigma.cwiseSqrt();
  // T^{1/2} (I - P) T^{1/2} with diagonal T = diag(sigma).
  Matrix RQ = root_sigma.asDiagonal() * Q;
  Matrix resid = Matrix(root_sigma.cwiseAbs2().asDiagonal()) - RQ * RQ.transpose();
  resid = 0.5 * (resid + resid.transpose().eval());
  return std::max(linalg::spectral_norm(resid), 0.0);
}

Lemma7Probe operator_inequality_probe(const Matrix& A, const Matrix& B,
                                      const Matrix& P_basis, double s, double t) {
  if (s < 0 || s > 0.5 || t < 0 || t > 0.5)
    throw InvalidInput("exponents must lie in [0, 1/2]");
  const Index d = A.rows();
  if (B.rows() != d || P_basis.rows() != d)
    throw ShapeMismatch("operand dimensions disagree");
  Matrix ortho = P_basis.transpose() * P_basis;
  if ((ortho - Matrix::Identity(ortho.rows(), ortho.cols())).cwiseAbs().maxCoeff() > 1e-8)
    throw InvalidProjection("projection basis is not orthonormal");

  const Matrix P = P_basis * P_basis.transpose();
  const Matrix IP = Matrix::Identity(d, d) - P;
  const Matrix As = linalg::sym_power(A, s);
  const Matrix At = linalg::sym_power(A, t);
  const Matrix Bh = linalg::sym_power(B, 0.5);

  Lemma7Probe probe;
  {
    // ||M|| for possibly nonsymmetric M via the top singular value.
    const Matrix M = As * IP * At;
    probe.lhs = std::sqrt(std::max(
        linalg::spectral_norm(0.5 * ((M.transpose() * M) +
                                     (M.transpose() * M).transpose().eval())),
        0.0));
  }
  const double diff = linalg::spectral_norm(0.5 * ((A - B) + (A - B).transpose().eval()));
  Matrix mid = Bh * IP * Bh;
  mid = 0.5 * (mid + mid.transpose().eval());
  const double proj = std::max(linalg::spectral_norm(mid), 0.0);
  probe.rhs = std::pow(diff, s + t) + std::pow(proj, s + t);
  probe.holds = probe.lhs <= probe.rhs * (1.0 + 1e-8);
  return probe;
}

}  // namespace sketchreg::diagnostics
