#include "sketchreg/linalg.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

#include "sketchreg/errors.hpp"

namespace sketchreg::linalg {

namespace {

void check_symmetric(const Matrix& A) {
  if (A.rows() != A.cols())
    throw InvalidMatrix("matrix is not square");
  if (!A.allFinite())
    throw InvalidMatrix("matrix has non-finite entries");
  const double scale = A.cwiseAbs().maxCoeff();
  const double asym = (A - A.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-12 * std::max(scale, 1.0))
    throw InvalidMatrix("matrix is not symmetric");
}

}  // namespace

EigenDecomp sym_eig(const Matrix& A) {
  check_symmetric(A);
  Eigen::SelfAdjointEigenSolver<Matrix> es;
  es.compute(A);
  if (es.info() != Eigen::Success)
    throw NumericalFailure("symmetric eigensolver did not converge");
  // Eigen returns ascending order; flip to descending.
  const Index n = A.rows();
  EigenDecomp d;
  d.eigenvalues = es.eigenvalues().reverse();
  d.eigenvectors.resize(n, n);
  for (Index j = 0; j < n; ++j)
    d.eigenvectors.col(j) = es.eigenvectors().col(n - 1 - j);
  return d;
}

Whitening whitening_transform(const Matrix& M, double tol) {
  if (tol < 0)
    throw InvalidInput("whitening tolerance must be nonnegative");
  EigenDecomp d = sym_eig(M);
  const Index n = M.rows();
  const double lmax = n > 0 ? std::max(d.eigenvalues(0), 0.0) : 0.0;
  const double lmin = n > 0 ? d.eigenvalues(n - 1) : 0.0;
  if (lmin < -std::max(tol, 1e-12) * std::max(lmax, 1.0))
    throw NotPSD("matrix has a significantly negative eigenvalue");
  const double cut = tol * lmax;
  int rank = 0;
  while (rank < n && d.eigenvalues(rank) > cut) ++rank;
  Whitening w;
  w.rank = rank;
  w.W.resize(n, rank);
  for (int j = 0; j < rank; ++j)
    w.W.col(j) = d.eigenvectors.col(j) / std::sqrt(d.eigenvalues(j));
  return w;
}

double spectral_norm(const Matrix& A) {
  if (A.rows() == 0) return 0.0;
  EigenDecomp d = sym_eig(A);
  const Index n = A.rows();
  return std::max(std::abs(d.eigenvalues(0)), std::abs(d.eigenvalues(n - 1)));
}

Matrix sym_power(const Matrix& A, double p) {
  EigenDecomp d = sym_eig(A);
  Vector pow = d.eigenvalues;
  for (Index i = 0; i < pow.size(); ++i) {
    const double v = std::max(pow(i), 0.0);
    pow(i) = (v == 0.0 && p <= 0.0) ? 0.0 : std::pow(v, p);
  }
  return d.eigenvectors * pow.asDiagonal() * d.eigenvectors.transpose();
}

}  // namespace sketchreg::linalg
