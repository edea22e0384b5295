#pragma once

#include "sketchreg/types.hpp"

namespace sketchreg::linalg {

// Eigendecomposition of a symmetric matrix, eigenvalues sorted descending,
// eigenvectors orthonormal columns in matching order.
struct EigenDecomp {
  Vector eigenvalues;
  Matrix eigenvectors;
};

// Throws InvalidMatrix on non-finite or asymmetric input, NumericalFailure if
// the solver does not converge.
EigenDecomp sym_eig(const Matrix& A);

struct Whitening {
  Matrix W;   // dim x rank, W^T M W = I_rank
  int rank = 0;
};

// Whitening transform of a PSD matrix M: columns of W span the range of M
// restricted to eigenvalues > tol * lambda_max. Throws NotPSD if M has an
// eigenvalue below -tol * lambda_max.
Whitening whitening_transform(const Matrix& M, double tol = 1e-10);

// max |eigenvalue| of a symmetric matrix.
double spectral_norm(const Matrix& A);

// A^p for symmetric PSD A via spectral calculus. Eigenvalues clamped at zero
// before the power is taken.
Matrix sym_power(const Matrix& A, double p);

}  // namespace sketchreg::linalg
