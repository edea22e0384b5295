#pragma once

#include "sketchreg/sketch.hpp"
#include "sketchreg/synth.hpp"
#include "sketchreg/types.hpp"

namespace sketchreg::diagnostics {

// tr( Kbar (Kbar + lambda I)^{-1} ), computed from the spectrum of the
// normalized Gram.
double empirical_effective_dim(const Matrix& K_bar, double lambda);

// Same quantity from a precomputed eigenvalue vector; the nonzero spectrum of
// the d x d empirical covariance matches the Gram spectrum, so either source
// works.
double effective_dim_from_spectrum(const Vector& eigenvalues, double lambda);

// || (I - P) T_x^{1/2} ||^2 for the sketch subspace, computed in kernel
// coordinates as || Kbar - Kbar G^T (G Kbar G^T)^+ G Kbar ||.
double projection_error_empirical(const Matrix& K_bar, const SketchOperator& G,
                                  double tol = 1e-10);

// Same quantity for a linear kernel with design matrix X (n x d), computed in
// feature space from the d x d empirical covariance; cheap when d << n.
double projection_error_features(const Matrix& X, const SketchOperator& G,
                                 double tol = 1e-10);

// Population projection error ||T^{1/2} (I - P) T^{1/2}|| for the synthetic
// model, with P the projection onto the column span of X^T G^T in R^d.
double projection_error_population(const SynthModel& model, const Matrix& X,
                                   const SketchOperator& G, double tol = 1e-10);

struct Lemma7Probe {
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = false;
};

// Checks ||A^s (I-P) A^t|| <= ||A - B||^{s+t} + ||B^{1/2} (I-P) B^{1/2}||^{s+t}
// for PSD A, B and the projection onto the span of the orthonormal columns of
// P_basis.
Lemma7Probe operator_inequality_probe(const Matrix& A, const Matrix& B,
                                      const Matrix& P_basis, double s, double t);

}  // namespace sketchreg::diagnostics
