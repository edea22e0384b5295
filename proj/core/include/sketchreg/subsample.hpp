#pragma once

#include <cstdint>

#include "sketchreg/sketch.hpp"
#include "sketchreg/types.hpp"

namespace sketchreg {

// Ridge leverage scores l_i(lambda) = (Kbar (Kbar + lambda I)^{-1})_{ii} of the
// normalized Gram, plus the multiplicative approximation factor when the
// scores are approximate (1 for exact; negative when unverified).
struct LeverageScores {
  double lambda = 0.0;
  Vector scores;
  double als_factor = 1.0;

  bool verified() const { return als_factor >= 1.0; }
};

LeverageScores leverage_scores_exact(const Matrix& K_bar, double lambda);

// Two-pass approximation: m0 uniform columns form a Nystrom surrogate of
// Kbar, whose exact ridge leverage scores are computed through an m0 x m0
// system. When n <= 4096 the empirical factor against the exact scores is
// reported; otherwise als_factor is recorded as unverified (-1).
LeverageScores leverage_scores_approx(const Matrix& K_bar, double lambda,
                                      Index m0, std::uint64_t seed);

// Exact ridge leverage scores for the linear kernel on design matrix X,
// through the d x d system: l_i = (1/n) x_i^T (T_x + lambda I)^{-1} x_i.
// Equals leverage_scores_exact on gram(X)/n.
LeverageScores leverage_scores_linear(const Matrix& X, double lambda);

// Two-pass approximate scores for the linear kernel; same scheme as
// leverage_scores_approx but builds only the m0 Gram columns it needs.
// als_factor is left unverified (-1).
LeverageScores leverage_scores_approx_linear(const Matrix& X, double lambda,
                                             Index m0, std::uint64_t seed);

// Plain Nystrom subsampling: m indices uniform without replacement, unit
// weights.
SketchOperator nystrom_uniform(Index n, Index m, std::uint64_t seed);

// ALS Nystrom subsampling: m indices i.i.d. with probability q_i proportional
// to the scores, row i carried with weight 1/sqrt(m q_i).
SketchOperator nystrom_als(const LeverageScores& scores, Index m, std::uint64_t seed);

}  // namespace sketchreg
