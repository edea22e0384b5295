#pragma once

#include <vector>

#include "sketchreg/types.hpp"

namespace sketchreg {

enum class FilterFamily { IteratedRidge, SpectralCutoff };

// Spectral filter g_lambda with its qualification tau and the constants
// (E, F) it claims to satisfy. iterated_ridge declares E = tau, F = 1;
// spectral_cutoff declares E = 2, F = 2^tau.
struct FilterSpec {
  FilterFamily family = FilterFamily::IteratedRidge;
  double tau = 1.0;  // integer >= 1 for iterated_ridge, any positive for cutoff
  double declared_E = 1.0;
  double declared_F = 1.0;

  static FilterSpec iterated_ridge(int tau);
  static FilterSpec spectral_cutoff(double tau);
};

// Scalar filter value g_lambda(u). For iterated ridge this is the finite
// series sum_{i=1..tau} lambda^{i-1} (lambda+u)^{-i}, which stays finite at
// u = 0 (value tau/lambda); for the cutoff it is 1/u when u >= lambda, else 0.
double filter_value(const FilterSpec& f, double u, double lambda);

// Residual r_lambda(u) = 1 - g_lambda(u) u. For iterated ridge this equals
// q^tau with q = lambda / (lambda + u).
double residual_value(const FilterSpec& f, double u, double lambda);

Vector apply_filter(const FilterSpec& f, const Vector& sigma, double lambda);
Vector residual(const FilterSpec& f, const Vector& sigma, double lambda);

struct QualificationReport {
  double E_hat = 0.0;
  double F_hat = 0.0;
  bool pass = false;
};

// Grid check of the filter-function constants: E_hat is the max of
// |g_lambda(u)(u+lambda)| and F_hat the max of |r_lambda(u)| ((u+lambda)/lambda)^alpha
// over the supplied grids, with alpha on the 5-point grid {0, tau/4, tau/2,
// 3tau/4, tau}. pass holds when both stay within the declared constants.
QualificationReport qualification_check(const FilterSpec& f, double kappa_sq,
                                        const std::vector<double>& lambda_grid,
                                        int u_grid_size);

}  // namespace sketchreg
