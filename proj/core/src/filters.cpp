#include "sketchreg/filters.hpp"

#include <cmath>

#include "sketchreg/errors.hpp"

namespace sketchreg {

FilterSpec FilterSpec::iterated_ridge(int tau) {
  if (tau < 1) throw InvalidInput("iterated_ridge requires tau >= 1");
  return FilterSpec{FilterFamily::IteratedRidge, static_cast<double>(tau),
                    static_cast<double>(tau), 1.0};
}

FilterSpec FilterSpec::spectral_cutoff(double tau) {
  if (tau <= 0) throw InvalidInput("spectral_cutoff requires tau > 0");
  return FilterSpec{FilterFamily::SpectralCutoff, tau, 2.0, std::pow(2.0, tau)};
}

namespace {

void check_args(double u, double lambda) {
  if (lambda <= 0) throw InvalidRegularization("lambda must be positive");
  if (u < 0) throw InvalidInput("spectrum values must be nonnegative");
}

}  // namespace

double filter_value(const FilterSpec& f, double u, double lambda) {
  check_args(u, lambda);
  if (f.family == FilterFamily::SpectralCutoff)
    return u >= lambda ? 1.0 / u : 0.0;
  // Series form of the iterated ridge filter; finite at u = 0.
  const int tau = static_cast<int>(f.tau);
  double term = 1.0 / (lambda + u);
  const double ratio = lambda / (lambda + u);
  double sum = term;
  for (int i = 1; i < tau; ++i) {
    term *= ratio;
    sum += term;
  }
  return sum;
}

double residual_value(const FilterSpec& f, double u, double lambda) {
  check_args(u, lambda);
  if (f.family == FilterFamily::SpectralCutoff) return u >= lambda ? 0.0 : 1.0;
  const double q = lambda / (lambda + u);
  return std::pow(q, f.tau);
}

Vector apply_filter(const FilterSpec& f, const Vector& sigma, double lambda) {
  Vector out(sigma.size());
  for (Index i = 0; i < sigma.size(); ++i)
    out(i) = filter_value(f, sigma(i), lambda);
  return out;
}

Vector residual(const FilterSpec& f, const Vector& sigma, double lambda) {
  Vector out(sigma.size());
  for (Index i = 0; i < sigma.size(); ++i)
    out(i) = residual_value(f, sigma(i), lambda);
  return out;
}

QualificationReport qualification_check(const FilterSpec& f, double kappa_sq,
                                        const std::vector<double>& lambda_grid,
                                        int u_grid_size) {
  if (lambda_grid.empty() || u_grid_size < 1)
    throw InvalidGrid("qualification check needs nonempty grids");
  for (double l : lambda_grid)
    if (l <= 0 || l > 1) throw InvalidGrid("lambda grid must lie in (0, 1]");

  const double alphas[5] = {0.0, f.tau / 4.0, f.tau / 2.0, 3.0 * f.tau / 4.0, f.tau};
  QualificationReport rep;
  for (double lambda : lambda_grid) {
    for (int k = 1; k <= u_grid_size; ++k) {
      const double u = kappa_sq * static_cast<double>(k) / u_grid_size;
      const double g = filter_value(f, u, lambda);
      const double r = residual_value(f, u, lambda);
      rep.E_hat = std::max(rep.E_hat, std::abs(g * (u + lambda)));
      for (double a : alphas)
        rep.F_hat = std::max(rep.F_hat, std::abs(r) * std::pow((u + lambda) / lambda, a));
    }
  }
  rep.pass = rep.E_hat <= f.declared_E * (1.0 + 1e-9) &&
             rep.F_hat <= f.declared_F * (1.0 + 1e-9);
  return rep;
}

}  // namespace sketchreg
