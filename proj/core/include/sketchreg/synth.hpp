#pragma once

#include <cstdint>
#include <functional>

#include "sketchreg/kernels.hpp"
#include "sketchreg/types.hpp"

namespace sketchreg {

// Synthetic linear-kernel world with exactly known covariance spectrum
// sigma_i = i^{-1/gamma}, target regularity zeta (Holder source condition with
// radius R), bounded inputs and Gaussian label noise. Inputs are
// x = (sqrt(sigma_1) z_1, ..., sqrt(sigma_d) z_d) with Rademacher z, so
// ||x||^2 equals kappa_sq = sum_i sigma_i for every sample.
struct SynthModel {
  Index d = 0;
  double gamma = 1.0;
  double zeta = 0.5;
  double R = 1.0;
  double noise_sigma = 0.0;
  double eps = 0.05;
  Vector sigma;    // covariance eigenvalues, strictly decreasing
  Vector w_true;   // target coefficients in H coordinates
  double kappa_sq = 0.0;

  double f_truth(const Eigen::Ref<const Vector>& x) const { return w_true.dot(x); }
};

// Weighted error norm selector: a = 0 gives the root excess risk, a = 1/2 the
// H-norm-equivalent end of the family.
struct NormSpec {
  double a = 0.0;
};

SynthModel make_model(double gamma, double zeta, Index d, double R,
                      double noise_sigma, double eps, std::uint64_t seed);

DataSet sample(const SynthModel& model, Index n, std::uint64_t seed);

// sqrt( sum_i sigma_i^{1-2a} (w_hat_i - w_true_i)^2 ), exact over the d
// retained eigendirections.
double error_norm(const SynthModel& model, const Vector& w_hat, const NormSpec& spec);

// Monte Carlo estimate of the excess risk of an arbitrary predictor.
double excess_risk_mc(const SynthModel& model,
                      const std::function<double(const Vector&)>& predictor,
                      Index n_mc, std::uint64_t seed);

// sum_i sigma_i / (sigma_i + lambda).
double population_effective_dim(const SynthModel& model, double lambda);

}  // namespace sketchreg
