#include "sketchreg/synth.hpp"

#include <cmath>
#include <random>

#include "sketchreg/errors.hpp"
#include "sketchreg/rng.hpp"

namespace sketchreg {

namespace {

double kahan_sum(const Vector& v) {
  double sum = 0.0, comp = 0.0;
  for (Index i = 0; i < v.size(); ++i) {
    const double y = v(i) - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
  return sum;
}

}  // namespace

SynthModel make_model(double gamma, double zeta, Index d, double R,
                      double noise_sigma, double eps, std::uint64_t seed) {
  if (gamma <= 0 || gamma > 1) throw InvalidModel("gamma must be in (0, 1]");
  if (zeta < 0) throw InvalidModel("zeta must be nonnegative");
  if (d < 8) throw InvalidModel("truncation dimension must be >= 8");
  if (R <= 0) throw InvalidModel("R must be positive");
  if (noise_sigma < 0) throw InvalidModel("noise_sigma must be nonnegative");
  if (eps <= 0) throw InvalidModel("eps must be positive");

  SynthModel m;
  m.d = d;
  m.gamma = gamma;
  m.zeta = zeta;
  m.R = R;
  m.noise_sigma = noise_sigma;
  m.eps = eps;

  m.sigma.resize(d);
  for (Index i = 0; i < d; ++i)
    m.sigma(i) = std::pow(static_cast<double>(i + 1), -1.0 / gamma);
  m.kappa_sq = kahan_sum(m.sigma);

  // Eigen-coefficients of the target at the source-condition boundary:
  // c_i = R' sigma_i^zeta i^{-1/2-eps}, with R' fixing the certificate
  // sum (c_i sigma_i^{-zeta})^2 = R^2 exactly.
  Vector shape(d);
  for (Index i = 0; i < d; ++i)
    shape(i) = std::pow(static_cast<double>(i + 1), -0.5 - eps);
  const double norm_g0 = std::sqrt(kahan_sum(shape.cwiseAbs2()));
  const double scale = R / norm_g0;

  auto rng = make_rng(seed);
  m.w_true.resize(d);
  for (Index i = 0; i < d; ++i) {
    const double sign = (rng() & 1u) ? 1.0 : -1.0;
    const double c = sign * scale * std::pow(m.sigma(i), zeta) * shape(i);
    m.w_true(i) = c / std::sqrt(m.sigma(i));
  }
  return m;
}

DataSet sample(const SynthModel& model, Index n, std::uint64_t seed) {
  if (n < 1) throw InvalidInput("sample size must be >= 1");
  DataSet data;
  data.points.resize(n, model.d);
  data.labels.resize(n);
  Vector root_sigma = model.sigma.cwiseSqrt();
  auto rng = make_rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < model.d; ++j) {
      const double z = (rng() & 1u) ? 1.0 : -1.0;
      data.points(i, j) = root_sigma(j) * z;
    }
    double y = model.f_truth(data.points.row(i).transpose());
    if (model.noise_sigma > 0) y += model.noise_sigma * normal(rng);
    data.labels(i) = y;
  }
  return data;
}

double error_norm(const SynthModel& model, const Vector& w_hat, const NormSpec& spec) {
  if (spec.a < 0 || spec.a > 0.5 || spec.a > model.zeta)
    throw InvalidNormSpec("norm exponent a must satisfy 0 <= a <= min(1/2, zeta)");
  if (w_hat.size() != model.d) throw ShapeMismatch("weight vector length mismatch");
  Vector terms(model.d);
  for (Index i = 0; i < model.d; ++i) {
    const double diff = w_hat(i) - model.w_true(i);
    terms(i) = std::pow(model.sigma(i), 1.0 - 2.0 * spec.a) * diff * diff;
  }
  return std::sqrt(kahan_sum(terms));
}

double excess_risk_mc(const SynthModel& model,
                      const std::function<double(const Vector&)>& predictor,
                      Index n_mc, std::uint64_t seed) {
  if (n_mc < 1) throw InvalidInput("n_mc must be >= 1");
  Vector root_sigma = model.sigma.cwiseSqrt();
  auto rng = make_rng(seed);
  double acc = 0.0, comp = 0.0;
  Vector x(model.d);
  for (Index t = 0; t < n_mc; ++t) {
    for (Index j = 0; j < model.d; ++j)
      x(j) = root_sigma(j) * ((rng() & 1u) ? 1.0 : -1.0);
    const double diff = predictor(x) - model.f_truth(x);
    const double y = diff * diff - comp;
    const double s = acc + y;
    comp = (s - acc) - y;
    acc = s;
  }
  return acc / static_cast<double>(n_mc);
}

double population_effective_dim(const SynthModel& model, double lambda) {
  if (lambda <= 0) throw InvalidRegularization("lambda must be positive");
  Vector terms(model.d);
  for (Index i = 0; i < model.d; ++i)
    terms(i) = model.sigma(i) / (model.sigma(i) + lambda);
  return kahan_sum(terms);
}

}  // namespace sketchreg
