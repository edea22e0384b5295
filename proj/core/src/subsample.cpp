#include "sketchreg/subsample.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <Eigen/Cholesky>

#include "sketchreg/errors.hpp"
#include "sketchreg/linalg.hpp"
#include "sketchreg/rng.hpp"

namespace sketchreg {

LeverageScores leverage_scores_exact(const Matrix& K_bar, double lambda) {
  if (lambda <= 0) throw InvalidRegularization("lambda must be positive");
  if (K_bar.rows() != K_bar.cols()) throw ShapeMismatch("Gram matrix must be square");
  const Index n = K_bar.rows();
  Matrix reg = K_bar;
  reg.diagonal().array() += lambda;
  Eigen::LDLT<Matrix> ldlt(reg);
  if (ldlt.info() != Eigen::Success)
    throw NumericalFailure("factorization of Kbar + lambda I failed");
  // Scores are diag(Kbar (Kbar + lambda I)^{-1}); the solve keeps symmetry.
  Matrix sol = ldlt.solve(K_bar);
  LeverageScores out;
  out.lambda = lambda;
  out.als_factor = 1.0;
  out.scores.resize(n);
  for (Index i = 0; i < n; ++i)
    out.scores(i) = std::clamp(sol(i, i), 0.0, 1.0);
  return out;
}

LeverageScores leverage_scores_approx(const Matrix& K_bar, double lambda,
                                      Index m0, std::uint64_t seed) {
  if (lambda <= 0) throw InvalidRegularization("lambda must be positive");
  const Index n = K_bar.rows();
  if (m0 < 1 || m0 > n) throw InvalidDimension("m0 must be in [1, n]");

  SketchOperator sel = nystrom_uniform(n, m0, seed);
  const auto& J = sel.selection_indices();

  Matrix C(n, m0);
  Matrix W(m0, m0);
  for (Index j = 0; j < m0; ++j) {
    C.col(j) = K_bar.col(J[j]);
    for (Index i = 0; i < m0; ++i) W(i, j) = K_bar(J[i], J[j]);
  }
  W = 0.5 * (W + W.transpose().eval());

  // Nystrom surrogate Ktilde = C W^+ C^T = Phi Phi^T with Phi = C * whiten(W).
  linalg::Whitening wh = linalg::whitening_transform(W, 1e-10);
  Matrix Phi = C * wh.W;  // n x r
  const Index r = Phi.cols();

  LeverageScores out;
  out.lambda = lambda;
  out.scores = Vector::Zero(n);
  if (r > 0) {
    Matrix S = Phi.transpose() * Phi;
    S.diagonal().array() += lambda;
    Eigen::LLT<Matrix> llt(S);
    if (llt.info() != Eigen::Success)
      throw NumericalFailure("factorization in approximate leverage scores failed");
    Matrix B = llt.solve(Phi.transpose());  // r x n
    for (Index i = 0; i < n; ++i)
      out.scores(i) = std::clamp(Phi.row(i).dot(B.col(i)), 0.0, 1.0);
  }

  if (n <= 4096) {
    LeverageScores exact = leverage_scores_exact(K_bar, lambda);
    double factor = 1.0;
    for (Index i = 0; i < n; ++i) {
      const double li = exact.scores(i);
      const double lh = out.scores(i);
      if (li <= 1e-14 && lh <= 1e-14) continue;
      if (li <= 0.0 || lh <= 0.0) {
        factor = std::numeric_limits<double>::infinity();
        break;
      }
      factor = std::max({factor, li / lh, lh / li});
    }
    out.als_factor = factor;
  } else {
    out.als_factor = -1.0;  // unverified
  }
  return out;
}

LeverageScores leverage_scores_linear(const Matrix& X, double lambda) {
  if (lambda <= 0) throw InvalidRegularization("lambda must be positive");
  const Index n = X.rows();
  Matrix T = X.transpose() * X / static_cast<double>(n);
  T = 0.5 * (T + T.transpose().eval());
  T.diagonal().array() += lambda;
  Eigen::LLT<Matrix> llt(T);
  if (llt.info() != Eigen::Success)
    throw NumericalFailure("Cholesky of T + lambda I failed");
  Matrix sol = llt.solve(X.transpose());  // d x n
  LeverageScores out;
  out.lambda = lambda;
  out.als_factor = 1.0;
  out.scores.resize(n);
  for (Index i = 0; i < n; ++i)
    out.scores(i) =
        std::clamp(X.row(i).dot(sol.col(i)) / static_cast<double>(n), 0.0, 1.0);
  return out;
}

LeverageScores leverage_scores_approx_linear(const Matrix& X, double lambda,
                                             Index m0, std::uint64_t seed) {
  if (lambda <= 0) throw InvalidRegularization("lambda must be positive");
  const Index n = X.rows();
  if (m0 < 1 || m0 > n) throw InvalidDimension("m0 must be in [1, n]");

  SketchOperator sel = nystrom_uniform(n, m0, seed);
  const auto& J = sel.selection_indices();
  Matrix XJ(m0, X.cols());
  for (Index j = 0; j < m0; ++j) XJ.row(j) = X.row(J[j]);

  const double inv_n = 1.0 / static_cast<double>(n);
  Matrix C = (X * XJ.transpose()) * inv_n;  // n x m0 Gram columns
  Matrix W = (XJ * XJ.transpose()) * inv_n;
  W = 0.5 * (W + W.transpose().eval());

  linalg::Whitening wh = linalg::whitening_transform(W, 1e-10);
  Matrix Phi = C * wh.W;
  const Index r = Phi.cols();

  LeverageScores out;
  out.lambda = lambda;
  out.als_factor = -1.0;
  out.scores = Vector::Zero(n);
  if (r > 0) {
    Matrix S = Phi.transpose() * Phi;
    S.diagonal().array() += lambda;
    Eigen::LLT<Matrix> llt(S);
    if (llt.info() != Eigen::Success)
      throw NumericalFailure("factorization in approximate leverage scores failed");
    Matrix B = llt.solve(Phi.transpose());
    for (Index i = 0; i < n; ++i)
      out.scores(i) = std::clamp(Phi.row(i).dot(B.col(i)), 0.0, 1.0);
  }
  return out;
}

SketchOperator nystrom_uniform(Index n, Index m, std::uint64_t seed) {
  if (m < 1 || m > n) throw InvalidDimension("m must be in [1, n]");
  return SketchOperator::make(SketchKind::RowSelection, m, n, seed);
}

SketchOperator nystrom_als(const LeverageScores& scores, Index m, std::uint64_t seed) {
  if (m < 1) throw InvalidDimension("m must be >= 1");
  const Index n = scores.scores.size();
  const double total = scores.scores.sum();
  if (!(total > 0)) throw DegenerateScores("all leverage scores are zero");

  std::vector<double> q(n);
  for (Index i = 0; i < n; ++i) q[i] = scores.scores(i) / total;

  auto rng = make_rng(seed);
  std::discrete_distribution<Index> draw(q.begin(), q.end());
  std::vector<Index> idx(m);
  std::vector<double> w(m);
  for (Index j = 0; j < m; ++j) {
    const Index i = draw(rng);
    idx[j] = i;
    w[j] = 1.0 / std::sqrt(static_cast<double>(m) * q[i]);
  }
  return SketchOperator::row_selection(n, std::move(idx), std::move(w));
}

}  // namespace sketchreg
