#include <benchmark/benchmark.h>

#include "sketchreg/estimator.hpp"
#include "sketchreg/experiment.hpp"
#include "sketchreg/kernels.hpp"
#include "sketchreg/linalg.hpp"
#include "sketchreg/sketch.hpp"
#include "sketchreg/synth.hpp"

using namespace sketchreg;

namespace {

DataSet make_data(Index n, Index d) {
  SynthModel model = make_model(1.0, 0.5, d, 1.0, 0.5, 0.05, 7);
  return sample(model, n, 11);
}

void BM_gram_linear(benchmark::State& state) {
  const Index n = state.range(0);
  DataSet data = make_data(n, 256);
  KernelSpec kernel = KernelSpec::linear(1e9);
  for (auto _ : state) {
    Matrix K = gram(kernel, data);
    benchmark::DoNotOptimize(K.data());
  }
}
BENCHMARK(BM_gram_linear)->Arg(512)->Arg(1024)->Arg(2048);

void BM_gram_gaussian(benchmark::State& state) {
  const Index n = state.range(0);
  DataSet data = make_data(n, 64);
  KernelSpec kernel = KernelSpec::gaussian(1.0);
  for (auto _ : state) {
    Matrix K = gram(kernel, data);
    benchmark::DoNotOptimize(K.data());
  }
}
BENCHMARK(BM_gram_gaussian)->Arg(512)->Arg(1024);

void BM_fwht(benchmark::State& state) {
  const Index n = Index{1} << state.range(0);
  Vector v = Vector::Random(n);
  for (auto _ : state) {
    fwht(v);
    benchmark::DoNotOptimize(v.data());
  }
  state.SetComplexityN(n);
}
BENCHMARK(BM_fwht)->Arg(10)->Arg(14)->Arg(18)->Complexity(benchmark::oNLogN);

void BM_sym_eig(benchmark::State& state) {
  const Index n = state.range(0);
  DataSet data = make_data(n, 128);
  Matrix K = gram(KernelSpec::linear(1e9), data) / static_cast<double>(n);
  for (auto _ : state) {
    auto eig = linalg::sym_eig(K);
    benchmark::DoNotOptimize(eig.eigenvalues.data());
  }
}
BENCHMARK(BM_sym_eig)->Arg(256)->Arg(512)->Arg(1024);

void BM_fit_kernel(benchmark::State& state) {
  const Index n = state.range(0);
  DataSet data = make_data(n, 128);
  Matrix K = gram(KernelSpec::linear(1e9), data);
  SketchOperator G = SketchOperator::make(SketchKind::Gaussian, 128, n, 3);
  RegConfig reg;
  reg.lambda = theory_lambda(0.5, 1.0, n);
  reg.filter = FilterSpec::iterated_ridge(2);
  for (auto _ : state) {
    FitResult res = fit(K, data.labels, G, reg);
    benchmark::DoNotOptimize(res.beta.data());
  }
}
BENCHMARK(BM_fit_kernel)->Arg(512)->Arg(1024);

void BM_fit_linear_fast(benchmark::State& state) {
  const Index n = state.range(0);
  DataSet data = make_data(n, 256);
  SketchOperator G = SketchOperator::make(SketchKind::Identity, n, n, 0);
  RegConfig reg;
  reg.lambda = theory_lambda(0.5, 1.0, n);
  reg.filter = FilterSpec::iterated_ridge(2);
  for (auto _ : state) {
    Vector w = fit_linear(data.points, data.labels, G, reg);
    benchmark::DoNotOptimize(w.data());
  }
}
BENCHMARK(BM_fit_linear_fast)->Arg(2048)->Arg(8192);

}  // namespace

BENCHMARK_MAIN();
