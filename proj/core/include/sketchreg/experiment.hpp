#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sketchreg/filters.hpp"
#include "sketchreg/kernels.hpp"
#include "sketchreg/report.hpp"
#include "sketchreg/synth.hpp"
#include "sketchreg/types.hpp"

namespace sketchreg {

enum class ExperimentMode { Rates, SketchDim, Diagnose, Bench };

enum class SketchRule {
  Identity,
  Gaussian,
  Rademacher,
  RosHadamard,
  NystromUniform,
  NystromAls,
};

struct ModelConfig {
  double gamma = 1.0;
  double zeta = 0.5;
  Index d = 0;  // 0 = auto: max(2000, ceil(50 * n_max^{gamma/(2 zeta + gamma)}))
  double R = 1.0;
  double noise_sigma = 0.5;
  double eps = 0.05;
};

struct DatasetConfig {
  std::string path;
  DataFormat format = DataFormat::Csv;
  std::string kernel = "gaussian";  // gaussian | linear | sobolev_spline
  double bandwidth = 1.0;
  double kappa_sq = 0.0;  // linear kernel bound; 0 = infer from data
  double holdout = 0.2;
};

struct LambdaRule {
  std::string style = "theory";  // theory | fixed
  std::optional<double> exponent_override;  // lambda = n^{-exponent}
  std::optional<double> value;              // fixed style
};

struct SketchConfig {
  SketchRule kind = SketchRule::Identity;
  double C = 1.0;  // multiplier in the dimension rule
  std::optional<double> exponent;  // override; default chosen from (zeta, gamma, a)
  std::optional<Index> m;          // fixed sketch dimension
  std::vector<Index> m_grid;       // sketchdim mode
  Index als_m0 = 256;              // columns for approximate leverage scores
  bool als_exact_scores = false;
};

struct ExperimentConfig {
  ExperimentMode mode = ExperimentMode::Rates;
  ModelConfig model;
  std::optional<DatasetConfig> dataset;
  std::vector<Index> n_grid;
  int trials = 1;
  LambdaRule lambda_rule;
  SketchConfig sketch;
  FilterSpec filter = FilterSpec::iterated_ridge(1);
  double norm_a = 0.0;
  std::uint64_t master_seed = 0;
  bool diagnostics = false;
  double rate_tolerance = 0.1;
  int threads = 1;
  std::string out_dir = ".";
};

// Parses the JSON config text; unknown keys are rejected with a field path in
// the error message. Overrides are dotted key=value pairs applied on top.
ExperimentConfig parse_config(const std::string& json_text,
                              const std::vector<std::string>& overrides = {});

ExperimentConfig load_config(const std::string& path,
                             const std::vector<std::string>& overrides = {});

// The theory-rule regularization lambda = n^{-1 / max(1, 2 zeta + gamma)}.
double theory_lambda(double zeta, double gamma, Index n);

// Sketch-dimension exponent from the three regimes of the minimal-dimension
// rule, selected from (zeta, gamma, a).
double sketch_dim_exponent(double zeta, double gamma, double a);

// m = clamp(ceil(C * n^exponent * log n), 1, n).
Index sketch_dim(const SketchConfig& sketch, double zeta, double gamma, double a,
                 Index n);

Index auto_model_dim(const ModelConfig& model, Index n_max);

struct RatesRow {
  Index n = 0;
  int trial = 0;
  double lambda = 0.0;
  Index m = 0;
  std::string sketch_kind;
  std::string filter;
  double tau = 0.0;
  double a = 0.0;
  double error_norm = 0.0;
  double proj_err = 0.0;
  double eff_dim = 0.0;
  double wall_ms = 0.0;
};

struct RatesTable {
  std::vector<RatesRow> rows;
};

struct SketchDimRow {
  Index m = 0;
  int trial = 0;
  double lambda = 0.0;
  double proj_err = 0.0;
  double error_norm = 0.0;
  double wall_ms = 0.0;
};

struct SketchDimTable {
  std::vector<SketchDimRow> rows;
};

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  double target_slope = 0.0;
  bool within_tolerance = false;
};

struct RatePoint {
  Index n = 0;
  double error = 0.0;
};

// Synthetic-model convergence sweep; rows are deterministic functions of the
// config and master seed, independent of execution order.
RatesTable run_rates(const ExperimentConfig& cfg);

// Sketch-dimension sweep at fixed n and lambda.
SketchDimTable run_sketchdim(const ExperimentConfig& cfg);

// Groups points by n, takes the median error per n, and fits ordinary least
// squares in log-log space against target_slope.
RateFit fit_rate(const std::vector<RatePoint>& points, double target_slope,
                 double tolerance);

RateFit fit_rate(const RatesTable& table, double target_slope, double tolerance);

CsvTable rates_to_csv(const RatesTable& table);
CsvTable sketchdim_to_csv(const SketchDimTable& table);

// Median error per n, used for plots and slope fits.
std::vector<RatePoint> median_errors(const RatesTable& table);

struct DiagnoseRow {
  int trial = 0;
  double lambda = 0.0;
  Index m_sketch = 0;
  Index m_als = 0;
  double proj_err_gaussian = 0.0;
  double proj_err_als = 0.0;
  double eff_dim_empirical = 0.0;
  double eff_dim_population = 0.0;
  double leverage_sum = 0.0;
};

struct DiagnoseTable {
  std::vector<DiagnoseRow> rows;
};

// Per-trial diagnostic quantities (projection errors against their lambda
// bounds, empirical vs population effective dimension) at fixed n.
DiagnoseTable run_diagnose(const ExperimentConfig& cfg);

CsvTable diagnose_to_csv(const DiagnoseTable& table);

// Real-dataset evaluation: holdout test MSE for the configured kernel,
// sketch, and filter at each n in the grid (subsampled from the training
// split). Rate fitting is not applicable here.
struct RealDataRow {
  Index n = 0;
  int trial = 0;
  double lambda = 0.0;
  Index m = 0;
  double test_mse = 0.0;
  double wall_ms = 0.0;
};

struct RealDataTable {
  std::vector<RealDataRow> rows;
};

RealDataTable run_real_data(const ExperimentConfig& cfg);
CsvTable real_data_to_csv(const RealDataTable& table);

const char* to_string(SketchRule rule);
const char* to_string(FilterFamily family);

}  // namespace sketchreg
