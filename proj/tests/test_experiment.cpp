#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "sketchreg/errors.hpp"
#include "sketchreg/estimator.hpp"
#include "sketchreg/experiment.hpp"
#include "sketchreg/report.hpp"
#include "sketchreg/rng.hpp"
#include "sketchreg/sketch.hpp"
#include "sketchreg/synth.hpp"

using namespace sketchreg;

namespace {

std::string csv_text(const CsvTable& table) {
  std::ostringstream out;
  for (size_t i = 0; i < table.header.size(); ++i)
    out << (i ? "," : "") << table.header[i];
  out << '\n';
  for (const auto& row : table.rows) {
    for (size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
    out << '\n';
  }
  return out.str();
}

std::string strip_last_column(const std::string& csv) {
  std::istringstream in(csv);
  std::ostringstream out;
  std::string line;
  while (std::getline(in, line)) {
    const auto pos = line.rfind(',');
    out << line.substr(0, pos) << '\n';
  }
  return out.str();
}

}  // namespace

TEST_CASE("config parsing accepts the full schema") {
  const std::string text = R"({
    "mode": "rates",
    "model": {"gamma": 0.5, "zeta": 1.0, "d": 64, "noise_sigma": 0.25},
    "n_grid": [64, 128, 256],
    "trials": 3,
    "lambda_rule": {"style": "theory"},
    "sketch": {"kind": "gaussian", "C": 2.0},
    "filter": {"family": "iterated_ridge", "tau": 2},
    "norm_a": 0.0,
    "master_seed": 7,
    "threads": 2
  })";
  ExperimentConfig cfg = parse_config(text);
  CHECK(cfg.mode == ExperimentMode::Rates);
  CHECK(cfg.model.gamma == 0.5);
  CHECK(cfg.model.d == 64);
  CHECK(cfg.n_grid.size() == 3);
  CHECK(cfg.trials == 3);
  CHECK(cfg.sketch.kind == SketchRule::Gaussian);
  CHECK(cfg.filter.tau == 2.0);
  CHECK(cfg.master_seed == 7);
}

TEST_CASE("unknown keys are rejected with a field path") {
  CHECK_THROWS_WITH_AS(parse_config(R"({"mode": "rates", "bogus": 1})"),
                       doctest::Contains("bogus"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config(R"({"model": {"gamm": 0.5}})"),
                       doctest::Contains("model.gamm"), ConfigError);
  CHECK_THROWS_AS(parse_config("not json"), ConfigError);
}

TEST_CASE("config validation") {
  CHECK_THROWS_AS(parse_config(R"({"n_grid": [64, 64]})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"trials": 0})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"lambda_rule": {"style": "fixed"}})"),
                  ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"mode": "nope"})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"sketch": {"kind": "nope"}})"), ConfigError);
}

TEST_CASE("overrides apply dotted keys on top of the config") {
  ExperimentConfig cfg = parse_config(R"({"model": {"zeta": 0.5}})",
                                      {"model.zeta=1.5", "trials=4",
                                       "sketch.kind=rademacher"});
  CHECK(cfg.model.zeta == 1.5);
  CHECK(cfg.trials == 4);
  CHECK(cfg.sketch.kind == SketchRule::Rademacher);
  CHECK_THROWS_AS(parse_config("{}", {"notakeyvalue"}), ConfigError);
}

TEST_CASE("theory lambda exponent is exact") {
  CHECK(theory_lambda(0.5, 1.0, 1024) == std::pow(1024.0, -0.5));
  CHECK(theory_lambda(1.0, 0.5, 777) == std::pow(777.0, -1.0 / 2.5));
  // Below the attainability threshold the exponent saturates at 1.
  CHECK(theory_lambda(0.1, 0.5, 512) == std::pow(512.0, -1.0));
}

TEST_CASE("sketch dimension exponent covers the three regimes") {
  CHECK(sketch_dim_exponent(0.1, 0.5, 0.0) == doctest::Approx(0.5));
  CHECK(sketch_dim_exponent(1.5, 0.5, 0.0) ==
        doctest::Approx(0.5 * 1.5 / 3.5));
  CHECK(sketch_dim_exponent(0.5, 1.0, 0.0) == doctest::Approx(0.5));
  // a shifts the high-smoothness regime only.
  CHECK(sketch_dim_exponent(1.5, 0.5, 0.25) ==
        doctest::Approx(0.5 * 1.25 / (0.75 * 3.5)));
}

TEST_CASE("sketch dimension rule clamps to [1, n]") {
  SketchConfig sk;
  sk.C = 1000.0;
  CHECK(sketch_dim(sk, 0.5, 1.0, 0.0, 128) == 128);
  sk.C = 1e-9;
  CHECK(sketch_dim(sk, 0.5, 1.0, 0.0, 128) == 1);
  sk.C = 1.0;
  sk.m = 37;
  CHECK(sketch_dim(sk, 0.5, 1.0, 0.0, 128) == 37);
}

TEST_CASE("fit_rate on exact and constant points") {
  std::vector<RatePoint> pts;
  for (Index n : {100, 200, 400, 800})
    pts.push_back({n, std::pow(static_cast<double>(n), -0.25)});
  RateFit fit = fit_rate(pts, -0.25, 0.01);
  CHECK(fit.slope == doctest::Approx(-0.25).epsilon(1e-12));
  CHECK(fit.r_squared == doctest::Approx(1.0));
  CHECK(fit.within_tolerance);

  std::vector<RatePoint> flat;
  for (Index n : {100, 200, 400}) flat.push_back({n, 2.0});
  CHECK(fit_rate(flat, 0.0, 0.01).slope == doctest::Approx(0.0));
}

TEST_CASE("fit_rate recovers a noisy synthetic slope") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> noise(0.0, 0.02);
  std::vector<RatePoint> pts;
  for (Index n : {128, 256, 512, 1024, 2048, 4096})
    for (int t = 0; t < 15; ++t)
      pts.push_back({n, std::exp(-0.4 * std::log(static_cast<double>(n)) + noise(rng))});
  RateFit fit = fit_rate(pts, -0.4, 0.05);
  CHECK(std::abs(fit.slope + 0.4) <= 0.05);
  CHECK(fit.within_tolerance);
}

TEST_CASE("fit_rate input validation") {
  std::vector<RatePoint> two = {{10, 1.0}, {20, 0.5}};
  CHECK_THROWS_AS(fit_rate(two, -0.5, 0.1), InvalidPoints);
  std::vector<RatePoint> neg = {{10, 1.0}, {20, -0.5}, {40, 0.2}};
  CHECK_THROWS_AS(fit_rate(neg, -0.5, 0.1), InvalidPoints);
}

TEST_CASE("run_rates single row matches a scripted replay of the pipeline") {
  ExperimentConfig cfg = parse_config(R"({
    "mode": "rates",
    "model": {"gamma": 1.0, "zeta": 0.5, "d": 64, "noise_sigma": 0.5},
    "n_grid": [16],
    "trials": 1,
    "master_seed": 99
  })");
  RatesTable table = run_rates(cfg);
  REQUIRE(table.rows.size() == 1);
  const RatesRow& row = table.rows[0];
  CHECK(row.n == 16);
  CHECK(row.sketch_kind == "identity");
  CHECK(row.m == 16);

  // Replay with the library primitives, outside the harness.
  SynthModel model = make_model(1.0, 0.5, 64, 1.0, 0.5, 0.05, 99);
  const std::uint64_t seed = seed_combine(99, 16, 0);
  DataSet data = sample(model, 16, seed_combine(seed, 1));
  RegConfig reg;
  reg.lambda = std::pow(16.0, -0.5);
  reg.filter = FilterSpec::iterated_ridge(1);
  reg.allow_lambda_outside = true;
  auto G = SketchOperator::make(SketchKind::Identity, 16, 16, 0);
  Vector w = fit_linear(data.points, data.labels, G, reg);
  CHECK(row.lambda == reg.lambda);
  CHECK(row.error_norm == error_norm(model, w, NormSpec{0.0}));
}

TEST_CASE("noiseless runs beat noisy runs on the same draw") {
  const std::string base = R"({
    "mode": "rates",
    "model": {"gamma": 0.5, "zeta": 2.0, "d": 64, "noise_sigma": %S},
    "n_grid": [256],
    "trials": 1,
    "filter": {"tau": 3},
    "master_seed": 5
  })";
  auto with_sigma = [&](const std::string& s) {
    std::string text = base;
    text.replace(text.find("%S"), 2, s);
    return run_rates(parse_config(text)).rows[0].error_norm;
  };
  CHECK(with_sigma("0.0") < with_sigma("0.5"));
}

TEST_CASE("rates output is deterministic and thread-count invariant") {
  const std::string text = R"({
    "mode": "rates",
    "model": {"gamma": 1.0, "zeta": 0.5, "d": 48, "noise_sigma": 0.5},
    "n_grid": [32, 64],
    "trials": 3,
    "sketch": {"kind": "gaussian", "C": 2.0},
    "diagnostics": true,
    "master_seed": 11
  })";
  ExperimentConfig cfg = parse_config(text);
  std::string a = strip_last_column(csv_text(rates_to_csv(run_rates(cfg))));
  std::string b = strip_last_column(csv_text(rates_to_csv(run_rates(cfg))));
  CHECK(a == b);
  ExperimentConfig cfg4 = parse_config(text, {"threads=4"});
  std::string c = strip_last_column(csv_text(rates_to_csv(run_rates(cfg4))));
  CHECK(a == c);
}

TEST_CASE("rates csv has the exact column schema") {
  ExperimentConfig cfg = parse_config(R"({
    "model": {"d": 32}, "n_grid": [16], "trials": 1, "master_seed": 1
  })");
  CsvTable csv = rates_to_csv(run_rates(cfg));
  const std::string header = csv_text(csv).substr(0, csv_text(csv).find('\n'));
  CHECK(header ==
        "n,trial,lambda,m,sketch_kind,filter,tau,a,error_norm,proj_err,eff_dim,wall_ms");
}

TEST_CASE("sketchdim sweep: projection error falls as m grows") {
  ExperimentConfig cfg = parse_config(R"({
    "mode": "sketchdim",
    "model": {"gamma": 0.5, "zeta": 1.0, "d": 64, "noise_sigma": 0.25},
    "n_grid": [256],
    "trials": 5,
    "sketch": {"kind": "gaussian", "m_grid": [4, 16, 64, 256]},
    "master_seed": 21
  })");
  SketchDimTable table = run_sketchdim(cfg);
  CHECK(table.rows.size() == 20);
  auto median_at = [&](Index m) {
    std::vector<double> v;
    for (const auto& r : table.rows)
      if (r.m == m) v.push_back(r.proj_err);
    std::sort(v.begin(), v.end());
    return v[v.size() / 2];
  };
  CHECK(median_at(16) <= median_at(4) + 1e-12);
  CHECK(median_at(64) <= median_at(16) + 1e-12);
  CHECK(median_at(256) <= median_at(64) + 1e-12);
  // A generic full-dimensional sketch captures the whole span.
  CHECK(median_at(256) <= 1e-8);
}

TEST_CASE("diagnose rows carry consistent quantities") {
  ExperimentConfig cfg = parse_config(R"({
    "mode": "diagnose",
    "model": {"gamma": 0.5, "zeta": 1.0, "d": 64, "noise_sigma": 0.25},
    "n_grid": [256],
    "trials": 3,
    "sketch": {"C": 6.0},
    "master_seed": 31
  })");
  DiagnoseTable table = run_diagnose(cfg);
  REQUIRE(table.rows.size() == 3);
  for (const auto& row : table.rows) {
    CHECK(row.lambda > 0.0);
    CHECK(row.eff_dim_empirical > 0.0);
    CHECK(row.eff_dim_population > 0.0);
    // Exact linear-kernel leverage scores sum to the effective dimension.
    CHECK(std::abs(row.leverage_sum - row.eff_dim_empirical) <= 1e-8);
    CHECK(row.proj_err_gaussian >= 0.0);
    CHECK(row.proj_err_als >= 0.0);
  }
}

TEST_CASE("real-data mode computes a holdout MSE") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "sketchreg_realdata_test";
  fs::create_directories(dir);
  const std::string path = (dir / "data.csv").string();
  {
    std::ofstream out(path);
    std::mt19937_64 rng(41);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int i = 0; i < 200; ++i) {
      const double x1 = normal(rng), x2 = normal(rng);
      out << x1 << ',' << x2 << ',' << (0.7 * x1 - 0.2 * x2 + 0.05 * normal(rng))
          << '\n';
    }
  }
  std::string text = R"({
    "mode": "rates",
    "dataset": {"path": "%P", "kernel": "gaussian", "bandwidth": 1.0, "holdout": 0.25},
    "n_grid": [50, 100],
    "trials": 2,
    "lambda_rule": {"style": "fixed", "value": 0.05},
    "master_seed": 17
  })";
  text.replace(text.find("%P"), 2, path);
  RealDataTable table = run_real_data(parse_config(text));
  CHECK(table.rows.size() == 4);
  for (const auto& row : table.rows) {
    CHECK(std::isfinite(row.test_mse));
    CHECK(row.test_mse >= 0.0);
    CHECK(row.test_mse < 2.0);  // far better than predicting garbage
  }
  // More data should not hurt on the median at this scale.
  fs::remove_all(dir);
}

TEST_CASE("median_errors groups and aggregates by n") {
  RatesTable table;
  for (int t = 0; t < 3; ++t) {
    RatesRow row;
    row.n = 16;
    row.trial = t;
    row.error_norm = 1.0 + t;  // median 2
    table.rows.push_back(row);
  }
  RatesRow big;
  big.n = 32;
  big.error_norm = 0.5;
  table.rows.push_back(big);
  auto med = median_errors(table);
  REQUIRE(med.size() == 2);
  CHECK(med[0].n == 16);
  CHECK(med[0].error == 2.0);
  CHECK(med[1].error == 0.5);
}
