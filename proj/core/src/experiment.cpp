#include "sketchreg/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "sketchreg/diagnostics.hpp"
#include "sketchreg/errors.hpp"
#include "sketchreg/estimator.hpp"
#include "sketchreg/linalg.hpp"
#include "sketchreg/rng.hpp"
#include "sketchreg/subsample.hpp"

namespace sketchreg {

using nlohmann::json;

namespace {

[[noreturn]] void config_fail(const std::string& path, const std::string& what) {
  throw ConfigError(path.empty() ? what : path + ": " + what);
}

void check_keys(const json& obj, const std::string& path,
                std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) config_fail(path, "expected an object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* k : allowed)
      if (it.key() == k) { ok = true; break; }
    if (!ok) config_fail(path.empty() ? it.key() : path + "." + it.key(),
                         "unknown key");
  }
}

template <typename T>
T get_or(const json& obj, const std::string& path, const char* key, T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    config_fail(path + "." + key, e.what());
  }
}

ExperimentMode parse_mode(const std::string& s) {
  if (s == "rates") return ExperimentMode::Rates;
  if (s == "sketchdim") return ExperimentMode::SketchDim;
  if (s == "diagnose") return ExperimentMode::Diagnose;
  if (s == "bench") return ExperimentMode::Bench;
  config_fail("mode", "must be one of rates, sketchdim, diagnose, bench");
}

SketchRule parse_sketch_kind(const std::string& s) {
  if (s == "identity") return SketchRule::Identity;
  if (s == "gaussian") return SketchRule::Gaussian;
  if (s == "rademacher") return SketchRule::Rademacher;
  if (s == "ros_hadamard") return SketchRule::RosHadamard;
  if (s == "nystrom_uniform") return SketchRule::NystromUniform;
  if (s == "nystrom_als") return SketchRule::NystromAls;
  config_fail("sketch.kind", "unknown sketch kind '" + s + "'");
}

FilterSpec parse_filter(const json& obj) {
  check_keys(obj, "filter", {"family", "tau"});
  const std::string family = get_or<std::string>(obj, "filter", "family",
                                                 "iterated_ridge");
  if (family == "iterated_ridge")
    return FilterSpec::iterated_ridge(get_or<int>(obj, "filter", "tau", 1));
  if (family == "spectral_cutoff")
    return FilterSpec::spectral_cutoff(get_or<double>(obj, "filter", "tau", 1.0));
  config_fail("filter.family", "unknown filter family '" + family + "'");
}

json apply_override(json root, const std::string& spec) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos)
    config_fail("", "override '" + spec + "' is not key=value");
  std::string keypath = spec.substr(0, eq);
  std::string value = spec.substr(eq + 1);
  json parsed;
  try {
    parsed = json::parse(value);
  } catch (const json::exception&) {
    parsed = value;  // bare strings allowed without quotes
  }
  json* node = &root;
  size_t start = 0;
  while (true) {
    const auto dot = keypath.find('.', start);
    const std::string part = keypath.substr(start, dot - start);
    if (part.empty()) config_fail("", "bad override key '" + keypath + "'");
    if (dot == std::string::npos) {
      (*node)[part] = parsed;
      break;
    }
    node = &(*node)[part];
    start = dot + 1;
  }
  return root;
}

double now_ms() {
  return std::chrono::duration<double, std::milli>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

// Runs tasks 0..count-1 on a bounded pool; results must be written to
// preassigned slots so the output is order-independent.
void parallel_for(int threads, Index count, const std::function<void(Index)>& task) {
  threads = std::max(1, threads);
  if (threads == 1 || count <= 1) {
    for (Index i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<Index> next{0};
  std::exception_ptr err;
  std::mutex err_mu;
  auto worker = [&] {
    while (true) {
      const Index i = next.fetch_add(1);
      if (i >= count) return;
      try {
        task(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mu);
        if (!err) err = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (int t = 0; t < std::min<Index>(threads, count); ++t)
    pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

}  // namespace

ExperimentConfig parse_config(const std::string& json_text,
                              const std::vector<std::string>& overrides) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid JSON: ") + e.what());
  }
  for (const auto& o : overrides) root = apply_override(std::move(root), o);

  check_keys(root, "",
             {"mode", "model", "dataset", "n_grid", "trials", "lambda_rule",
              "sketch", "filter", "norm_a", "master_seed", "diagnostics",
              "rate_tolerance", "threads", "out_dir"});

  ExperimentConfig cfg;
  cfg.mode = parse_mode(get_or<std::string>(root, "", "mode", "rates"));

  if (root.contains("model")) {
    const json& m = root.at("model");
    check_keys(m, "model", {"gamma", "zeta", "d", "R", "noise_sigma", "eps"});
    cfg.model.gamma = get_or<double>(m, "model", "gamma", cfg.model.gamma);
    cfg.model.zeta = get_or<double>(m, "model", "zeta", cfg.model.zeta);
    cfg.model.d = get_or<Index>(m, "model", "d", cfg.model.d);
    cfg.model.R = get_or<double>(m, "model", "R", cfg.model.R);
    cfg.model.noise_sigma = get_or<double>(m, "model", "noise_sigma", cfg.model.noise_sigma);
    cfg.model.eps = get_or<double>(m, "model", "eps", cfg.model.eps);
  }

  if (root.contains("dataset")) {
    const json& d = root.at("dataset");
    check_keys(d, "dataset",
               {"path", "format", "kernel", "bandwidth", "kappa_sq", "holdout"});
    DatasetConfig ds;
    ds.path = get_or<std::string>(d, "dataset", "path", "");
    if (ds.path.empty()) config_fail("dataset.path", "required");
    const std::string fmt = get_or<std::string>(d, "dataset", "format", "csv");
    if (fmt == "csv") ds.format = DataFormat::Csv;
    else if (fmt == "binary-f64le") ds.format = DataFormat::BinaryF64le;
    else config_fail("dataset.format", "must be csv or binary-f64le");
    ds.kernel = get_or<std::string>(d, "dataset", "kernel", ds.kernel);
    ds.bandwidth = get_or<double>(d, "dataset", "bandwidth", ds.bandwidth);
    ds.kappa_sq = get_or<double>(d, "dataset", "kappa_sq", ds.kappa_sq);
    ds.holdout = get_or<double>(d, "dataset", "holdout", ds.holdout);
    if (ds.holdout <= 0 || ds.holdout >= 1)
      config_fail("dataset.holdout", "must be in (0, 1)");
    cfg.dataset = ds;
  }

  cfg.n_grid = get_or<std::vector<Index>>(root, "", "n_grid", {});
  for (size_t i = 1; i < cfg.n_grid.size(); ++i)
    if (cfg.n_grid[i] <= cfg.n_grid[i - 1])
      config_fail("n_grid", "must be strictly increasing");
  cfg.trials = get_or<int>(root, "", "trials", 1);
  if (cfg.trials < 1) config_fail("trials", "must be >= 1");

  if (root.contains("lambda_rule")) {
    const json& l = root.at("lambda_rule");
    check_keys(l, "lambda_rule", {"style", "exponent_override", "value"});
    cfg.lambda_rule.style = get_or<std::string>(l, "lambda_rule", "style", "theory");
    if (cfg.lambda_rule.style != "theory" && cfg.lambda_rule.style != "fixed")
      config_fail("lambda_rule.style", "must be theory or fixed");
    if (l.contains("exponent_override") && !l.at("exponent_override").is_null())
      cfg.lambda_rule.exponent_override =
          get_or<double>(l, "lambda_rule", "exponent_override", 0.0);
    if (l.contains("value") && !l.at("value").is_null())
      cfg.lambda_rule.value = get_or<double>(l, "lambda_rule", "value", 0.0);
    if (cfg.lambda_rule.style == "fixed" && !cfg.lambda_rule.value)
      config_fail("lambda_rule.value", "required for fixed style");
  }

  if (root.contains("sketch")) {
    const json& s = root.at("sketch");
    check_keys(s, "sketch",
               {"kind", "C", "exponent", "m", "m_grid", "als_m0", "als_exact_scores"});
    cfg.sketch.kind =
        parse_sketch_kind(get_or<std::string>(s, "sketch", "kind", "identity"));
    cfg.sketch.C = get_or<double>(s, "sketch", "C", cfg.sketch.C);
    if (s.contains("exponent") && !s.at("exponent").is_null())
      cfg.sketch.exponent = get_or<double>(s, "sketch", "exponent", 0.0);
    if (s.contains("m") && !s.at("m").is_null())
      cfg.sketch.m = get_or<Index>(s, "sketch", "m", 0);
    cfg.sketch.m_grid = get_or<std::vector<Index>>(s, "sketch", "m_grid", {});
    cfg.sketch.als_m0 = get_or<Index>(s, "sketch", "als_m0", cfg.sketch.als_m0);
    cfg.sketch.als_exact_scores =
        get_or<bool>(s, "sketch", "als_exact_scores", false);
  }

  if (root.contains("filter")) cfg.filter = parse_filter(root.at("filter"));
  cfg.norm_a = get_or<double>(root, "", "norm_a", 0.0);
  cfg.master_seed = get_or<std::uint64_t>(root, "", "master_seed", 0);
  cfg.diagnostics = get_or<bool>(root, "", "diagnostics", false);
  cfg.rate_tolerance = get_or<double>(root, "", "rate_tolerance", 0.1);
  cfg.threads = get_or<int>(root, "", "threads", 1);
  cfg.out_dir = get_or<std::string>(root, "", "out_dir", ".");
  return cfg;
}

ExperimentConfig load_config(const std::string& path,
                             const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str(), overrides);
}

double theory_lambda(double zeta, double gamma, Index n) {
  const double denom = std::max(1.0, 2.0 * zeta + gamma);
  return std::pow(static_cast<double>(n), -1.0 / denom);
}

double sketch_dim_exponent(double zeta, double gamma, double a) {
  if (2.0 * zeta + gamma <= 1.0) return gamma;
  if (zeta >= 1.0) return gamma * (zeta - a) / ((1.0 - a) * (2.0 * zeta + gamma));
  return gamma / (2.0 * zeta + gamma);
}

Index sketch_dim(const SketchConfig& sketch, double zeta, double gamma, double a,
                 Index n) {
  if (sketch.m) return std::clamp<Index>(*sketch.m, 1, n);
  const double e = sketch.exponent ? *sketch.exponent
                                   : sketch_dim_exponent(zeta, gamma, a);
  const double nn = static_cast<double>(n);
  const double raw = sketch.C * std::pow(nn, e) * std::log(std::max(nn, 2.0));
  return std::clamp<Index>(static_cast<Index>(std::ceil(raw)), 1, n);
}

Index auto_model_dim(const ModelConfig& model, Index n_max) {
  if (model.d > 0) return model.d;
  const double e = model.gamma / (2.0 * model.zeta + model.gamma);
  const double suggested = 50.0 * std::pow(static_cast<double>(n_max), e);
  return std::max<Index>(2000, static_cast<Index>(std::ceil(suggested)));
}

namespace {

double resolve_lambda(const LambdaRule& rule, const ModelConfig& model, Index n) {
  if (rule.style == "fixed") return *rule.value;
  if (rule.exponent_override)
    return std::pow(static_cast<double>(n), -*rule.exponent_override);
  return theory_lambda(model.zeta, model.gamma, n);
}

SketchOperator build_sketch(const ExperimentConfig& cfg, const Matrix& X,
                            double lambda, Index n, std::uint64_t seed, Index m) {
  switch (cfg.sketch.kind) {
    case SketchRule::Identity:
      return SketchOperator::make(SketchKind::Identity, n, n, 0);
    case SketchRule::Gaussian:
      return SketchOperator::make(SketchKind::Gaussian, m, n, seed);
    case SketchRule::Rademacher:
      return SketchOperator::make(SketchKind::Rademacher, m, n, seed);
    case SketchRule::RosHadamard:
      return SketchOperator::make(SketchKind::RosHadamard, m, n, seed);
    case SketchRule::NystromUniform:
      return nystrom_uniform(n, m, seed);
    case SketchRule::NystromAls: {
      LeverageScores scores =
          cfg.sketch.als_exact_scores
              ? leverage_scores_linear(X, lambda)
              : leverage_scores_approx_linear(X, lambda,
                                              std::min(cfg.sketch.als_m0, n),
                                              seed_combine(seed, 0xa15u));
      return nystrom_als(scores, m, seed_combine(seed, 0xd0a1u));
    }
  }
  throw ConfigError("unknown sketch kind");
}

}  // namespace

RatesTable run_rates(const ExperimentConfig& cfg) {
  if (cfg.dataset)
    throw ConfigError("run_rates is for synthetic models; use run_real_data");
  if (cfg.n_grid.empty()) config_fail("n_grid", "must be nonempty");

  const Index n_max = cfg.n_grid.back();
  const Index d = auto_model_dim(cfg.model, n_max);
  const SynthModel model =
      make_model(cfg.model.gamma, cfg.model.zeta, d, cfg.model.R,
                 cfg.model.noise_sigma, cfg.model.eps, cfg.master_seed);
  if (cfg.norm_a > std::min(0.5, model.zeta))
    config_fail("norm_a", "must satisfy a <= min(1/2, zeta)");

  struct Task {
    Index n;
    int trial;
  };
  std::vector<Task> tasks;
  for (Index n : cfg.n_grid)
    for (int t = 0; t < cfg.trials; ++t) tasks.push_back({n, t});

  RatesTable table;
  table.rows.resize(tasks.size());

  parallel_for(cfg.threads, static_cast<Index>(tasks.size()), [&](Index ti) {
    const Task& task = tasks[ti];
    const double t0 = now_ms();
    const std::uint64_t seed =
        seed_combine(cfg.master_seed, static_cast<std::uint64_t>(task.n),
                     static_cast<std::uint64_t>(task.trial));
    DataSet data = sample(model, task.n, seed_combine(seed, 1));
    const double lambda = resolve_lambda(cfg.lambda_rule, cfg.model, task.n);
    const Index m = cfg.sketch.kind == SketchRule::Identity
                        ? task.n
                        : sketch_dim(cfg.sketch, cfg.model.zeta, cfg.model.gamma,
                                     cfg.norm_a, task.n);
    SketchOperator G =
        build_sketch(cfg, data.points, lambda, task.n, seed_combine(seed, 2), m);

    RegConfig reg;
    reg.lambda = lambda;
    reg.filter = cfg.filter;
    reg.allow_lambda_outside = true;
    Vector w = fit_linear(data.points, data.labels, G, reg);

    RatesRow& row = table.rows[ti];
    row.n = task.n;
    row.trial = task.trial;
    row.lambda = lambda;
    row.m = m;
    row.sketch_kind = to_string(cfg.sketch.kind);
    row.filter = to_string(cfg.filter.family);
    row.tau = cfg.filter.tau;
    row.a = cfg.norm_a;
    row.error_norm = error_norm(model, w, NormSpec{cfg.norm_a});
    if (cfg.diagnostics) {
      row.proj_err = cfg.sketch.kind == SketchRule::Identity
                         ? 0.0
                         : diagnostics::projection_error_features(data.points, G);
      Matrix T = data.points.transpose() * data.points /
                 static_cast<double>(task.n);
      T = 0.5 * (T + T.transpose().eval());
      row.eff_dim = diagnostics::effective_dim_from_spectrum(
          linalg::sym_eig(T).eigenvalues, lambda);
    } else {
      row.proj_err = std::numeric_limits<double>::quiet_NaN();
      row.eff_dim = std::numeric_limits<double>::quiet_NaN();
    }
    row.wall_ms = now_ms() - t0;
  });

  std::sort(table.rows.begin(), table.rows.end(),
            [](const RatesRow& a, const RatesRow& b) {
              return std::tie(a.n, a.trial) < std::tie(b.n, b.trial);
            });
  return table;
}

SketchDimTable run_sketchdim(const ExperimentConfig& cfg) {
  if (cfg.n_grid.empty()) config_fail("n_grid", "must be nonempty");
  if (cfg.sketch.m_grid.empty()) config_fail("sketch.m_grid", "must be nonempty");
  const Index n = cfg.n_grid.back();
  const Index d = auto_model_dim(cfg.model, n);
  const SynthModel model =
      make_model(cfg.model.gamma, cfg.model.zeta, d, cfg.model.R,
                 cfg.model.noise_sigma, cfg.model.eps, cfg.master_seed);
  const double lambda = resolve_lambda(cfg.lambda_rule, cfg.model, n);

  struct Task {
    Index m;
    int trial;
  };
  std::vector<Task> tasks;
  for (Index m : cfg.sketch.m_grid)
    for (int t = 0; t < cfg.trials; ++t) tasks.push_back({m, t});

  SketchDimTable table;
  table.rows.resize(tasks.size());

  parallel_for(cfg.threads, static_cast<Index>(tasks.size()), [&](Index ti) {
    const Task& task = tasks[ti];
    const double t0 = now_ms();
    // Data depend only on the trial, so the m-sweep within a trial sees the
    // same sample.
    const std::uint64_t trial_seed = seed_combine(
        cfg.master_seed, static_cast<std::uint64_t>(n),
        static_cast<std::uint64_t>(task.trial));
    DataSet data = sample(model, n, seed_combine(trial_seed, 1));
    const std::uint64_t sketch_seed =
        seed_combine(trial_seed, static_cast<std::uint64_t>(task.m), 2);
    SketchOperator G = build_sketch(cfg, data.points, lambda, n, sketch_seed,
                                    std::clamp<Index>(task.m, 1, n));
    RegConfig reg;
    reg.lambda = lambda;
    reg.filter = cfg.filter;
    reg.allow_lambda_outside = true;
    Vector w = fit_linear(data.points, data.labels, G, reg);

    SketchDimRow& row = table.rows[ti];
    row.m = task.m;
    row.trial = task.trial;
    row.lambda = lambda;
    row.proj_err = diagnostics::projection_error_features(data.points, G);
    row.error_norm = error_norm(model, w, NormSpec{cfg.norm_a});
    row.wall_ms = now_ms() - t0;
  });

  std::sort(table.rows.begin(), table.rows.end(),
            [](const SketchDimRow& a, const SketchDimRow& b) {
              return std::tie(a.m, a.trial) < std::tie(b.m, b.trial);
            });
  return table;
}

DiagnoseTable run_diagnose(const ExperimentConfig& cfg) {
  if (cfg.n_grid.empty()) config_fail("n_grid", "must be nonempty");
  const Index n = cfg.n_grid.back();
  const Index d = auto_model_dim(cfg.model, n);
  const SynthModel model =
      make_model(cfg.model.gamma, cfg.model.zeta, d, cfg.model.R,
                 cfg.model.noise_sigma, cfg.model.eps, cfg.master_seed);
  const double lambda = resolve_lambda(cfg.lambda_rule, cfg.model, n);
  const double log_n = std::log(static_cast<double>(n));
  const Index m_rule = std::clamp<Index>(
      static_cast<Index>(
          std::ceil(cfg.sketch.C * std::pow(lambda, -cfg.model.gamma) * log_n)),
      1, n);

  DiagnoseTable table;
  table.rows.resize(cfg.trials);

  parallel_for(cfg.threads, cfg.trials, [&](Index t) {
    const std::uint64_t seed = seed_combine(
        cfg.master_seed, static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(t));
    DataSet data = sample(model, n, seed_combine(seed, 1));

    DiagnoseRow& row = table.rows[t];
    row.trial = static_cast<int>(t);
    row.lambda = lambda;
    row.m_sketch = m_rule;
    row.m_als = m_rule;

    SketchOperator Gg = SketchOperator::make(SketchKind::Gaussian, m_rule, n,
                                             seed_combine(seed, 2));
    row.proj_err_gaussian = diagnostics::projection_error_features(data.points, Gg);

    LeverageScores scores =
        cfg.sketch.als_exact_scores
            ? leverage_scores_linear(data.points, lambda)
            : leverage_scores_approx_linear(data.points, lambda,
                                            std::min(cfg.sketch.als_m0, n),
                                            seed_combine(seed, 3));
    SketchOperator Ga = nystrom_als(scores, m_rule, seed_combine(seed, 4));
    row.proj_err_als = diagnostics::projection_error_features(data.points, Ga);

    Matrix T = data.points.transpose() * data.points / static_cast<double>(n);
    T = 0.5 * (T + T.transpose().eval());
    row.eff_dim_empirical = diagnostics::effective_dim_from_spectrum(
        linalg::sym_eig(T).eigenvalues, lambda);
    row.eff_dim_population = population_effective_dim(model, lambda);
    row.leverage_sum = leverage_scores_linear(data.points, lambda).scores.sum();
  });
  return table;
}

RealDataTable run_real_data(const ExperimentConfig& cfg) {
  if (!cfg.dataset) config_fail("dataset", "required for real-data mode");
  if (cfg.n_grid.empty()) config_fail("n_grid", "must be nonempty");
  const DatasetConfig& ds = *cfg.dataset;
  DataSet full = ingest_dataset(ds.path, ds.format);

  KernelSpec kernel = KernelSpec::gaussian(ds.bandwidth);
  if (ds.kernel == "linear") {
    double kappa = ds.kappa_sq;
    if (kappa <= 0)
      kappa = full.points.rowwise().squaredNorm().maxCoeff() * (1.0 + 1e-9);
    kernel = KernelSpec::linear(kappa);
  } else if (ds.kernel == "sobolev_spline") {
    kernel = KernelSpec::sobolev_spline();
  } else if (ds.kernel != "gaussian") {
    config_fail("dataset.kernel", "unknown kernel '" + ds.kernel + "'");
  }

  // Seeded shuffle, then a fixed holdout split.
  std::vector<Index> perm(full.n());
  std::iota(perm.begin(), perm.end(), Index{0});
  auto rng = make_rng(seed_combine(cfg.master_seed, 0x5117u));
  for (Index i = full.n() - 1; i > 0; --i) {
    std::uniform_int_distribution<Index> pick(0, i);
    std::swap(perm[i], perm[pick(rng)]);
  }
  const Index n_test = std::max<Index>(1, static_cast<Index>(ds.holdout * full.n()));
  const Index n_train = full.n() - n_test;
  if (n_train < 1) config_fail("dataset.holdout", "no training rows left");

  DataSet test;
  test.points.resize(n_test, full.dim());
  test.labels.resize(n_test);
  for (Index i = 0; i < n_test; ++i) {
    test.points.row(i) = full.points.row(perm[n_train + i]);
    test.labels(i) = full.labels(perm[n_train + i]);
  }

  struct Task {
    Index n;
    int trial;
  };
  std::vector<Task> tasks;
  for (Index n : cfg.n_grid)
    if (n <= n_train)
      for (int t = 0; t < cfg.trials; ++t) tasks.push_back({n, t});
  if (tasks.empty()) config_fail("n_grid", "no entry fits the training split");

  RealDataTable table;
  table.rows.resize(tasks.size());

  parallel_for(cfg.threads, static_cast<Index>(tasks.size()), [&](Index ti) {
    const Task& task = tasks[ti];
    const double t0 = now_ms();
    const std::uint64_t seed =
        seed_combine(cfg.master_seed, static_cast<std::uint64_t>(task.n),
                     static_cast<std::uint64_t>(task.trial));

    // Trial-specific subset of the training split.
    std::vector<Index> sub(n_train);
    std::iota(sub.begin(), sub.end(), Index{0});
    auto trng = make_rng(seed_combine(seed, 1));
    for (Index i = 0; i < task.n; ++i) {
      std::uniform_int_distribution<Index> pick(i, n_train - 1);
      std::swap(sub[i], sub[pick(trng)]);
    }
    DataSet train;
    train.points.resize(task.n, full.dim());
    train.labels.resize(task.n);
    for (Index i = 0; i < task.n; ++i) {
      train.points.row(i) = full.points.row(perm[sub[i]]);
      train.labels(i) = full.labels(perm[sub[i]]);
    }

    const double lambda = resolve_lambda(cfg.lambda_rule, cfg.model, task.n);
    const Index m = cfg.sketch.kind == SketchRule::Identity
                        ? task.n
                        : sketch_dim(cfg.sketch, cfg.model.zeta, cfg.model.gamma,
                                     cfg.norm_a, task.n);
    Matrix K = gram(kernel, train);
    SketchOperator G = [&] {
      if (cfg.sketch.kind == SketchRule::NystromAls) {
        LeverageScores scores = leverage_scores_approx(
            K / static_cast<double>(task.n), lambda,
            std::min(cfg.sketch.als_m0, task.n), seed_combine(seed, 3));
        return nystrom_als(scores, m, seed_combine(seed, 2));
      }
      return build_sketch(cfg, train.points, lambda, task.n,
                          seed_combine(seed, 2), m);
    }();

    RegConfig reg;
    reg.lambda = lambda;
    reg.filter = cfg.filter;
    reg.allow_lambda_outside = true;
    FitResult res = fit(K, train.labels, G, reg);
    Vector pred = predict(res, cross_gram(kernel, train, test.points));

    RealDataRow& row = table.rows[ti];
    row.n = task.n;
    row.trial = task.trial;
    row.lambda = lambda;
    row.m = m;
    row.test_mse = (pred - test.labels).squaredNorm() / static_cast<double>(n_test);
    row.wall_ms = now_ms() - t0;
  });

  std::sort(table.rows.begin(), table.rows.end(),
            [](const RealDataRow& a, const RealDataRow& b) {
              return std::tie(a.n, a.trial) < std::tie(b.n, b.trial);
            });
  return table;
}

std::vector<RatePoint> median_errors(const RatesTable& table) {
  std::vector<RatePoint> out;
  std::vector<Index> ns;
  for (const auto& r : table.rows) ns.push_back(r.n);
  std::sort(ns.begin(), ns.end());
  ns.erase(std::unique(ns.begin(), ns.end()), ns.end());
  for (Index n : ns) {
    std::vector<double> errs;
    for (const auto& r : table.rows)
      if (r.n == n) errs.push_back(r.error_norm);
    std::sort(errs.begin(), errs.end());
    const size_t k = errs.size();
    const double med = k % 2 ? errs[k / 2] : 0.5 * (errs[k / 2 - 1] + errs[k / 2]);
    out.push_back({n, med});
  }
  return out;
}

RateFit fit_rate(const std::vector<RatePoint>& points, double target_slope,
                 double tolerance) {
  std::vector<Index> ns;
  for (const auto& p : points) {
    if (!(p.error > 0)) throw InvalidPoints("errors must be positive");
    ns.push_back(p.n);
  }
  std::sort(ns.begin(), ns.end());
  ns.erase(std::unique(ns.begin(), ns.end()), ns.end());
  if (ns.size() < 3) throw InvalidPoints("need at least 3 distinct n values");

  // Median per n, then OLS in log-log space.
  std::vector<double> lx, ly;
  for (Index n : ns) {
    std::vector<double> errs;
    for (const auto& p : points)
      if (p.n == n) errs.push_back(p.error);
    std::sort(errs.begin(), errs.end());
    const size_t k = errs.size();
    const double med = k % 2 ? errs[k / 2] : 0.5 * (errs[k / 2 - 1] + errs[k / 2]);
    lx.push_back(std::log(static_cast<double>(n)));
    ly.push_back(std::log(med));
  }
  const size_t k = lx.size();
  double mx = 0, my = 0;
  for (size_t i = 0; i < k; ++i) { mx += lx[i]; my += ly[i]; }
  mx /= k;
  my /= k;
  double sxx = 0, sxy = 0, syy = 0;
  for (size_t i = 0; i < k; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  RateFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r_squared = syy > 0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  fit.target_slope = target_slope;
  fit.within_tolerance = std::abs(fit.slope - target_slope) <= tolerance;
  return fit;
}

RateFit fit_rate(const RatesTable& table, double target_slope, double tolerance) {
  std::vector<RatePoint> pts;
  for (const auto& r : table.rows) pts.push_back({r.n, r.error_norm});
  return fit_rate(pts, target_slope, tolerance);
}

namespace {

std::string fmt_index(Index v) { return std::to_string(v); }

}  // namespace

CsvTable rates_to_csv(const RatesTable& table) {
  CsvTable csv;
  csv.header = {"n",   "trial",  "lambda", "m", "sketch_kind", "filter",
                "tau", "a",      "error_norm", "proj_err", "eff_dim", "wall_ms"};
  for (const auto& r : table.rows) {
    csv.rows.push_back({fmt_index(r.n), std::to_string(r.trial),
                        format_double(r.lambda), fmt_index(r.m), r.sketch_kind,
                        r.filter, format_double(r.tau), format_double(r.a),
                        format_double(r.error_norm), format_double(r.proj_err),
                        format_double(r.eff_dim), format_double(r.wall_ms)});
  }
  return csv;
}

CsvTable sketchdim_to_csv(const SketchDimTable& table) {
  CsvTable csv;
  csv.header = {"m", "trial", "lambda", "proj_err", "error_norm", "wall_ms"};
  for (const auto& r : table.rows) {
    csv.rows.push_back({fmt_index(r.m), std::to_string(r.trial),
                        format_double(r.lambda), format_double(r.proj_err),
                        format_double(r.error_norm), format_double(r.wall_ms)});
  }
  return csv;
}

CsvTable diagnose_to_csv(const DiagnoseTable& table) {
  CsvTable csv;
  csv.header = {"trial",        "lambda",        "m_sketch",
                "m_als",        "proj_err_gaussian", "proj_err_als",
                "eff_dim_empirical", "eff_dim_population", "leverage_sum"};
  for (const auto& r : table.rows) {
    csv.rows.push_back({std::to_string(r.trial), format_double(r.lambda),
                        fmt_index(r.m_sketch), fmt_index(r.m_als),
                        format_double(r.proj_err_gaussian),
                        format_double(r.proj_err_als),
                        format_double(r.eff_dim_empirical),
                        format_double(r.eff_dim_population),
                        format_double(r.leverage_sum)});
  }
  return csv;
}

CsvTable real_data_to_csv(const RealDataTable& table) {
  CsvTable csv;
  csv.header = {"n", "trial", "lambda", "m", "test_mse", "wall_ms"};
  for (const auto& r : table.rows) {
    csv.rows.push_back({fmt_index(r.n), std::to_string(r.trial),
                        format_double(r.lambda), fmt_index(r.m),
                        format_double(r.test_mse), format_double(r.wall_ms)});
  }
  return csv;
}

const char* to_string(SketchRule rule) {
  switch (rule) {
    case SketchRule::Identity: return "identity";
    case SketchRule::Gaussian: return "gaussian";
    case SketchRule::Rademacher: return "rademacher";
    case SketchRule::RosHadamard: return "ros_hadamard";
    case SketchRule::NystromUniform: return "nystrom_uniform";
    case SketchRule::NystromAls: return "nystrom_als";
  }
  return "?";
}

const char* to_string(FilterFamily family) {
  return family == FilterFamily::IteratedRidge ? "iterated_ridge"
                                               : "spectral_cutoff";
}

}  // namespace sketchreg
