// Experiment driver: rate sweeps, sketch-dimension sweeps, diagnostics, and a
// quick built-in timing mode. Configured by a JSON file plus dotted overrides.
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sketchreg/diagnostics.hpp"
#include "sketchreg/errors.hpp"
#include "sketchreg/estimator.hpp"
#include "sketchreg/experiment.hpp"
#include "sketchreg/kernels.hpp"
#include "sketchreg/linalg.hpp"
#include "sketchreg/report.hpp"
#include "sketchreg/sketch.hpp"
#include "sketchreg/synth.hpp"

namespace fs = std::filesystem;
using namespace sketchreg;

namespace {

struct CommonOpts {
  std::string config_path;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<int> threads;
  bool assert_checks = false;
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool config_required = true) {
  auto* c = cmd->add_option("--config", opts.config_path, "JSON config file");
  if (config_required) c->required();
  cmd->add_option("--override", opts.overrides,
                  "dotted key=value applied on top of the config (repeatable)");
  cmd->add_option("--seed", opts.seed, "master seed (overrides config)");
  cmd->add_option("--out", opts.out_dir, "output directory (overrides config)");
  cmd->add_option("--threads", opts.threads, "worker threads (overrides config)");
  cmd->add_flag("--assert", opts.assert_checks,
                "exit 4 if the mode's acceptance check fails");
}

ExperimentConfig resolve(const CommonOpts& opts) {
  ExperimentConfig cfg = load_config(opts.config_path, opts.overrides);
  if (opts.seed) cfg.master_seed = *opts.seed;
  if (opts.out_dir) cfg.out_dir = *opts.out_dir;
  if (opts.threads) cfg.threads = *opts.threads;
  fs::create_directories(cfg.out_dir);
  return cfg;
}

double target_slope_for(const ExperimentConfig& cfg) {
  const double zeta = cfg.model.zeta, gamma = cfg.model.gamma, a = cfg.norm_a;
  if (2.0 * zeta + gamma > 1.0) return -(zeta - a) / (2.0 * zeta + gamma);
  return -(zeta - a);
}

int run_rates_cmd(const CommonOpts& opts) {
  ExperimentConfig cfg = resolve(opts);
  if (cfg.dataset) {
    RealDataTable table = run_real_data(cfg);
    const std::string path = cfg.out_dir + "/realdata.csv";
    write_csv(path, real_data_to_csv(table));
    std::cout << "wrote " << path << " (" << table.rows.size() << " rows)\n";
    return 0;
  }
  RatesTable table = run_rates(cfg);
  const std::string path = cfg.out_dir + "/rates.csv";
  write_csv(path, rates_to_csv(table));
  std::cout << "wrote " << path << " (" << table.rows.size() << " rows)\n";

  std::vector<RatePoint> med = median_errors(table);
  bool have_fit = false;
  RateFit fit{};
  if (med.size() >= 3) {
    fit = fit_rate(med, target_slope_for(cfg), cfg.rate_tolerance);
    have_fit = true;
    std::cout << "slope " << format_double(fit.slope) << " target "
              << format_double(fit.target_slope) << " r2 "
              << format_double(fit.r_squared) << '\n';

    SvgSeries s;
    for (const auto& p : med) {
      s.x.push_back(static_cast<double>(p.n));
      s.y.push_back(p.error);
    }
    s.label = "median error";
    const std::string note = "slope " + format_double(fit.slope) + " (target " +
                             format_double(fit.target_slope) + ")";
    write_text_file(cfg.out_dir + "/rates.svg",
                    render_loglog_svg({s}, "error vs n", note));
  }
  if (opts.assert_checks) {
    if (!have_fit) {
      std::cerr << "assert: need at least 3 distinct n values for a slope fit\n";
      return 4;
    }
    if (!fit.within_tolerance) {
      std::cerr << "assert: slope " << format_double(fit.slope)
                << " outside tolerance " << format_double(cfg.rate_tolerance)
                << " of " << format_double(fit.target_slope) << '\n';
      return 4;
    }
  }
  return 0;
}

int run_sketchdim_cmd(const CommonOpts& opts) {
  ExperimentConfig cfg = resolve(opts);
  SketchDimTable table = run_sketchdim(cfg);
  const std::string path = cfg.out_dir + "/sketchdim.csv";
  write_csv(path, sketchdim_to_csv(table));
  std::cout << "wrote " << path << " (" << table.rows.size() << " rows)\n";

  // Median projection error per m, for the monotonicity check and the plot.
  std::vector<Index> ms;
  for (const auto& r : table.rows) ms.push_back(r.m);
  std::sort(ms.begin(), ms.end());
  ms.erase(std::unique(ms.begin(), ms.end()), ms.end());
  std::vector<double> med;
  for (Index m : ms) {
    std::vector<double> v;
    for (const auto& r : table.rows)
      if (r.m == m) v.push_back(r.proj_err);
    std::sort(v.begin(), v.end());
    med.push_back(v.size() % 2 ? v[v.size() / 2]
                               : 0.5 * (v[v.size() / 2 - 1] + v[v.size() / 2]));
  }
  SvgSeries s;
  for (size_t i = 0; i < ms.size(); ++i) {
    s.x.push_back(static_cast<double>(ms[i]));
    s.y.push_back(med[i]);
  }
  s.label = "median proj err";
  write_text_file(cfg.out_dir + "/sketchdim.svg",
                  render_loglog_svg({s}, "projection error vs m", ""));

  if (opts.assert_checks) {
    for (size_t i = 1; i < med.size(); ++i) {
      if (med[i] > med[i - 1] * (1.0 + 1e-9)) {
        std::cerr << "assert: median projection error increased from m="
                  << ms[i - 1] << " to m=" << ms[i] << '\n';
        return 4;
      }
    }
  }
  return 0;
}

int run_diagnose_cmd(const CommonOpts& opts) {
  ExperimentConfig cfg = resolve(opts);
  DiagnoseTable table = run_diagnose(cfg);
  const std::string path = cfg.out_dir + "/diagnose.csv";
  write_csv(path, diagnose_to_csv(table));
  std::cout << "wrote " << path << " (" << table.rows.size() << " rows)\n";

  int ok_gauss = 0, ok_als = 0;
  for (const auto& r : table.rows) {
    if (r.proj_err_gaussian <= 6.0 * r.lambda) ++ok_gauss;
    if (r.proj_err_als <= 3.0 * r.lambda) ++ok_als;
  }
  const int total = static_cast<int>(table.rows.size());
  std::cout << "gaussian proj err <= 6*lambda: " << ok_gauss << "/" << total
            << "\nals proj err <= 3*lambda: " << ok_als << "/" << total << '\n';
  if (opts.assert_checks) {
    if (ok_gauss * 100 < total * 95 || ok_als * 100 < total * 95) {
      std::cerr << "assert: projection-error bound frequency below 95%\n";
      return 4;
    }
  }
  return 0;
}

int run_bench_cmd(const CommonOpts& opts) {
  ExperimentConfig cfg =
      opts.config_path.empty() ? ExperimentConfig{} : resolve(opts);
  const Index n = cfg.n_grid.empty() ? 1024 : cfg.n_grid.back();
  const std::uint64_t seed = cfg.master_seed;

  SynthModel model = make_model(1.0, 0.5, std::min<Index>(n, 512), 1.0, 0.5,
                                0.05, seed);
  DataSet data = sample(model, n, seed + 1);
  auto time_it = [](const char* name, auto&& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    const double ms = std::chrono::duration<double, std::milli>(
                          std::chrono::steady_clock::now() - t0)
                          .count();
    std::printf("%-16s %10.2f ms\n", name, ms);
  };

  Matrix K;
  time_it("gram", [&] { K = gram(KernelSpec::linear(model.kappa_sq * 1.01), data); });
  time_it("sym_eig", [&] { linalg::sym_eig(K / static_cast<double>(n)); });
  Vector v = Vector::Random(Index{1} << 16);
  time_it("fwht_65536", [&] { fwht(v); });
  time_it("fit_identity", [&] {
    RegConfig reg;
    reg.lambda = theory_lambda(0.5, 1.0, n);
    reg.filter = FilterSpec::iterated_ridge(2);
    SketchOperator G = SketchOperator::make(SketchKind::Identity, n, n, 0);
    fit(K, data.labels, G, reg);
  });
  time_it("fit_gaussian_m256", [&] {
    RegConfig reg;
    reg.lambda = theory_lambda(0.5, 1.0, n);
    reg.filter = FilterSpec::iterated_ridge(2);
    SketchOperator G =
        SketchOperator::make(SketchKind::Gaussian, std::min<Index>(256, n), n, seed);
    fit(K, data.labels, G, reg);
  });
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sketched spectral-filter regression lab"};
  app.require_subcommand(1);

  CommonOpts rates_opts, sketchdim_opts, diagnose_opts, bench_opts;
  auto* rates = app.add_subcommand("rates", "convergence-rate sweep over n");
  add_common(rates, rates_opts);
  auto* sketchdim =
      app.add_subcommand("sketchdim", "sketch-dimension sweep at fixed n");
  add_common(sketchdim, sketchdim_opts);
  auto* diagnose =
      app.add_subcommand("diagnose", "projection-error and effective-dim checks");
  add_common(diagnose, diagnose_opts);
  auto* bench = app.add_subcommand("bench", "quick built-in timings");
  add_common(bench, bench_opts, /*config_required=*/false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) ? 2 : 0;
  }

  try {
    if (rates->parsed()) return run_rates_cmd(rates_opts);
    if (sketchdim->parsed()) return run_sketchdim_cmd(sketchdim_opts);
    if (diagnose->parsed()) return run_diagnose_cmd(diagnose_opts);
    if (bench->parsed()) return run_bench_cmd(bench_opts);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const ParseError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const InvalidValue& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << '\n';
    return 2;
  } catch (const InvalidModel& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
