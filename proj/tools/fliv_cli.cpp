#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fliv/config.hpp"
#include "fliv/errors.hpp"
#include "fliv/harness.hpp"
#include "fliv/ingest.hpp"
#include "fliv/metrics.hpp"
#include "fliv/report_io.hpp"

namespace {

using namespace fliv;
using nlohmann::json;

struct Flags {
  std::optional<std::string> config;
  std::optional<std::string> preset;
  std::optional<std::size_t> n;
  std::optional<std::size_t> n_grid;
  std::optional<int> reps;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> estimators;
  std::optional<int> k_min;
  std::optional<int> k_max;
  std::optional<int> simex_nsim;
  std::optional<double> lambda_max;
  std::optional<double> lambda_step;
  std::optional<int> bootstrap_reps;
  std::optional<double> level;
  std::optional<int> threads;
  std::optional<int> bench_reps;
  std::optional<std::string> out;
  std::optional<std::string> format;
  std::optional<std::string> export_data;
  std::optional<std::string> long_csv;
  std::optional<std::string> outcomes;
  std::optional<std::string> covariates;
  std::optional<std::string> weight;
};

void add_common(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config, "JSON config file; flags override its values");
  cmd->add_option("--estimators", f.estimators, "comma list of oracle,multi2sls,pw2sls,simex,naive or 'all'");
  cmd->add_option("--k-min", f.k_min, "smallest basis size searched by BIC (default 5)");
  cmd->add_option("--k-max", f.k_max, "largest basis size searched by BIC (default 9)");
  cmd->add_option("--simex-nsim", f.simex_nsim, "SIMEX draws per lambda (default 50)");
  cmd->add_option("--lambda-max", f.lambda_max, "largest SIMEX lambda (default 2.0001)");
  cmd->add_option("--lambda-step", f.lambda_step, "SIMEX lambda spacing (default 0.05)");
  cmd->add_option("--seed", f.seed, "master seed (default 1)");
  cmd->add_option("--threads", f.threads, "worker threads, 0 = all cores (default 0)");
  cmd->add_option("--out", f.out, "output file");
  cmd->add_option("--format", f.format, "csv or json (default csv)");
}

void add_scenario(CLI::App* cmd, Flags& f) {
  cmd->add_option("--preset", f.preset, "study1 ... study5");
  cmd->add_option("--n", f.n, "sample size override");
  cmd->add_option("--n-grid", f.n_grid, "grid size override");
}

void add_data(CLI::App* cmd, Flags& f) {
  cmd->add_option("--long-csv", f.long_csv, "long-format W/M curve records");
  cmd->add_option("--outcomes", f.outcomes, "outcome file keyed by subject");
  cmd->add_option("--covariates", f.covariates, "comma list of scalar covariate columns");
  cmd->add_option("--weight", f.weight, "observation weight column");
}

std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

RunConfig resolve(Command command, const Flags& f) {
  RunConfig c = f.config ? load_config_file(*f.config) : RunConfig{};
  c.command = command;
  json j = json::object();
  if (f.preset) j["preset"] = *f.preset;
  if (f.n) j["n"] = *f.n;
  if (f.n_grid) j["n_grid"] = *f.n_grid;
  if (f.reps) j["reps"] = *f.reps;
  if (f.seed) j["seed"] = *f.seed;
  if (f.estimators) j["estimators"] = *f.estimators;
  if (f.k_min) j["k_min"] = *f.k_min;
  if (f.k_max) j["k_max"] = *f.k_max;
  if (f.simex_nsim) j["simex_nsim"] = *f.simex_nsim;
  if (f.lambda_max) j["lambda_max"] = *f.lambda_max;
  if (f.lambda_step) j["lambda_step"] = *f.lambda_step;
  if (f.bootstrap_reps) j["bootstrap_reps"] = *f.bootstrap_reps;
  if (f.level) j["level"] = *f.level;
  if (f.threads) j["threads"] = *f.threads;
  if (f.bench_reps) j["bench_reps"] = *f.bench_reps;
  if (f.out) j["out"] = *f.out;
  if (f.format) j["format"] = *f.format;
  if (f.export_data) j["export_data"] = *f.export_data;
  if (f.long_csv) j["long_csv"] = *f.long_csv;
  if (f.outcomes) j["outcomes_csv"] = *f.outcomes;
  if (f.covariates) j["covariates"] = split(*f.covariates);
  if (f.weight) j["weight"] = *f.weight;
  c = config_from_json(j, std::move(c));
  c.validate();
  return c;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int run_simulate(const RunConfig& c) {
  const json echo = config_to_json(c);
  MonteCarloOptions opts;
  opts.estimators = c.estimators;
  opts.k_range = c.k_range;
  opts.fit = c.estimator_options();
  opts.threads = c.threads;

  const auto scenarios = c.scenarios();
  if (c.export_data) {
    for (std::size_t i = 0; i < scenarios.size(); ++i) {
      char stem[32];
      std::snprintf(stem, sizeof stem, "scenario_%02zu", i + 1);
      const auto dir = std::filesystem::path(*c.export_data);
      std::filesystem::create_directories(dir);
      export_dataset_csv(generate_dataset(replicate_config(scenarios[i], 0)),
                         (dir / (std::string(stem) + "_long.csv")).string(),
                         (dir / (std::string(stem) + "_outcomes.csv")).string());
    }
  }

  std::vector<MonteCarloReport> reports;
  int flagged = 0;
  for (std::size_t i = 0; i < scenarios.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    reports.push_back(run_monte_carlo(scenarios[i], c.reps, opts));
    std::fprintf(stderr, "[%zu/%zu] %s  (%.1fs)\n", i + 1, scenarios.size(), reports.back().label.c_str(),
                 seconds_since(t0));
    for (const auto& s : reports.back().estimators) {
      if (!s.flagged) continue;
      ++flagged;
      std::fprintf(stderr, "  %s: %d of %d replicates failed: %s\n", std::string(display_name(s.estimator)).c_str(),
                   s.failures, c.reps, s.first_error.c_str());
    }
  }
  emit_report(reports, c.format, c.out, echo);
  return flagged == 0 ? 0 : 1;
}

Dataset load_data(const RunConfig& c) {
  const auto records = load_long_csv(*c.long_csv, c.long_schema, c.max_bad_fraction);
  if (!records.issues.empty())
    std::fprintf(stderr, "skipped %zu malformed rows (first at line %zu: %s)\n", records.issues.size(),
                 records.issues.front().line, records.issues.front().message.c_str());
  const auto curves = preprocess(records, c.preprocess);
  auto assembled = assemble_dataset(curves, *c.outcomes_csv, c.outcome_schema);
  std::fprintf(stderr, "subjects: %lld (dropped %d by preprocessing, %zu without outcome, %zu outcome rows unmatched)\n",
               static_cast<long long>(assembled.data.n()), curves.dropped_subjects,
               assembled.unmatched_curves.size(), assembled.unmatched_outcomes.size());
  return std::move(assembled.data);
}

int run_fit(const RunConfig& c) {
  const Dataset data = load_data(c);
  const auto opts = c.estimator_options();
  const FitResult naive = fit_with_selection(data, Estimator::Naive, c.k_range, opts);
  std::vector<FitRecord> fits;
  for (Estimator e : c.estimators) {
    if (e == Estimator::Oracle && !data.x) {
      std::fprintf(stderr, "oracle skipped: no latent curves in the data\n");
      continue;
    }
    FitRecord rec{e == Estimator::Naive ? naive : fit_with_selection(data, e, c.k_range, opts), std::nullopt};
    if (e != Estimator::Naive) rec.vs_naive = percent_difference(rec.fit.beta1_curve, naive.beta1_curve);
    std::fprintf(stderr, "%-10s K=%d beta0=%.6g", std::string(display_name(e)).c_str(), rec.fit.K, rec.fit.beta0);
    if (rec.vs_naive) std::fprintf(stderr, " vs naive=%.1f%%", rec.vs_naive->percent);
    std::fprintf(stderr, "\n");
    fits.push_back(std::move(rec));
  }
  write_fit(fits, data.z_names, data.grid().points(), c.format, c.out, config_to_json(c));
  return 0;
}

int run_bootstrap(const RunConfig& c) {
  const Dataset data = load_data(c);
  BootstrapOptions opts;
  opts.k_range = c.k_range;
  opts.fit = c.estimator_options();
  opts.fit.simex.threads = 1;
  opts.threads = c.threads;
  const auto band = bootstrap_ci(data, c.estimators.front(), c.bootstrap_reps, c.level, c.seed, opts);
  std::fprintf(stderr, "B=%d K=%d retries=%d failed=%d\n", band.B, band.K, band.retries, band.failed_resamples);
  write_band(band, c.format, c.out, config_to_json(c));
  return band.failed_resamples == 0 ? 0 : 1;
}

int run_bench(const RunConfig& c) {
  const auto opts = c.estimator_options();
  json rows = json::array();
  std::ostringstream csv;
  csv << "scenario,estimator,K,reps,median_seconds,mean_seconds,min_seconds,max_seconds\n";
  for (const auto& s : c.scenarios()) {
    for (Estimator e : c.estimators) {
      const auto b = benchmark_fit(s, e, c.bench_reps, opts, c.k_range);
      std::fprintf(stderr, "%-10s n=%zu K=%d median %.6fs\n", std::string(display_name(e)).c_str(), s.n, b.K,
                   b.median_seconds);
      csv << s.label() << ',' << key_name(e) << ',' << b.K << ',' << b.reps << ',' << b.median_seconds << ','
          << b.mean_seconds << ',' << b.min_seconds << ',' << b.max_seconds << '\n';
      rows.push_back({{"scenario", s.label()},
                      {"estimator", std::string(key_name(e))},
                      {"K", b.K},
                      {"reps", b.reps},
                      {"median_seconds", b.median_seconds},
                      {"mean_seconds", b.mean_seconds},
                      {"min_seconds", b.min_seconds},
                      {"max_seconds", b.max_seconds}});
    }
  }
  const json echo = config_to_json(c);
  std::string body = c.format == ReportFormat::Json ? json{{"config", echo}, {"timings", rows}}.dump(1) + "\n"
                                                    : "# config=" + echo.dump() + "\n" + csv.str();
  if (c.out.empty()) {
    std::cout << body;
  } else {
    std::ofstream out(c.out, std::ios::binary);
    if (!(out << body)) fail(ErrorKind::Io, "cannot write '" + c.out + "'");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Measurement-error-corrected scalar-on-function regression with a functional instrument"};
  app.require_subcommand(1, 1);
  Flags f;

  auto* simulate = app.add_subcommand("simulate", "Monte Carlo study over a preset or inline scenario");
  add_common(simulate, f);
  add_scenario(simulate, f);
  simulate->add_option("--reps", f.reps, "replicates per scenario (default 500)");
  simulate->add_option("--export-data", f.export_data, "write replicate-0 data of each scenario as CSV here");

  auto* fit = app.add_subcommand("fit", "fit estimators on ingested data");
  add_common(fit, f);
  add_data(fit, f);

  auto* boot = app.add_subcommand("bootstrap", "percentile bootstrap bands for one estimator");
  add_common(boot, f);
  add_data(boot, f);
  boot->add_option("--bootstrap-reps", f.bootstrap_reps, "bootstrap resamples (default 500)");
  boot->add_option("--level", f.level, "confidence level (default 0.95)");

  auto* bench = app.add_subcommand("bench", "median single-fit time per estimator");
  add_common(bench, f);
  add_scenario(bench, f);
  bench->add_option("--bench-reps", f.bench_reps, "timed fits per estimator (default 20)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  CLI::App* chosen = app.get_subcommands().front();
  const Command command = simulate->parsed()  ? Command::Simulate
                          : fit->parsed()     ? Command::Fit
                          : boot->parsed()    ? Command::Bootstrap
                                              : Command::Bench;
  RunConfig cfg;
  try {
    cfg = resolve(command, f);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n\n" << chosen->help();
    return 2;
  }

  try {
    switch (command) {
      case Command::Simulate: return run_simulate(cfg);
      case Command::Fit: return run_fit(cfg);
      case Command::Bootstrap: return run_bootstrap(cfg);
      case Command::Bench: return run_bench(cfg);
    }
  } catch (const Error& e) {
    std::cerr << "error [" << to_string(e.kind()) << "]: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
