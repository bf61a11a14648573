#include "fliv/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#include "fliv/errors.hpp"
#include "fliv/metrics.hpp"
#include "fliv/parallel.hpp"
#include "fliv/rng.hpp"

namespace fliv {

namespace {

enum : std::uint64_t { kSimexStream = 101, kBootstrapStream = 102 };

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

Vector column_quantile(const Matrix& rows, double p) {
  Vector out(rows.cols());
  std::vector<double> buf(static_cast<std::size_t>(rows.rows()));
  for (Eigen::Index l = 0; l < rows.cols(); ++l) {
    for (Eigen::Index r = 0; r < rows.rows(); ++r) buf[static_cast<std::size_t>(r)] = rows(r, l);
    out[l] = quantile_linear(buf, p);
  }
  return out;
}

Matrix take_rows(const Matrix& m, const std::vector<Eigen::Index>& rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = m.row(rows[i]);
  return out;
}

}  // namespace

const EstimatorSummary& MonteCarloReport::summary(Estimator e) const {
  for (const auto& s : estimators)
    if (s.estimator == e) return s;
  fail(ErrorKind::InvalidArgument, "report has no entry for " + std::string(display_name(e)));
}

FitResult fit_with_selection(const Dataset& data, Estimator estimator, KRange range, const EstimatorOptions& opts) {
  const int K = select_K_bic(data.w, data.y, data.z, range, opts.order, data.weights);
  return fit_estimator(estimator, data, K, opts);
}

// ---------------------------------------------------------------------------
// Monte Carlo
// ---------------------------------------------------------------------------

MonteCarloReport run_monte_carlo(const ScenarioConfig& cfg, int R, const MonteCarloOptions& opts) {
  if (R < 1) fail(ErrorKind::InvalidArgument, "Monte Carlo needs at least one replicate");
  if (opts.estimators.empty()) fail(ErrorKind::InvalidArgument, "no estimators requested");
  cfg.validate();

  const TimeGrid grid = TimeGrid::uniform(cfg.n_grid);
  const Vector truth = true_beta1_curve(grid);
  const std::size_t E = opts.estimators.size();
  const auto G = static_cast<Eigen::Index>(grid.size());
  const auto reps = static_cast<std::size_t>(R);

  // Per-replicate slots; the reduction below runs in replicate order.
  std::vector<Matrix> curves(E, Matrix::Zero(R, G));
  std::vector<std::vector<char>> ok(E, std::vector<char>(reps, 0));
  std::vector<std::vector<double>> secs(E, std::vector<double>(reps, 0.0));
  std::vector<std::vector<std::string>> errors(E, std::vector<std::string>(reps));
  std::vector<int> chosen_k(reps, 0);

  parallel_for(reps, resolve_threads(opts.threads), [&](std::size_t r) {
    const ScenarioConfig rcfg = replicate_config(cfg, r);
    const Dataset data = generate_dataset(rcfg);
    int K = 0;
    try {
      K = select_K_bic(data.w, data.y, data.z, opts.k_range, opts.fit.order, data.weights);
    } catch (const Error& e) {
      for (std::size_t j = 0; j < E; ++j) errors[j][r] = e.what();
      return;
    }
    chosen_k[r] = K;
    EstimatorOptions fit_opts = opts.fit;
    fit_opts.simex.threads = 1;
    fit_opts.simex_seed = derive_seed(rcfg.seed, {kSimexStream});
    for (std::size_t j = 0; j < E; ++j) {
      try {
        const auto start = Clock::now();
        const FitResult fit = fit_estimator(opts.estimators[j], data, K, fit_opts);
        secs[j][r] = seconds_since(start);
        curves[j].row(static_cast<Eigen::Index>(r)) = fit.beta1_curve.transpose();
        ok[j][r] = 1;
      } catch (const Error& e) {
        errors[j][r] = e.what();
      }
    }
  });

  MonteCarloReport report;
  report.scenario = cfg;
  report.label = cfg.label();
  report.R = R;
  report.grid = grid.points();
  report.truth_curve = truth;
  for (int k : chosen_k)
    if (k > 0) ++report.k_histogram[k];

  for (std::size_t j = 0; j < E; ++j) {
    EstimatorSummary s;
    s.estimator = opts.estimators[j];
    std::vector<Eigen::Index> good;
    double time_total = 0.0;
    for (std::size_t r = 0; r < reps; ++r) {
      if (ok[j][r]) {
        good.push_back(static_cast<Eigen::Index>(r));
        time_total += secs[j][r];
      } else if (s.first_error.empty()) {
        s.first_error = errors[j][r];
      }
    }
    s.successes = static_cast<int>(good.size());
    s.failures = R - s.successes;
    s.flagged = s.failures * 100 > R;
    if (!good.empty()) {
      const CurveEnsemble ens(take_rows(curves[j], good), truth, grid);
      s.abias2 = abias2(ens);
      s.avar = avar(ens);
      s.aimse = s.abias2 + s.avar;
      double mspee_total = 0.0;
      for (Eigen::Index r = 0; r < ens.curves.rows(); ++r)
        mspee_total += mspee(ens.curves.row(r).transpose(), truth, grid);
      s.mean_mspee = mspee_total / static_cast<double>(good.size());
      s.mean_fit_seconds = time_total / static_cast<double>(good.size());
      s.mean_curve = ens.mean_curve();
      s.mspee_of_mean = mspee(s.mean_curve, truth, grid);
      s.lower = column_quantile(ens.curves, 0.025);
      s.upper = column_quantile(ens.curves, 0.975);
    }
    report.estimators.push_back(std::move(s));
  }
  return report;
}

// ---------------------------------------------------------------------------
// Bootstrap
// ---------------------------------------------------------------------------

BootstrapBand bootstrap_ci(const Dataset& data, Estimator estimator, int B, double level, std::uint64_t seed,
                           const BootstrapOptions& opts) {
  if (B < 2) fail(ErrorKind::InvalidArgument, "bootstrap needs B >= 2");
  if (!(level > 0.0 && level < 1.0)) fail(ErrorKind::InvalidArgument, "confidence level must lie in (0, 1)");
  data.validate();

  EstimatorOptions base_opts = opts.fit;
  base_opts.simex_seed = derive_seed(seed, {kSimexStream});
  const FitResult full = fit_with_selection(data, estimator, opts.k_range, base_opts);

  const std::size_t n = data.n();
  const auto P = static_cast<Eigen::Index>(data.z.cols());
  const auto G = full.beta1_curve.size();
  const auto draws = static_cast<std::size_t>(B);
  Matrix curves(B, G);
  Matrix gammas(B, P);
  Vector beta0s(B);
  std::vector<char> ok(draws, 0);
  std::vector<int> redraws(draws, 0);

  parallel_for(draws, resolve_threads(opts.threads), [&](std::size_t b) {
    for (int attempt = 0; attempt <= opts.max_retries; ++attempt) {
      Rng rng = make_stream(seed, {kBootstrapStream, b, static_cast<std::uint64_t>(attempt)});
      std::uniform_int_distribution<Eigen::Index> pick(0, static_cast<Eigen::Index>(n) - 1);
      std::vector<Eigen::Index> rows(n);
      for (auto& r : rows) r = pick(rng);
      try {
        EstimatorOptions fit_opts = opts.fit;
        fit_opts.simex.threads = 1;
        fit_opts.simex_seed = derive_seed(seed, {kSimexStream, b, static_cast<std::uint64_t>(attempt)});
        const FitResult fit = fit_with_selection(data.select_rows(rows), estimator, opts.k_range, fit_opts);
        curves.row(static_cast<Eigen::Index>(b)) = fit.beta1_curve.transpose();
        gammas.row(static_cast<Eigen::Index>(b)) = fit.gamma.transpose();
        beta0s[static_cast<Eigen::Index>(b)] = fit.beta0;
        ok[b] = 1;
        return;
      } catch (const Error&) {
        ++redraws[b];
      }
    }
  });

  std::vector<Eigen::Index> good;
  BootstrapBand band;
  for (std::size_t b = 0; b < draws; ++b) {
    if (ok[b]) good.push_back(static_cast<Eigen::Index>(b));
    band.retries += redraws[b] - (ok[b] ? 0 : 1);
  }
  band.failed_resamples = B - static_cast<int>(good.size());
  if (good.size() < 2) fail(ErrorKind::InsufficientData, "fewer than two bootstrap refits succeeded");

  const double lo_p = (1.0 - level) / 2.0;
  const double hi_p = (1.0 + level) / 2.0;
  const Matrix kept_curves = take_rows(curves, good);
  const Matrix kept_gammas = take_rows(gammas, good);
  const Matrix kept_beta0 = take_rows(beta0s, good);

  band.grid = data.grid().points();
  band.estimate = full.beta1_curve;
  band.lower = column_quantile(kept_curves, lo_p);
  band.upper = column_quantile(kept_curves, hi_p);
  band.significant.resize(static_cast<std::size_t>(G));
  for (Eigen::Index l = 0; l < G; ++l)
    band.significant[static_cast<std::size_t>(l)] = band.lower[l] > 0.0 || band.upper[l] < 0.0;
  if (opts.keep_draws) band.draws = kept_curves;
  band.B = B;
  band.level = level;
  band.K = full.K;
  band.beta0 = {"beta0", full.beta0, column_quantile(kept_beta0, lo_p)[0], column_quantile(kept_beta0, hi_p)[0]};
  const Vector g_lo = column_quantile(kept_gammas, lo_p);
  const Vector g_hi = column_quantile(kept_gammas, hi_p);
  for (Eigen::Index j = 0; j < P; ++j) {
    std::string name = j < static_cast<Eigen::Index>(data.z_names.size())
                           ? data.z_names[static_cast<std::size_t>(j)]
                           : "z" + std::to_string(j + 1);
    band.gamma_intervals.push_back({std::move(name), full.gamma[j], g_lo[j], g_hi[j]});
  }
  return band;
}

// ---------------------------------------------------------------------------
// Timing
// ---------------------------------------------------------------------------

BenchmarkStats benchmark_fit(const Dataset& data, int K, Estimator estimator, int reps, const EstimatorOptions& opts) {
  if (reps < 1) fail(ErrorKind::InvalidArgument, "benchmark needs at least one repetition");
  (void)fit_estimator(estimator, data, K, opts);  // warm-up
  std::vector<double> times;
  times.reserve(static_cast<std::size_t>(reps));
  for (int i = 0; i < reps; ++i) {
    const auto start = Clock::now();
    const FitResult fit = fit_estimator(estimator, data, K, opts);
    times.push_back(seconds_since(start));
    if (fit.K != K) fail(ErrorKind::Internal, "benchmark fit used an unexpected K");
  }
  BenchmarkStats stats;
  stats.estimator = estimator;
  stats.reps = reps;
  stats.K = K;
  stats.median_seconds = quantile_linear(times, 0.5);
  stats.min_seconds = *std::min_element(times.begin(), times.end());
  stats.max_seconds = *std::max_element(times.begin(), times.end());
  double total = 0.0;
  for (double t : times) total += t;
  stats.mean_seconds = total / reps;
  return stats;
}

BenchmarkStats benchmark_fit(const ScenarioConfig& cfg, Estimator estimator, int reps, const EstimatorOptions& opts,
                             KRange range) {
  const Dataset data = generate_dataset(replicate_config(cfg, 0));
  const int K = select_K_bic(data.w, data.y, data.z, range, opts.order, data.weights);
  return benchmark_fit(data, K, estimator, reps, opts);
}

}  // namespace fliv
