#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "fliv/dataset.hpp"
#include "fliv/estimators.hpp"
#include "fliv/simgen.hpp"

namespace fliv {

// ---------------------------------------------------------------------------
// Monte Carlo
// ---------------------------------------------------------------------------

struct EstimatorSummary {
  Estimator estimator = Estimator::Naive;
  int successes = 0;
  int failures = 0;
  double abias2 = 0.0;
  double avar = 0.0;
  double aimse = 0.0;
  double mean_mspee = 0.0;
  double mspee_of_mean = 0.0;  ///< MSPEE of the ensemble mean curve
  double mean_fit_seconds = 0.0;
  Vector mean_curve;
  Vector lower;  ///< pointwise 2.5% across replicates
  Vector upper;  ///< pointwise 97.5% across replicates
  bool flagged = false;  ///< more than 1% of replicates failed
  std::string first_error;
};

struct MonteCarloReport {
  ScenarioConfig scenario;
  std::string label;
  int R = 0;
  std::vector<double> grid;
  Vector truth_curve;
  std::vector<EstimatorSummary> estimators;
  std::map<int, int> k_histogram;  ///< chosen K -> replicate count

  const EstimatorSummary& summary(Estimator e) const;
};

struct MonteCarloOptions {
  std::vector<Estimator> estimators{std::begin(kAllEstimators), std::end(kAllEstimators)};
  KRange k_range;
  EstimatorOptions fit;
  int threads = 0;  ///< 0 = all available cores; 1 = serial reference loop
};

/// R replicates of cfg; replicate r uses data from replicate_config(cfg, r), so
/// adding or removing estimators never changes the generated data.
MonteCarloReport run_monte_carlo(const ScenarioConfig& cfg, int R, const MonteCarloOptions& opts = {});

// ---------------------------------------------------------------------------
// Bootstrap
// ---------------------------------------------------------------------------

struct CoefInterval {
  std::string name;
  double estimate = 0.0;
  double lower = 0.0;
  double upper = 0.0;
};

struct BootstrapBand {
  std::vector<double> grid;
  Vector estimate;
  Vector lower;
  Vector upper;
  std::vector<bool> significant;  ///< band excludes zero at t
  int B = 0;
  double level = 0.95;
  int K = 0;  ///< basis size chosen on the full data
  CoefInterval beta0;
  std::vector<CoefInterval> gamma_intervals;
  int failed_resamples = 0;  ///< resamples dropped after exhausting retries
  int retries = 0;           ///< redraws caused by failed refits
  Matrix draws;              ///< successful resample curves (only with keep_draws)
};

struct BootstrapOptions {
  KRange k_range;
  EstimatorOptions fit;
  int threads = 0;
  int max_retries = 20;  ///< redraws allowed per resample
  bool keep_draws = false;
};

/// Percentile bootstrap over subjects; K is re-selected on every resample.
BootstrapBand bootstrap_ci(const Dataset& data, Estimator estimator, int B, double level, std::uint64_t seed,
                           const BootstrapOptions& opts = {});

/// Selects K by BIC on W and fits one estimator.
FitResult fit_with_selection(const Dataset& data, Estimator estimator, KRange range, const EstimatorOptions& opts);

// ---------------------------------------------------------------------------
// Timing
// ---------------------------------------------------------------------------

struct BenchmarkStats {
  Estimator estimator = Estimator::Naive;
  int reps = 0;
  int K = 0;
  double median_seconds = 0.0;
  double mean_seconds = 0.0;
  double min_seconds = 0.0;
  double max_seconds = 0.0;
};

/// Wall-clock per single fit on one pre-generated dataset (generation, K
/// selection and one warm-up fit are excluded from the timings).
BenchmarkStats benchmark_fit(const ScenarioConfig& cfg, Estimator estimator, int reps,
                             const EstimatorOptions& opts = {}, KRange range = {});

BenchmarkStats benchmark_fit(const Dataset& data, int K, Estimator estimator, int reps,
                             const EstimatorOptions& opts = {});

}  // namespace fliv
