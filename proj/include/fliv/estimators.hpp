#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fliv/dataset.hpp"
#include "fliv/fda.hpp"

namespace fliv {

enum class Estimator { Oracle, MULTI2SLS, PW2SLS, SIMEX, Naive };

/// Table order: Oracle, MULTI-2SLS, PW-2SLS, SIMEX, Naive.
inline constexpr Estimator kAllEstimators[] = {Estimator::Oracle, Estimator::MULTI2SLS, Estimator::PW2SLS,
                                               Estimator::SIMEX, Estimator::Naive};

std::string_view display_name(Estimator e);   ///< "MULTI-2SLS"
std::string_view key_name(Estimator e);       ///< "multi2sls"
Estimator parse_estimator(std::string_view s);  ///< accepts either spelling, case-insensitive

struct FitResult {
  double beta0 = 0.0;
  Vector omega;        ///< basis weights
  Vector gamma;        ///< error-free covariate coefficients
  Vector beta1_curve;  ///< omega reconstructed on the grid
  int K = 0;
  Estimator estimator = Estimator::Naive;
  BasisPtr basis;
};

struct KRange {
  int min = 5;
  int max = 9;
};

// ---------------------------------------------------------------------------
// Basis-size selection
// ---------------------------------------------------------------------------

struct BicEntry {
  int K = 0;
  double log_rss = 0.0;  ///< log of the (weighted) mean squared residual
  double penalty = 0.0;  ///< (K + p) log(n) / n
  double bic() const { return log_rss + penalty; }
};

double bic_penalty(int K, int p, std::size_t n);

std::vector<BicEntry> bic_profile(const FunctionalSample& w, const Vector& y, const Matrix& z, KRange range,
                                  int order = 4, const std::optional<Vector>& weights = std::nullopt);

/// K in range minimizing BIC computed on the observed W; ties go to the smaller K.
int select_K_bic(const FunctionalSample& w, const Vector& y, const Matrix& z, KRange range, int order = 4,
                 const std::optional<Vector>& weights = std::nullopt);

// ---------------------------------------------------------------------------
// Estimators
// ---------------------------------------------------------------------------

/// Outcome regression of y on [1, scores, z], reconstructing beta_1 on the grid.
FitResult fit_outcome_model(const Matrix& scores, const Vector& y, const Matrix& z, const BasisPtr& basis,
                            Estimator tag, const std::optional<Vector>& weights = std::nullopt);

FitResult fit_naive(const FunctionalSample& w, const Vector& y, const Matrix& z, int K, int order = 4,
                    const std::optional<Vector>& weights = std::nullopt);

FitResult fit_oracle(const FunctionalSample& x, const Vector& y, const Matrix& z, int K, int order = 4,
                     const std::optional<Vector>& weights = std::nullopt);

/// Pointwise first stage W(t_l) ~ 1 + M(t_l) at every grid point.
FunctionalSample pointwise_first_stage(const FunctionalSample& w, const FunctionalSample& m,
                                       const std::optional<Vector>& weights = std::nullopt);

FitResult fit_pw2sls(const FunctionalSample& w, const FunctionalSample& m, const Vector& y, const Matrix& z,
                     int K, int order = 4, const std::optional<Vector>& weights = std::nullopt);

/// Fitted W-scores from regressing every W-score on [1, all M-scores].
Matrix multivariate_first_stage(const Matrix& w_scores, const Matrix& m_scores,
                                const std::optional<Vector>& weights = std::nullopt);

FitResult fit_multi2sls(const FunctionalSample& w, const FunctionalSample& m, const Vector& y, const Matrix& z,
                        int K, int order = 4, const std::optional<Vector>& weights = std::nullopt);

enum class Extrapolant { Quadratic };

struct SimexConfig {
  std::vector<double> lambda_grid = default_lambda_grid();
  int n_sim = 50;
  Extrapolant extrapolant = Extrapolant::Quadratic;
  int threads = 1;
  /// Replaces the estimated measurement-error covariance of the W-scores.
  std::optional<Matrix> sigma_uu_override;

  /// 0.0001, 0.0501, ..., 2.0001 (41 values).
  static std::vector<double> default_lambda_grid();
  static std::vector<double> lambda_grid_from(double max, double step, double start = 0.0001);
  void validate() const;
};

struct SimexTrace {
  Vector delta_hat;        ///< ratio estimate of delta(t) on the grid
  Matrix sigma_uu;         ///< K x K covariance used for the simulated errors
  std::vector<double> lambdas;
  Matrix mean_coefficients;  ///< L x P, row l = averaged (beta0, omega, gamma) at lambda_l
  Matrix extrapolant;        ///< 3 x P quadratic coefficients (a, b, c) per parameter
  Vector naive_coefficients; ///< (beta0, omega, gamma) of the unperturbed fit

  /// Fitted extrapolant evaluated at lambda for every parameter.
  Vector extrapolate(double lambda) const;
};

FitResult fit_simex(const FunctionalSample& w, const FunctionalSample& m, const Vector& y, const Matrix& z, int K,
                    const SimexConfig& cfg, std::uint64_t seed, int order = 4,
                    const std::optional<Vector>& weights = std::nullopt, SimexTrace* trace = nullptr);

// ---------------------------------------------------------------------------
// Dataset-level dispatch
// ---------------------------------------------------------------------------

struct EstimatorOptions {
  int order = 4;
  SimexConfig simex;
  std::uint64_t simex_seed = 0;
};

/// Fits one estimator on a dataset with a fixed K. Oracle requires d.x.
FitResult fit_estimator(Estimator e, const Dataset& d, int K, const EstimatorOptions& opts = {});

}  // namespace fliv
