#include "fliv/estimators.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

#include "fliv/errors.hpp"
#include "fliv/linmod.hpp"
#include "fliv/parallel.hpp"
#include "fliv/rng.hpp"

namespace fliv {

std::string_view display_name(Estimator e) {
  switch (e) {
    case Estimator::Oracle: return "Oracle";
    case Estimator::MULTI2SLS: return "MULTI-2SLS";
    case Estimator::PW2SLS: return "PW-2SLS";
    case Estimator::SIMEX: return "SIMEX";
    case Estimator::Naive: return "Naive";
  }
  return "?";
}

std::string_view key_name(Estimator e) {
  switch (e) {
    case Estimator::Oracle: return "oracle";
    case Estimator::MULTI2SLS: return "multi2sls";
    case Estimator::PW2SLS: return "pw2sls";
    case Estimator::SIMEX: return "simex";
    case Estimator::Naive: return "naive";
  }
  return "?";
}

Estimator parse_estimator(std::string_view s) {
  std::string norm;
  for (char c : s)
    if (c != '-' && c != '_') norm.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  for (Estimator e : kAllEstimators)
    if (norm == key_name(e)) return e;
  fail(ErrorKind::InvalidConfig, "unknown estimator '" + std::string(s) + "'");
}

namespace {

Matrix outcome_design(const Matrix& scores, const Matrix& z) {
  const Eigen::Index n = scores.rows();
  Matrix design(n, 1 + scores.cols() + z.cols());
  design.col(0).setOnes();
  design.middleCols(1, scores.cols()) = scores;
  design.rightCols(z.cols()) = z;
  return design;
}

void check_outcome_inputs(const FunctionalSample& f, const Vector& y, const Matrix& z) {
  if (static_cast<Eigen::Index>(f.n()) != y.size() || z.rows() != y.size()) {
    std::ostringstream msg;
    msg << "inconsistent row counts: curves " << f.n() << ", outcome " << y.size() << ", covariates " << z.rows();
    fail(ErrorKind::Dimension, msg.str());
  }
}

void check_shared_grid(const FunctionalSample& w, const FunctionalSample& m) {
  if (!(w.grid == m.grid)) fail(ErrorKind::GridMismatch, "W and M must share one grid");
  if (w.n() != m.n()) fail(ErrorKind::Dimension, "W and M have different numbers of subjects");
}

}  // namespace

// ---------------------------------------------------------------------------
// Outcome model and BIC
// ---------------------------------------------------------------------------

FitResult fit_outcome_model(const Matrix& scores, const Vector& y, const Matrix& z, const BasisPtr& basis,
                            Estimator tag, const std::optional<Vector>& weights) {
  const RegressionFit fit = ols_fit(outcome_design(scores, z), y, weights);
  const Eigen::Index K = scores.cols();
  FitResult out;
  out.beta0 = fit.coefficients[0];
  out.omega = fit.coefficients.segment(1, K);
  out.gamma = fit.coefficients.tail(z.cols());
  out.beta1_curve = reconstruct_coefficient(out.omega, *basis);
  out.K = static_cast<int>(K);
  out.estimator = tag;
  out.basis = basis;
  return out;
}

double bic_penalty(int K, int p, std::size_t n) {
  const double nn = static_cast<double>(n);
  return static_cast<double>(K + p) * std::log(nn) / nn;
}

std::vector<BicEntry> bic_profile(const FunctionalSample& w, const Vector& y, const Matrix& z, KRange range,
                                  int order, const std::optional<Vector>& weights) {
  check_outcome_inputs(w, y, z);
  const auto n = static_cast<long>(w.n());
  const auto p = static_cast<long>(z.cols());
  if (range.min > range.max || range.min < order || range.max > n - p - 2) {
    std::ostringstream msg;
    msg << "K range [" << range.min << ", " << range.max << "] must lie within [" << order << ", " << (n - p - 2)
        << "]";
    fail(ErrorKind::InvalidArgument, msg.str());
  }
  const double weight_total = weights ? weights->sum() : static_cast<double>(n);
  std::vector<BicEntry> out;
  for (int K = range.min; K <= range.max; ++K) {
    try {
      const BasisPtr basis = build_bspline_basis(K, order, w.grid);
      const Matrix scores = project_scores(w, basis).scores;
      const RegressionFit fit = ols_fit(outcome_design(scores, z), y, weights);
      out.push_back({K, std::log(fit.rss / weight_total), bic_penalty(K, static_cast<int>(p), w.n())});
    } catch (const Error& e) {
      std::ostringstream msg;
      msg << "BIC fit failed at K=" << K << ": " << e.what();
      throw Error(e.kind(), msg.str());
    }
  }
  return out;
}

int select_K_bic(const FunctionalSample& w, const Vector& y, const Matrix& z, KRange range, int order,
                 const std::optional<Vector>& weights) {
  const auto profile = bic_profile(w, y, z, range, order, weights);
  const BicEntry* best = &profile.front();
  for (const auto& entry : profile)
    if (entry.bic() < best->bic()) best = &entry;  // strict: earlier (smaller) K wins ties
  return best->K;
}

// ---------------------------------------------------------------------------
// Naive / Oracle
// ---------------------------------------------------------------------------

FitResult fit_naive(const FunctionalSample& w, const Vector& y, const Matrix& z, int K, int order,
                    const std::optional<Vector>& weights) {
  check_outcome_inputs(w, y, z);
  const BasisPtr basis = build_bspline_basis(K, order, w.grid);
  return fit_outcome_model(project_scores(w, basis).scores, y, z, basis, Estimator::Naive, weights);
}

FitResult fit_oracle(const FunctionalSample& x, const Vector& y, const Matrix& z, int K, int order,
                     const std::optional<Vector>& weights) {
  FitResult out = fit_naive(x, y, z, K, order, weights);
  out.estimator = Estimator::Oracle;
  return out;
}

// ---------------------------------------------------------------------------
// Two-stage least squares
// ---------------------------------------------------------------------------

FunctionalSample pointwise_first_stage(const FunctionalSample& w, const FunctionalSample& m,
                                       const std::optional<Vector>& weights) {
  check_shared_grid(w, m);
  const Eigen::Index n = w.values.rows();
  Matrix fitted(n, w.values.cols());
  Matrix design(n, 2);
  design.col(0).setOnes();
  for (Eigen::Index l = 0; l < w.values.cols(); ++l) {
    design.col(1) = m.values.col(l);
    try {
      const Vector alpha = LeastSquaresSolver(design, weights).solve(Vector(w.values.col(l)));
      fitted.col(l) = design * alpha;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::RankDeficient) throw;
      std::ostringstream msg;
      msg << "weak instrument: M is constant at t=" << w.grid[static_cast<std::size_t>(l)] << " (grid index " << l
          << ")";
      fail(ErrorKind::WeakInstrument, msg.str());
    }
  }
  return FunctionalSample(std::move(fitted), w.grid);
}

FitResult fit_pw2sls(const FunctionalSample& w, const FunctionalSample& m, const Vector& y, const Matrix& z, int K,
                     int order, const std::optional<Vector>& weights) {
  check_outcome_inputs(w, y, z);
  const FunctionalSample w_hat = pointwise_first_stage(w, m, weights);
  const BasisPtr basis = build_bspline_basis(K, order, w.grid);
  return fit_outcome_model(project_scores(w_hat, basis).scores, y, z, basis, Estimator::PW2SLS, weights);
}

Matrix multivariate_first_stage(const Matrix& w_scores, const Matrix& m_scores, const std::optional<Vector>& weights) {
  Matrix design(m_scores.rows(), 1 + m_scores.cols());
  design.col(0).setOnes();
  design.rightCols(m_scores.cols()) = m_scores;
  try {
    return design * multiresponse_ols(design, w_scores, weights);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::RankDeficient) throw;
    fail(ErrorKind::WeakInstrument, std::string("weak instrument: M-scores are collinear (") + e.what() + ")");
  }
}

FitResult fit_multi2sls(const FunctionalSample& w, const FunctionalSample& m, const Vector& y, const Matrix& z,
                        int K, int order, const std::optional<Vector>& weights) {
  check_outcome_inputs(w, y, z);
  check_shared_grid(w, m);
  const BasisPtr basis = build_bspline_basis(K, order, w.grid);
  const Matrix w_hat = multivariate_first_stage(project_scores(w, basis).scores, project_scores(m, basis).scores,
                                                weights);
  return fit_outcome_model(w_hat, y, z, basis, Estimator::MULTI2SLS, weights);
}

// ---------------------------------------------------------------------------
// SIMEX
// ---------------------------------------------------------------------------

std::vector<double> SimexConfig::default_lambda_grid() { return lambda_grid_from(2.0001, 0.05); }

std::vector<double> SimexConfig::lambda_grid_from(double max, double step, double start) {
  if (!(step > 0.0) || !(start > 0.0) || max < start)
    fail(ErrorKind::InvalidConfig, "lambda grid needs start > 0, step > 0 and max >= start");
  std::vector<double> grid;
  for (int i = 0;; ++i) {
    const double v = start + step * i;
    if (v > max + 1e-9) break;
    grid.push_back(v);
  }
  return grid;
}

void SimexConfig::validate() const {
  if (lambda_grid.size() < 3) fail(ErrorKind::InvalidConfig, "SIMEX needs at least 3 lambda values");
  for (std::size_t i = 0; i < lambda_grid.size(); ++i) {
    if (!(lambda_grid[i] > 0.0)) fail(ErrorKind::InvalidConfig, "SIMEX lambdas must be positive");
    if (i > 0 && !(lambda_grid[i] > lambda_grid[i - 1]))
      fail(ErrorKind::InvalidConfig, "SIMEX lambdas must be strictly increasing");
  }
  if (n_sim < 1) fail(ErrorKind::InvalidConfig, "SIMEX n_sim must be at least 1");
}

Vector SimexTrace::extrapolate(double lambda) const {
  return (extrapolant.row(0) + lambda * extrapolant.row(1) + lambda * lambda * extrapolant.row(2)).transpose();
}

FitResult fit_simex(const FunctionalSample& w, const FunctionalSample& m, const Vector& y, const Matrix& z, int K,
                    const SimexConfig& cfg, std::uint64_t seed, int order, const std::optional<Vector>& weights,
                    SimexTrace* trace) {
  cfg.validate();
  check_outcome_inputs(w, y, z);
  check_shared_grid(w, m);
  const Eigen::Index n = w.values.rows();
  const Eigen::Index P = 1 + K + z.cols();

  // Step 1: ratio estimate of delta(t), rescaled instrument M* = M / delta.
  const Vector w_mean = w.values.colwise().mean();
  const Vector m_mean = m.values.colwise().mean();
  for (Eigen::Index l = 0; l < w_mean.size(); ++l) {
    if (std::abs(w_mean[l]) < 1e-12) {
      std::ostringstream msg;
      msg << "ratio estimator undefined: mean of W is zero at t=" << w.grid[static_cast<std::size_t>(l)];
      fail(ErrorKind::RatioDegenerate, msg.str());
    }
  }
  const Vector delta_hat = m_mean.cwiseQuotient(w_mean);

  // Step 2: measurement-error covariance of the W-scores.
  const BasisPtr basis = build_bspline_basis(K, order, w.grid);
  const Matrix w_scores = project_scores(w, basis).scores;
  Matrix sigma_uu;
  if (cfg.sigma_uu_override) {
    sigma_uu = *cfg.sigma_uu_override;
    if (sigma_uu.rows() != K || sigma_uu.cols() != K) fail(ErrorKind::Dimension, "sigma_uu override must be K x K");
  } else {
    const FunctionalSample m_star(m.values * delta_hat.cwiseInverse().asDiagonal(), m.grid);
    const Matrix m_scores = project_scores(m_star, basis).scores;
    const Matrix c_mw = cross_covariance(m_scores, w_scores);
    sigma_uu = nearest_psd(cross_covariance(w_scores, w_scores) - 0.5 * (c_mw + c_mw.transpose()));
  }
  const Matrix factor_t = psd_factor(sigma_uu).transpose();

  // Steps 3-6: perturb the scores at every lambda, n_sim independent draws each.
  const Matrix base = outcome_design(w_scores, z);
  const std::size_t L = cfg.lambda_grid.size();
  const std::size_t draws = static_cast<std::size_t>(cfg.n_sim);
  std::vector<Vector> coefs(L * draws);
  parallel_for(L * draws, cfg.threads, [&](std::size_t task) {
    const std::size_t l = task / draws;
    const std::size_t b = task % draws;
    Rng rng = make_stream(seed, {l, b});
    std::normal_distribution<double> normal;
    Matrix noise(n, K);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index k = 0; k < K; ++k) noise(i, k) = normal(rng);
    Matrix design = base;
    design.middleCols(1, K) += std::sqrt(cfg.lambda_grid[l]) * (noise * factor_t);
    coefs[task] = LeastSquaresSolver(design, weights).solve(y);
  });

  Matrix mean_coef = Matrix::Zero(static_cast<Eigen::Index>(L), P);
  for (std::size_t l = 0; l < L; ++l) {
    Vector acc = Vector::Zero(P);
    for (std::size_t b = 0; b < draws; ++b) acc += coefs[l * draws + b];
    mean_coef.row(static_cast<Eigen::Index>(l)) = (acc / static_cast<double>(draws)).transpose();
  }

  // Step 7: quadratic extrapolant per parameter, evaluated at lambda = -1.
  Matrix lam_design(static_cast<Eigen::Index>(L), 3);
  for (std::size_t l = 0; l < L; ++l) {
    const double lam = cfg.lambda_grid[l];
    lam_design.row(static_cast<Eigen::Index>(l)) << 1.0, lam, lam * lam;
  }
  const Matrix quad = multiresponse_ols(lam_design, mean_coef);
  const Vector at_minus_one = (quad.row(0) - quad.row(1) + quad.row(2)).transpose();

  FitResult out;
  out.beta0 = at_minus_one[0];
  out.omega = at_minus_one.segment(1, K);
  out.gamma = at_minus_one.tail(z.cols());
  out.beta1_curve = reconstruct_coefficient(out.omega, *basis);
  out.K = K;
  out.estimator = Estimator::SIMEX;
  out.basis = basis;

  if (trace) {
    trace->delta_hat = delta_hat;
    trace->sigma_uu = sigma_uu;
    trace->lambdas = cfg.lambda_grid;
    trace->mean_coefficients = mean_coef;
    trace->extrapolant = quad;
    trace->naive_coefficients = LeastSquaresSolver(base, weights).solve(y);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Dispatch
// ---------------------------------------------------------------------------

FitResult fit_estimator(Estimator e, const Dataset& d, int K, const EstimatorOptions& opts) {
  switch (e) {
    case Estimator::Oracle:
      if (!d.x) fail(ErrorKind::InvalidArgument, "the Oracle estimator needs the latent curves X");
      return fit_oracle(*d.x, d.y, d.z, K, opts.order, d.weights);
    case Estimator::Naive: return fit_naive(d.w, d.y, d.z, K, opts.order, d.weights);
    case Estimator::PW2SLS: return fit_pw2sls(d.w, d.m, d.y, d.z, K, opts.order, d.weights);
    case Estimator::MULTI2SLS: return fit_multi2sls(d.w, d.m, d.y, d.z, K, opts.order, d.weights);
    case Estimator::SIMEX:
      return fit_simex(d.w, d.m, d.y, d.z, K, opts.simex, opts.simex_seed, opts.order, d.weights);
  }
  fail(ErrorKind::Internal, "unhandled estimator");
}

}  // namespace fliv
