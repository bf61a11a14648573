#include "fliv/simgen.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>
#include <sstream>

#include "fliv/errors.hpp"
#include "fliv/linmod.hpp"
#include "fliv/rng.hpp"

namespace fliv {

namespace {

enum : std::uint64_t {
  kStreamX = 1,
  kStreamU = 2,
  kStreamEta = 3,
  kStreamZc = 4,
  kStreamZb = 5,
  kStreamEps = 6,
  kStreamReplicate = 7,
  kSubGauss = 11,
  kSubMixer = 12,
};

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& ch : out) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return out;
}

}  // namespace

std::string_view to_string(CovStructure s) {
  switch (s) {
    case CovStructure::IND: return "IND";
    case CovStructure::AR1: return "AR1";
    case CovStructure::CS: return "CS";
    case CovStructure::UN: return "UN";
  }
  return "?";
}

std::string_view to_string(ErrorLaw d) {
  switch (d) {
    case ErrorLaw::Normal: return "normal";
    case ErrorLaw::StudentT: return "t";
    case ErrorLaw::Laplace: return "laplace";
  }
  return "?";
}

CovStructure parse_structure(std::string_view s) {
  const std::string v = lower(s);
  if (v == "ind") return CovStructure::IND;
  if (v == "ar1" || v == "ar(1)") return CovStructure::AR1;
  if (v == "cs") return CovStructure::CS;
  if (v == "un") return CovStructure::UN;
  fail(ErrorKind::InvalidConfig, "unknown covariance structure '" + std::string(s) + "'");
}

ErrorLaw parse_error_law(std::string_view s) {
  const std::string v = lower(s);
  if (v == "normal" || v == "gaussian") return ErrorLaw::Normal;
  if (v == "t" || v == "studentt" || v == "student-t") return ErrorLaw::StudentT;
  if (v == "laplace") return ErrorLaw::Laplace;
  fail(ErrorKind::InvalidConfig, "unknown measurement error law '" + std::string(s) + "'");
}

void ScenarioConfig::validate() const {
  if (n < 10) fail(ErrorKind::InvalidConfig, "scenario needs n >= 10");
  if (n_grid < 20) fail(ErrorKind::InvalidConfig, "scenario needs n_grid >= 20");
  if (!(c >= 0.0)) fail(ErrorKind::InvalidConfig, "instrument constant c must be >= 0");
  for (const CovarianceSpec* spec : {&cov_x, &cov_u, &cov_m}) {
    if (!(spec->sigma >= 0.0)) fail(ErrorKind::InvalidConfig, "standard deviations must be >= 0");
    if (!(spec->rho >= 0.0) || !(spec->rho < 1.0)) fail(ErrorKind::InvalidCorrelation, "rho must lie in [0, 1)");
  }
}

std::string ScenarioConfig::label() const {
  std::ostringstream out;
  auto spec = [&](const char* name, const CovarianceSpec& s) {
    out << ' ' << name << '=' << to_string(s.structure) << '(' << s.effective_rho() << ")x" << s.sigma;
  };
  out << "n=" << n << " grid=" << n_grid;
  spec("X", cov_x);
  spec("U", cov_u);
  spec("M", cov_m);
  out << " c=" << c << " me=" << to_string(me_dist);
  return out.str();
}

// ---------------------------------------------------------------------------
// Covariance structures
// ---------------------------------------------------------------------------

Matrix build_correlation(CovStructure structure, double rho, std::size_t dim, std::uint64_t seed) {
  if (!(rho >= 0.0) || !(rho < 1.0)) {
    std::ostringstream msg;
    msg << "correlation rho=" << rho << " outside [0, 1)";
    fail(ErrorKind::InvalidCorrelation, msg.str());
  }
  const auto d = static_cast<Eigen::Index>(dim);
  Matrix r = Matrix::Identity(d, d);
  switch (structure) {
    case CovStructure::IND: break;
    case CovStructure::AR1:
      for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = 0; j < d; ++j) r(i, j) = std::pow(rho, static_cast<double>(std::abs(i - j)));
      break;
    case CovStructure::CS:
      r.setConstant(rho);
      r.diagonal().setOnes();
      break;
    case CovStructure::UN: {
      Rng rng(derive_seed(seed, {dim}));
      std::uniform_real_distribution<double> u(0.5, 1.5);
      for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = i + 1; j < d; ++j) r(i, j) = r(j, i) = std::clamp(rho * u(rng), -0.99, 0.99);
      r = nearest_psd(r);
      const Vector inv_sd = r.diagonal().cwiseSqrt().cwiseInverse();
      r = inv_sd.asDiagonal() * r * inv_sd.asDiagonal();
      r.diagonal().setOnes();
      break;
    }
  }
  return r;
}

FunctionalSample sample_curves(std::size_t n, const TimeGrid& grid, const CovarianceSpec& cov, ErrorLaw dist,
                               std::uint64_t stream_seed) {
  const auto rows = static_cast<Eigen::Index>(n);
  const auto G = static_cast<Eigen::Index>(grid.size());
  if (cov.sigma == 0.0) return FunctionalSample(Matrix::Zero(rows, G), grid);

  const Matrix corr = build_correlation(cov.structure, cov.effective_rho(), grid.size(), cov.structure_seed);
  const Matrix factor_t = (cov.sigma * psd_factor(corr)).transpose();

  Rng gauss_rng = make_stream(stream_seed, {kSubGauss});
  std::normal_distribution<double> normal;
  Matrix z(rows, G);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index l = 0; l < G; ++l) z(i, l) = normal(gauss_rng);

  if (dist != ErrorLaw::Normal) {
    Rng mixer_rng = make_stream(stream_seed, {kSubMixer});
    Vector scale(rows);
    if (dist == ErrorLaw::StudentT) {
      // t_nu = g / sqrt(chi2_nu / nu), rescaled so the covariance is sigma^2 R.
      std::chi_squared_distribution<double> chi2(kStudentDf);
      const double unit = std::sqrt((kStudentDf - 2.0) / kStudentDf);
      for (Eigen::Index i = 0; i < rows; ++i) scale[i] = unit / std::sqrt(chi2(mixer_rng) / kStudentDf);
    } else {
      // Symmetric multivariate Laplace: g * sqrt(E), E ~ Exp(1) has unit mean.
      std::exponential_distribution<double> expo(1.0);
      for (Eigen::Index i = 0; i < rows; ++i) scale[i] = std::sqrt(expo(mixer_rng));
    }
    z = scale.asDiagonal() * z;
  }
  return FunctionalSample(z * factor_t, grid);
}

// ---------------------------------------------------------------------------
// Data generation
// ---------------------------------------------------------------------------

double true_mean_x(double t) { return 1.0 / (1.0 + std::exp(8.0 * (t - 0.5))) + 1.0; }

double true_beta1(double t) { return std::sin(2.0 * std::numbers::pi * t); }

Vector true_beta1_curve(const TimeGrid& grid) {
  Vector out(static_cast<Eigen::Index>(grid.size()));
  for (std::size_t l = 0; l < grid.size(); ++l) out[static_cast<Eigen::Index>(l)] = true_beta1(grid[l]);
  return out;
}

ScenarioConfig replicate_config(const ScenarioConfig& cfg, std::uint64_t replicate) {
  ScenarioConfig out = cfg;
  out.seed = derive_seed(cfg.seed, {kStreamReplicate, replicate});
  return out;
}

Dataset generate_dataset(const ScenarioConfig& cfg) {
  cfg.validate();
  const TimeGrid grid = TimeGrid::uniform(cfg.n_grid);
  const auto n = static_cast<Eigen::Index>(cfg.n);
  const auto G = static_cast<Eigen::Index>(cfg.n_grid);

  Vector mu(G), delta(G);
  for (Eigen::Index l = 0; l < G; ++l) {
    const double t = grid[static_cast<std::size_t>(l)];
    mu[l] = true_mean_x(t);
    delta[l] = cfg.c * std::sin(2.0 * std::numbers::pi * t) + 1.0;
  }

  Matrix x = sample_curves(cfg.n, grid, cfg.cov_x, ErrorLaw::Normal, derive_seed(cfg.seed, {kStreamX})).values;
  x.rowwise() += mu.transpose();
  const Matrix u = sample_curves(cfg.n, grid, cfg.cov_u, cfg.me_dist, derive_seed(cfg.seed, {kStreamU})).values;
  const Matrix eta =
      sample_curves(cfg.n, grid, cfg.cov_m, ErrorLaw::Normal, derive_seed(cfg.seed, {kStreamEta})).values;

  Matrix w = x + u;
  Matrix m = x * delta.asDiagonal();
  m += eta;

  Vector zc(n), zb(n), eps(n);
  {
    Rng rng = make_stream(cfg.seed, {kStreamZc});
    std::normal_distribution<double> normal(0.0, 0.5);
    for (Eigen::Index i = 0; i < n; ++i) zc[i] = normal(rng);
  }
  {
    Rng rng = make_stream(cfg.seed, {kStreamZb});
    std::bernoulli_distribution bern(0.6);
    for (Eigen::Index i = 0; i < n; ++i) zb[i] = bern(rng) ? 1.0 : 0.0;
  }
  {
    Rng rng = make_stream(cfg.seed, {kStreamEps});
    std::normal_distribution<double> normal(0.0, 0.1);
    for (Eigen::Index i = 0; i < n; ++i) eps[i] = normal(rng);
  }

  const Vector signal_weights = grid.trapezoid_weights().cwiseProduct(true_beta1_curve(grid));
  const Vector y = x * signal_weights + kTrueGammaContinuous * zc + kTrueGammaBinary * zb + eps;

  Matrix z(n, 2);
  z.col(0) = zc;
  z.col(1) = zb;
  Dataset d{y, FunctionalSample(std::move(w), grid), FunctionalSample(std::move(m), grid),
            FunctionalSample(std::move(x), grid), std::move(z), {"Zc", "Zb"}, std::nullopt, {}};
  return d;
}

}  // namespace fliv
