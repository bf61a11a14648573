#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "fliv/dataset.hpp"
#include "fliv/fda.hpp"

namespace fliv {

enum class CovStructure { IND, AR1, CS, UN };
enum class ErrorLaw { Normal, StudentT, Laplace };

std::string_view to_string(CovStructure s);
std::string_view to_string(ErrorLaw d);
CovStructure parse_structure(std::string_view s);
ErrorLaw parse_error_law(std::string_view s);

/// Degrees of freedom of the Student-t measurement error law.
inline constexpr double kStudentDf = 4.0;

/// Seed of the fixed random pattern behind the UN structure.
inline constexpr std::uint64_t kDefaultStructureSeed = 20240917;

struct CovarianceSpec {
  CovStructure structure = CovStructure::AR1;
  double rho = 0.5;
  double sigma = 1.0;  ///< marginal standard deviation
  std::uint64_t structure_seed = kDefaultStructureSeed;

  double effective_rho() const { return structure == CovStructure::IND ? 0.0 : rho; }
  bool operator==(const CovarianceSpec&) const = default;
};

struct ScenarioConfig {
  std::size_t n = 1000;
  std::size_t n_grid = 100;
  CovarianceSpec cov_x{CovStructure::AR1, 0.5, 1.5};
  CovarianceSpec cov_u{CovStructure::AR1, 0.5, 1.0};
  CovarianceSpec cov_m{CovStructure::AR1, 0.5, 1.0};
  double c = 0.5;
  ErrorLaw me_dist = ErrorLaw::Normal;
  std::uint64_t seed = 1;

  void validate() const;
  /// Compact descriptor such as "n=1000 X=AR1(0.5)x1.5 U=... c=0.5 me=normal".
  std::string label() const;
  bool operator==(const ScenarioConfig&) const = default;
};

/// Correlation matrix of the given structure. UN draws a fixed pattern from seed.
Matrix build_correlation(CovStructure structure, double rho, std::size_t dim, std::uint64_t seed);

/// n iid mean-zero curves with covariance sigma^2 R on grid. The Gaussian
/// directions and the scalar mixing variables come from separate sub-streams
/// of stream_seed, so the three laws share their Gaussian draws.
FunctionalSample sample_curves(std::size_t n, const TimeGrid& grid, const CovarianceSpec& cov, ErrorLaw dist,
                               std::uint64_t stream_seed);

/// Mean curve of X: 1 / (1 + exp(8 (t - 0.5))) + 1.
double true_mean_x(double t);
/// Functional coefficient used to generate Y: sin(2 pi t).
double true_beta1(double t);
Vector true_beta1_curve(const TimeGrid& grid);

inline constexpr double kTrueBeta0 = 0.0;
inline constexpr double kTrueGammaContinuous = 2.0;
inline constexpr double kTrueGammaBinary = 0.6;

/// Draws one dataset. Covariates are Z = [Zc, Zb].
Dataset generate_dataset(const ScenarioConfig& cfg);

/// cfg with its seed replaced by the sub-seed of replicate r.
ScenarioConfig replicate_config(const ScenarioConfig& cfg, std::uint64_t replicate);

}  // namespace fliv
