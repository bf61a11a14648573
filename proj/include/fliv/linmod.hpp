#pragma once

#include <optional>

#include "fliv/fda.hpp"

namespace fliv {

/// Relative pivot tolerance below which a design column counts as dependent.
inline constexpr double kRankTolerance = 1e-10;

struct RegressionFit {
  Vector coefficients;
  Vector fitted;
  Vector residuals;
  double rss = 0.0;  ///< sum_i w_i r_i^2 (w = 1 when unweighted)
};

/// Column-pivoted QR least-squares solver for one design and any number of
/// right-hand sides. Rows are scaled by sqrt(w) when weights are given.
class LeastSquaresSolver {
 public:
  LeastSquaresSolver(const Matrix& design, const std::optional<Vector>& weights = std::nullopt);

  Vector solve(const Vector& response) const;
  Matrix solve(const Matrix& responses) const;

  Eigen::Index rank() const { return qr_.rank(); }

 private:
  Eigen::ColPivHouseholderQR<Matrix> qr_;
  std::optional<Vector> sqrt_weights_;
};

/// (Weighted) least squares with rank checking. Throws RankDeficient,
/// Underdetermined, or Dimension errors.
RegressionFit ols_fit(const Matrix& design, const Vector& response,
                      const std::optional<Vector>& weights = std::nullopt);

/// p x q coefficient matrix; column j equals ols_fit(design, responses.col(j)).
Matrix multiresponse_ols(const Matrix& design, const Matrix& responses,
                         const std::optional<Vector>& weights = std::nullopt);

/// Sample cross-covariance with the n - 1 denominator.
Matrix cross_covariance(const Matrix& a, const Matrix& b);

/// Frobenius-nearest positive semidefinite matrix (negative eigenvalues clamped).
Matrix nearest_psd(const Matrix& s);

/// Factor F with F * F^T = s for a PSD matrix s (Cholesky when positive
/// definite, otherwise a scaled eigenvector factor).
Matrix psd_factor(const Matrix& s);

}  // namespace fliv
