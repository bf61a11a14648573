#pragma once

#include <vector>

#include "fliv/fda.hpp"

namespace fliv {

/// R replicate estimates of beta_1 on a grid, together with the truth.
struct CurveEnsemble {
  CurveEnsemble(Matrix curves, Vector truth, TimeGrid grid);

  Vector mean_curve() const { return curves.colwise().mean().transpose(); }

  Matrix curves;  ///< R x n_grid
  Vector truth;
  TimeGrid grid;
};

/// Grid-averaged squared bias of the replicate mean curve.
double abias2(const CurveEnsemble& ens);
/// Replicate- and grid-averaged squared deviation from the mean curve (denominator R).
double avar(const CurveEnsemble& ens);
double aimse(const CurveEnsemble& ens);

/// 100 * sqrt(int (truth - estimate)^2 / int truth^2), trapezoid integrals.
double mspee(const Vector& estimate, const Vector& truth, const TimeGrid& grid);

struct PercentDifference {
  double percent = 0.0;
  int excluded = 0;  ///< grid points skipped because |naive| < 1e-12
};

/// Grid mean of |(corrected - naive) / naive| * 100.
PercentDifference percent_difference(const Vector& corrected, const Vector& naive);

/// Sample quantile by linear interpolation between order statistics
/// (position p * (n - 1) in the sorted sample).
double quantile_linear(std::vector<double> values, double p);

}  // namespace fliv
