#include "fliv/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "fliv/errors.hpp"

namespace fliv {

CurveEnsemble::CurveEnsemble(Matrix c, Vector t, TimeGrid g)
    : curves(std::move(c)), truth(std::move(t)), grid(std::move(g)) {
  if (curves.rows() < 1) fail(ErrorKind::InsufficientData, "ensemble needs at least one replicate");
  if (curves.cols() != truth.size() || static_cast<std::size_t>(truth.size()) != grid.size())
    fail(ErrorKind::Dimension, "ensemble curves, truth and grid widths differ");
}

double abias2(const CurveEnsemble& ens) { return (ens.mean_curve() - ens.truth).squaredNorm() / ens.truth.size(); }

double avar(const CurveEnsemble& ens) {
  const Matrix centered = ens.curves.rowwise() - ens.mean_curve().transpose();
  return centered.squaredNorm() / static_cast<double>(ens.curves.rows() * ens.curves.cols());
}

double aimse(const CurveEnsemble& ens) { return abias2(ens) + avar(ens); }

double mspee(const Vector& estimate, const Vector& truth, const TimeGrid& grid) {
  if (estimate.size() != truth.size()) fail(ErrorKind::Dimension, "estimate and truth lengths differ");
  const double denom = integrate(truth.cwiseAbs2(), grid);
  if (!(denom > 0.0)) fail(ErrorKind::InvalidArgument, "MSPEE undefined for a zero true coefficient");
  return 100.0 * std::sqrt(integrate((truth - estimate).cwiseAbs2(), grid) / denom);
}

PercentDifference percent_difference(const Vector& corrected, const Vector& naive) {
  if (corrected.size() != naive.size()) fail(ErrorKind::Dimension, "curve lengths differ");
  PercentDifference out;
  double sum = 0.0;
  int used = 0;
  for (Eigen::Index l = 0; l < naive.size(); ++l) {
    if (std::abs(naive[l]) < 1e-12) {
      ++out.excluded;
      continue;
    }
    sum += std::abs((corrected[l] - naive[l]) / naive[l]) * 100.0;
    ++used;
  }
  if (used == 0) fail(ErrorKind::InvalidArgument, "naive curve is zero at every grid point");
  out.percent = sum / used;
  return out;
}

double quantile_linear(std::vector<double> values, double p) {
  if (values.empty()) fail(ErrorKind::InsufficientData, "quantile of an empty sample");
  if (!(p >= 0.0 && p <= 1.0)) fail(ErrorKind::InvalidArgument, "quantile level must lie in [0, 1]");
  std::sort(values.begin(), values.end());
  const double pos = p * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

}  // namespace fliv
