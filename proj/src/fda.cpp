#include "fliv/fda.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fliv/errors.hpp"

namespace fliv {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "invalid-argument";
    case ErrorKind::InvalidBasis: return "invalid-basis";
    case ErrorKind::InvalidGrid: return "invalid-grid";
    case ErrorKind::GridMismatch: return "grid-mismatch";
    case ErrorKind::Dimension: return "dimension";
    case ErrorKind::RankDeficient: return "rank-deficient";
    case ErrorKind::Underdetermined: return "underdetermined";
    case ErrorKind::InsufficientData: return "insufficient-data";
    case ErrorKind::AsymmetricInput: return "asymmetric-input";
    case ErrorKind::WeakInstrument: return "weak-instrument";
    case ErrorKind::RatioDegenerate: return "ratio-degenerate";
    case ErrorKind::InvalidCorrelation: return "invalid-correlation";
    case ErrorKind::Internal: return "internal";
    case ErrorKind::Schema: return "schema";
    case ErrorKind::RowError: return "row-error";
    case ErrorKind::EmptyCohort: return "empty-cohort";
    case ErrorKind::InvalidConfig: return "invalid-config";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// TimeGrid
// ---------------------------------------------------------------------------

TimeGrid::TimeGrid(std::vector<double> points) : points_(std::move(points)) {
  if (points_.size() < 2) fail(ErrorKind::InvalidGrid, "time grid needs at least 2 points");
  if (points_.front() < 0.0 || points_.back() > 1.0)
    fail(ErrorKind::InvalidGrid, "time grid must lie inside [0, 1]");
  for (std::size_t i = 1; i < points_.size(); ++i) {
    if (!(points_[i] > points_[i - 1])) {
      std::ostringstream msg;
      msg << "time grid not strictly increasing at index " << i;
      fail(ErrorKind::InvalidGrid, msg.str());
    }
  }
}

TimeGrid TimeGrid::uniform(std::size_t n_grid) {
  if (n_grid < 2) fail(ErrorKind::InvalidGrid, "time grid needs at least 2 points");
  std::vector<double> pts(n_grid);
  const double denom = static_cast<double>(n_grid - 1);
  for (std::size_t l = 0; l < n_grid; ++l) pts[l] = static_cast<double>(l) / denom;
  return TimeGrid(std::move(pts));
}

Vector TimeGrid::as_vector() const {
  return Eigen::Map<const Vector>(points_.data(), static_cast<Eigen::Index>(points_.size()));
}

Vector TimeGrid::trapezoid_weights() const {
  const std::size_t G = points_.size();
  Vector w = Vector::Zero(static_cast<Eigen::Index>(G));
  for (std::size_t l = 0; l + 1 < G; ++l) {
    const double half = 0.5 * (points_[l + 1] - points_[l]);
    w[static_cast<Eigen::Index>(l)] += half;
    w[static_cast<Eigen::Index>(l + 1)] += half;
  }
  return w;
}

FunctionalSample::FunctionalSample(Matrix v, TimeGrid g) : values(std::move(v)), grid(std::move(g)) {
  if (static_cast<std::size_t>(values.cols()) != grid.size()) {
    std::ostringstream msg;
    msg << "sample has " << values.cols() << " columns but grid has " << grid.size() << " points";
    fail(ErrorKind::Dimension, msg.str());
  }
  if (!values.allFinite()) fail(ErrorKind::InvalidArgument, "sample contains non-finite values");
}

// ---------------------------------------------------------------------------
// B-splines
// ---------------------------------------------------------------------------

namespace {

std::vector<double> clamped_knots(int K, int order) {
  const int interior = K - order;
  std::vector<double> knots;
  knots.reserve(static_cast<std::size_t>(K + order));
  for (int i = 0; i < order; ++i) knots.push_back(0.0);
  for (int j = 1; j <= interior; ++j) knots.push_back(static_cast<double>(j) / (interior + 1));
  for (int i = 0; i < order; ++i) knots.push_back(1.0);
  return knots;
}

// Index s of the knot span [knots[s], knots[s+1]) containing t, with the right
// end of [0, 1] folded into the last non-empty span.
int find_span(const std::vector<double>& knots, int K, int order, double t) {
  const int degree = order - 1;
  if (t >= knots[static_cast<std::size_t>(K)]) return K - 1;
  if (t <= knots[static_cast<std::size_t>(degree)]) return degree;
  auto it = std::upper_bound(knots.begin() + degree, knots.begin() + K + 1, t);
  return static_cast<int>(it - knots.begin()) - 1;
}

}  // namespace

Vector bspline_values(const std::vector<double>& knots, int K, int order, double t) {
  const int degree = order - 1;
  const int span = find_span(knots, K, order, t);
  // Triangular Cox-de Boor evaluation of the order nonzero functions on span.
  std::vector<double> N(static_cast<std::size_t>(order), 0.0);
  std::vector<double> left(static_cast<std::size_t>(order)), right(static_cast<std::size_t>(order));
  N[0] = 1.0;
  for (int j = 1; j <= degree; ++j) {
    left[static_cast<std::size_t>(j)] = t - knots[static_cast<std::size_t>(span + 1 - j)];
    right[static_cast<std::size_t>(j)] = knots[static_cast<std::size_t>(span + j)] - t;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      const double denom = right[static_cast<std::size_t>(r + 1)] + left[static_cast<std::size_t>(j - r)];
      const double temp = N[static_cast<std::size_t>(r)] / denom;
      N[static_cast<std::size_t>(r)] = saved + right[static_cast<std::size_t>(r + 1)] * temp;
      saved = left[static_cast<std::size_t>(j - r)] * temp;
    }
    N[static_cast<std::size_t>(j)] = saved;
  }
  Vector out = Vector::Zero(K);
  for (int r = 0; r <= degree; ++r) out[span - degree + r] = N[static_cast<std::size_t>(r)];
  return out;
}

BasisPtr build_bspline_basis(int K, int order, const TimeGrid& grid) {
  if (order < 2) fail(ErrorKind::InvalidBasis, "spline order must be at least 2");
  if (K < order) {
    std::ostringstream msg;
    msg << "basis size K=" << K << " is smaller than the spline order " << order;
    fail(ErrorKind::InvalidBasis, msg.str());
  }
  auto basis = std::make_shared<BasisSystem>(BasisSystem{K, order, clamped_knots(K, order), {}, {}, grid});
  const auto G = static_cast<Eigen::Index>(grid.size());
  basis->eval.resize(G, K);
  for (Eigen::Index l = 0; l < G; ++l)
    basis->eval.row(l) = bspline_values(basis->knots, K, order, grid[static_cast<std::size_t>(l)]).transpose();
  basis->quad_weights = grid.trapezoid_weights();
  return basis;
}

ScoreMatrix project_scores(const FunctionalSample& sample, const BasisPtr& basis) {
  if (!(sample.grid == basis->grid))
    fail(ErrorKind::GridMismatch, "sample grid differs from the grid the basis was built on");
  const Matrix weighted = basis->quad_weights.asDiagonal() * basis->eval;
  return ScoreMatrix{sample.values * weighted, basis};
}

Vector reconstruct_coefficient(const Vector& weights, const BasisSystem& basis) {
  if (weights.size() != basis.K) {
    std::ostringstream msg;
    msg << "expected " << basis.K << " basis weights, got " << weights.size();
    fail(ErrorKind::Dimension, msg.str());
  }
  return basis.eval * weights;
}

double integrate(const Vector& values, const TimeGrid& grid) {
  if (static_cast<std::size_t>(values.size()) != grid.size()) {
    std::ostringstream msg;
    msg << "integrand has " << values.size() << " values but grid has " << grid.size();
    fail(ErrorKind::Dimension, msg.str());
  }
  return grid.trapezoid_weights().dot(values);
}

}  // namespace fliv
