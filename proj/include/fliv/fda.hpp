#pragma once

#include <cstddef>
#include <memory>
#include <vector>

#include <Eigen/Dense>

namespace fliv {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// ---------------------------------------------------------------------------
// Time grids and discretized curves
// ---------------------------------------------------------------------------

/// Strictly increasing observation times inside [0, 1], at least two of them.
class TimeGrid {
 public:
  explicit TimeGrid(std::vector<double> points);

  /// n_grid equally spaced points t_l = l / (n_grid - 1).
  static TimeGrid uniform(std::size_t n_grid);

  std::size_t size() const noexcept { return points_.size(); }
  double operator[](std::size_t i) const noexcept { return points_[i]; }
  const std::vector<double>& points() const noexcept { return points_; }
  Vector as_vector() const;

  /// Composite trapezoid weights: integrate(f) = sum_l w_l f(t_l).
  Vector trapezoid_weights() const;

  bool operator==(const TimeGrid& other) const = default;

 private:
  std::vector<double> points_;
};

/// n curves evaluated on a shared grid; values is n x n_grid.
struct FunctionalSample {
  FunctionalSample(Matrix values, TimeGrid grid);

  std::size_t n() const noexcept { return static_cast<std::size_t>(values.rows()); }

  Matrix values;
  TimeGrid grid;
};

// ---------------------------------------------------------------------------
// B-spline bases
// ---------------------------------------------------------------------------

struct BasisSystem {
  int K = 0;
  int order = 4;
  std::vector<double> knots;  ///< K + order entries, clamped at 0 and 1
  Matrix eval;                ///< n_grid x K, eval(l, k) = b_k(t_l)
  Vector quad_weights;        ///< trapezoid weights of the grid
  TimeGrid grid;
};

using BasisPtr = std::shared_ptr<const BasisSystem>;

/// Clamped B-spline basis of the given order with K - order equally spaced
/// interior knots on [0, 1], evaluated on grid by the Cox-de Boor recursion.
BasisPtr build_bspline_basis(int K, int order, const TimeGrid& grid);

/// Values of all K basis functions at a single point t in [0, 1].
Vector bspline_values(const std::vector<double>& knots, int K, int order, double t);

/// Basis scores of a sample; scores(i, k) approximates the integral of X_i b_k.
struct ScoreMatrix {
  Matrix scores;
  BasisPtr basis;
};

ScoreMatrix project_scores(const FunctionalSample& sample, const BasisPtr& basis);

/// Coefficient curve sum_k weights_k b_k(t) on the basis grid.
Vector reconstruct_coefficient(const Vector& weights, const BasisSystem& basis);

/// Composite trapezoid integral over the span of the grid.
double integrate(const Vector& values, const TimeGrid& grid);

}  // namespace fliv
