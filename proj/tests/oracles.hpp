#pragma once

// Independent reference computations for the unit tests. None of these call
// into the library.

#include <cmath>
#include <functional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

// Textbook recursive Cox-de Boor; the last non-empty span is closed on the right.
inline double cox_de_boor(const std::vector<double>& knots, int i, int k, double t) {
  if (k == 1) {
    const double a = knots[i], b = knots[i + 1];
    if (a <= t && t < b) return 1.0;
    if (t == knots.back() && a < b && b == knots.back()) return 1.0;
    return 0.0;
  }
  double left = 0.0, right = 0.0;
  const double d1 = knots[i + k - 1] - knots[i];
  const double d2 = knots[i + k] - knots[i + 1];
  if (d1 > 0) left = (t - knots[i]) / d1 * cox_de_boor(knots, i, k - 1, t);
  if (d2 > 0) right = (knots[i + k] - t) / d2 * cox_de_boor(knots, i + 1, k - 1, t);
  return left + right;
}

inline std::vector<double> clamped_knots(int K, int order) {
  std::vector<double> knots(order, 0.0);
  const int interior = K - order;
  for (int j = 1; j <= interior; ++j) knots.push_back(static_cast<double>(j) / (interior + 1));
  knots.insert(knots.end(), order, 1.0);
  return knots;
}

inline double simpson_step(const std::function<double(double)>& f, double a, double b, double fa, double fm,
                           double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) <= 15 * tol) return left + right + (left + right - whole) / 15.0;
  return simpson_step(f, a, m, fa, flm, fm, left, tol / 2, depth - 1) +
         simpson_step(f, m, b, fm, frm, fb, right, tol / 2, depth - 1);
}

// Adaptive Simpson quadrature.
inline double integrate(const std::function<double(double)>& f, double a, double b, double tol = 1e-12) {
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4 * fm + fb);
  return simpson_step(f, a, b, fa, fm, fb, whole, tol, 50);
}

// Piecewise integration over knot spans so kinks do not slow the recursion.
inline double integrate_spans(const std::function<double(double)>& f, const std::vector<double>& breaks) {
  double total = 0.0;
  for (std::size_t j = 0; j + 1 < breaks.size(); ++j)
    if (breaks[j + 1] > breaks[j]) total += integrate(f, breaks[j], breaks[j + 1]);
  return total;
}

// Least squares by the normal equations in long double with Gauss-Jordan elimination.
inline Eigen::VectorXd normal_equations(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                        const Eigen::VectorXd* w = nullptr) {
  const int n = static_cast<int>(x.rows()), p = static_cast<int>(x.cols());
  std::vector<std::vector<long double>> a(p, std::vector<long double>(p + 1, 0.0L));
  for (int i = 0; i < n; ++i) {
    const long double wi = w ? (*w)(i) : 1.0L;
    for (int r = 0; r < p; ++r) {
      for (int c = 0; c < p; ++c) a[r][c] += wi * x(i, r) * x(i, c);
      a[r][p] += wi * x(i, r) * y(i);
    }
  }
  for (int c = 0; c < p; ++c) {
    int piv = c;
    for (int r = c + 1; r < p; ++r)
      if (std::fabs(a[r][c]) > std::fabs(a[piv][c])) piv = r;
    std::swap(a[c], a[piv]);
    for (int r = 0; r < p; ++r) {
      if (r == c) continue;
      const long double f = a[r][c] / a[c][c];
      for (int k = c; k <= p; ++k) a[r][k] -= f * a[c][k];
    }
  }
  Eigen::VectorXd beta(p);
  for (int r = 0; r < p; ++r) beta(r) = static_cast<double>(a[r][p] / a[r][r]);
  return beta;
}

// Frobenius-nearest PSD matrix by gradient descent on the factor F of F F^T.
inline Eigen::MatrixXd burer_monteiro_psd(const Eigen::MatrixXd& s, int iters = 200000, double step = 2e-3) {
  const auto d = s.rows();
  Eigen::MatrixXd f = Eigen::MatrixXd::Identity(d, d);
  for (int it = 0; it < iters; ++it) {
    const Eigen::MatrixXd r = f * f.transpose() - s;
    const Eigen::MatrixXd g = 4.0 * r * f;
    f -= step * g;
    if (g.norm() < 1e-13) break;
  }
  return f * f.transpose();
}

inline double trapezoid(const std::vector<double>& t, const std::vector<double>& v) {
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < t.size(); ++i) s += 0.5 * (t[i + 1] - t[i]) * (v[i] + v[i + 1]);
  return s;
}

}  // namespace oracle
