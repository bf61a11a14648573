#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "fliv/errors.hpp"
#include "fliv/fda.hpp"
#include "oracles.hpp"

using namespace fliv;

namespace {

constexpr double kPi = std::numbers::pi;

bool throws_kind(ErrorKind kind, const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind() == kind;
  }
  return false;
}

}  // namespace

TEST_SUITE("fda") {

TEST_CASE("time grid validation") {
  CHECK(throws_kind(ErrorKind::InvalidGrid, [] { TimeGrid({0.5}); }));
  CHECK(throws_kind(ErrorKind::InvalidGrid, [] { TimeGrid({0.0, 0.5, 0.5}); }));
  CHECK(throws_kind(ErrorKind::InvalidGrid, [] { TimeGrid({-0.1, 0.5}); }));
  CHECK(throws_kind(ErrorKind::InvalidGrid, [] { TimeGrid({0.5, 1.1}); }));
  const auto g = TimeGrid::uniform(5);
  CHECK(g.size() == 5);
  CHECK(g[0] == 0.0);
  CHECK(g[4] == 1.0);
  CHECK(g[2] == doctest::Approx(0.5));
}

TEST_CASE("functional sample rejects wrong width and non-finite values") {
  const auto g = TimeGrid::uniform(4);
  CHECK(throws_kind(ErrorKind::Dimension, [&] { FunctionalSample(Matrix::Zero(2, 3), g); }));
  Matrix bad = Matrix::Zero(2, 4);
  bad(1, 2) = std::nan("");
  CHECK(throws_kind(ErrorKind::InvalidArgument, [&] { FunctionalSample(bad, g); }));
}

TEST_CASE("cubic basis with K = order is Bernstein at the ends") {
  const auto b = build_bspline_basis(4, 4, TimeGrid::uniform(101));
  CHECK(b->eval.rows() == 101);
  CHECK(b->eval.cols() == 4);
  const Vector first = b->eval.row(0).transpose();
  const Vector last = b->eval.row(100).transpose();
  CHECK((first - Vector::Unit(4, 0)).norm() < 1e-15);
  CHECK((last - Vector::Unit(4, 3)).norm() < 1e-15);
}

TEST_CASE("basis errors") {
  CHECK(throws_kind(ErrorKind::InvalidBasis, [] { build_bspline_basis(3, 4, TimeGrid::uniform(20)); }));
  CHECK(throws_kind(ErrorKind::InvalidBasis, [] { build_bspline_basis(5, 1, TimeGrid::uniform(20)); }));
  CHECK(throws_kind(ErrorKind::InvalidGrid, [] { build_bspline_basis(5, 4, TimeGrid({0.3})); }));
}

TEST_CASE("partition of unity and non-negativity for many K") {
  const auto grid = TimeGrid::uniform(137);
  for (int order = 2; order <= 5; ++order) {
    for (int K = order; K <= 15; ++K) {
      const auto b = build_bspline_basis(K, order, grid);
      CHECK(b->knots.size() == static_cast<std::size_t>(K + order));
      CHECK((b->eval.rowwise().sum().array() - 1.0).abs().maxCoeff() < 1e-10);
      CHECK(b->eval.minCoeff() >= 0.0);
    }
  }
}

TEST_CASE("evaluation agrees with the recursive oracle at 10x resolution") {
  const auto knots = oracle::clamped_knots(5, 4);
  const auto fine = TimeGrid::uniform(1001);
  const auto b = build_bspline_basis(5, 4, fine);
  CHECK(b->knots == knots);
  double worst = 0.0;
  for (std::size_t l = 0; l < fine.size(); ++l)
    for (int k = 0; k < 5; ++k)
      worst = std::max(worst, std::abs(b->eval(static_cast<Eigen::Index>(l), k) -
                                       oracle::cox_de_boor(knots, k, 4, fine[l])));
  CHECK(worst < 1e-10);
  // at the interior knot itself
  const Vector mid = bspline_values(knots, 5, 4, 0.5);
  for (int k = 0; k < 5; ++k) CHECK(mid(k) == doctest::Approx(oracle::cox_de_boor(knots, k, 4, 0.5)).epsilon(1e-12));
}

TEST_CASE("random K and order agree with the recursive oracle") {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> pick_order(2, 5), extra(0, 8);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int c = 0; c < 200; ++c) {
    const int order = pick_order(rng);
    const int K = order + extra(rng);
    const auto knots = oracle::clamped_knots(K, order);
    for (int s = 0; s < 5; ++s) {
      const double t = s == 0 ? 1.0 : unif(rng);
      const Vector v = bspline_values(knots, K, order, t);
      for (int k = 0; k < K; ++k) REQUIRE(std::abs(v(k) - oracle::cox_de_boor(knots, k, order, t)) < 1e-10);
    }
  }
}

TEST_CASE("project_scores examples") {
  const auto grid = TimeGrid::uniform(101);
  const auto b = build_bspline_basis(7, 4, grid);
  const FunctionalSample zero(Matrix::Zero(2, 101), grid);
  CHECK(project_scores(zero, b).scores.isZero(0.0));

  const FunctionalSample ones(Matrix::Ones(1, 101), grid);
  const auto s = project_scores(ones, b);
  CHECK(s.scores.cols() == 7);
  CHECK(s.scores.sum() == doctest::Approx(1.0).epsilon(1e-8));

  const FunctionalSample other(Matrix::Ones(1, 50), TimeGrid::uniform(50));
  CHECK(throws_kind(ErrorKind::GridMismatch, [&] { project_scores(other, b); }));
}

TEST_CASE("scores of X(t)=t match adaptive quadrature") {
  const auto grid = TimeGrid::uniform(1001);
  const auto b = build_bspline_basis(4, 4, grid);
  const FunctionalSample x(grid.as_vector().transpose(), grid);
  const auto s = project_scores(x, b);
  const auto knots = oracle::clamped_knots(4, 4);
  for (int k = 0; k < 4; ++k) {
    const double ref = oracle::integrate([&](double t) { return t * oracle::cox_de_boor(knots, k, 4, t); }, 0.0, 1.0);
    CHECK(std::abs(s.scores(0, k) - ref) < 1e-6);
  }
}

TEST_CASE("project_scores is linear") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> z;
  const auto grid = TimeGrid::uniform(60);
  for (int c = 0; c < 200; ++c) {
    const int K = 4 + c % 6;
    const auto b = build_bspline_basis(K, 4, grid);
    Matrix a(3, 60), bb(3, 60);
    for (Eigen::Index i = 0; i < a.size(); ++i) {
      a.data()[i] = z(rng);
      bb.data()[i] = z(rng);
    }
    const double alpha = z(rng), beta = z(rng);
    const Matrix lhs = project_scores(FunctionalSample(alpha * a + beta * bb, grid), b).scores;
    const Matrix rhs = alpha * project_scores(FunctionalSample(a, grid), b).scores +
                       beta * project_scores(FunctionalSample(bb, grid), b).scores;
    REQUIRE((lhs - rhs).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("reconstruct_coefficient") {
  const auto grid = TimeGrid::uniform(101);
  const auto b = build_bspline_basis(9, 4, grid);
  CHECK(reconstruct_coefficient(Vector::Zero(9), *b).isZero(0.0));
  CHECK((reconstruct_coefficient(Vector::Ones(9), *b).array() - 1.0).abs().maxCoeff() < 1e-10);
  CHECK_THROWS_AS(reconstruct_coefficient(Vector::Ones(8), *b), Error);

  // direct least-squares projection of sin(2 pi t) onto the basis
  Vector target(101);
  for (Eigen::Index l = 0; l < 101; ++l) target(l) = std::sin(2 * kPi * grid[static_cast<std::size_t>(l)]);
  const Vector w = b->eval.colPivHouseholderQr().solve(target);
  const Vector fit = reconstruct_coefficient(w, *b);
  CHECK((fit - target).cwiseAbs().maxCoeff() < 0.02);
}

TEST_CASE("integrate examples") {
  const auto g101 = TimeGrid::uniform(101);
  CHECK(integrate(Vector::Ones(101), g101) == 1.0);
  Vector s(101);
  for (Eigen::Index l = 0; l < 101; ++l) s(l) = std::sin(2 * kPi * g101[static_cast<std::size_t>(l)]);
  CHECK(std::abs(integrate(s, g101)) < 1e-3);
  const auto g1001 = TimeGrid::uniform(1001);
  const Vector t = g1001.as_vector();
  CHECK(std::abs(integrate(t.array().square().matrix(), g1001) - 1.0 / 3.0) < 1e-5);
  CHECK_THROWS_AS(integrate(Vector::Ones(5), g101), Error);
}

TEST_CASE("trapezoid is exact for piecewise-linear data and second order for smooth data") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int c = 0; c < 200; ++c) {
    // random non-uniform grid with random values; exact integral of the interpolant
    const int n = 2 + c % 40;
    std::vector<double> pts;
    for (int i = 0; i < n; ++i) pts.push_back(u(rng));
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    if (pts.size() < 2) continue;
    std::vector<double> vals;
    for (std::size_t i = 0; i < pts.size(); ++i) vals.push_back(u(rng) - 0.5);
    const TimeGrid g(pts);
    const Vector v = Eigen::Map<const Vector>(vals.data(), static_cast<Eigen::Index>(vals.size()));
    REQUIRE(std::abs(integrate(v, g) - oracle::trapezoid(pts, vals)) < 1e-14);
  }
  double prev = 0.0;
  for (std::size_t n : {11, 21, 41, 81, 161}) {
    const auto g = TimeGrid::uniform(n);
    const Vector t = g.as_vector();
    const double err = std::abs(integrate(t.array().cube().matrix(), g) - 0.25);
    if (prev > 0.0) CHECK(prev / err >= 3.9);
    prev = err;
  }
}

}  // TEST_SUITE
