#include <doctest.h>

#include <algorithm>
#include <numbers>
#include <numeric>
#include <random>

#include "fliv/errors.hpp"
#include "fliv/metrics.hpp"
#include "fliv/simgen.hpp"

using namespace fliv;

namespace {

Vector sine(const TimeGrid& g) { return true_beta1_curve(g); }

Matrix stack(const std::vector<Vector>& rows) {
  Matrix m(static_cast<Eigen::Index>(rows.size()), rows.front().size());
  for (std::size_t r = 0; r < rows.size(); ++r) m.row(static_cast<Eigen::Index>(r)) = rows[r].transpose();
  return m;
}

}  // namespace

TEST_SUITE("metrics") {

TEST_CASE("abias2 examples") {
  const auto g = TimeGrid::uniform(3);
  const Vector truth = Vector::LinSpaced(3, 1, 3);
  CHECK(abias2(CurveEnsemble(stack({truth, truth}), truth, g)) == 0.0);
  const Vector one = Vector::Ones(3);
  CHECK(abias2(CurveEnsemble(stack({truth + one, truth - one}), truth, g)) == 0.0);
  CHECK(abias2(CurveEnsemble(stack({truth.array() + 0.2}), truth, g)) == doctest::Approx(0.04).epsilon(1e-12));
}

TEST_CASE("avar examples") {
  const auto g = TimeGrid::uniform(3);
  const Vector truth = Vector::LinSpaced(3, 1, 3);
  const Vector one = Vector::Ones(3);
  CHECK(avar(CurveEnsemble(stack({truth + one}), truth, g)) == 0.0);
  CHECK(avar(CurveEnsemble(stack({truth + one, truth - one}), truth, g)) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(aimse(CurveEnsemble(Matrix::Zero(4, 3), Vector::Zero(3), g)) == 0.0);
}

TEST_CASE("ensemble shape checks") {
  const auto g = TimeGrid::uniform(3);
  CHECK_THROWS_AS(CurveEnsemble(Matrix::Zero(0, 3), Vector::Zero(3), g), Error);
  CHECK_THROWS_AS(CurveEnsemble(Matrix::Zero(2, 4), Vector::Zero(3), g), Error);
}

TEST_CASE("metric properties on random ensembles") {
  std::mt19937_64 rng(31);
  std::normal_distribution<double> z;
  for (int c = 0; c < 200; ++c) {
    const Eigen::Index R = 1 + c % 20, G = 2 + c % 30;
    const auto g = TimeGrid::uniform(static_cast<std::size_t>(G));
    Matrix curves(R, G);
    Vector truth(G);
    for (Eigen::Index i = 0; i < curves.size(); ++i) curves.data()[i] = z(rng);
    for (Eigen::Index i = 0; i < G; ++i) truth(i) = z(rng);
    const CurveEnsemble ens(curves, truth, g);
    REQUIRE(std::abs(aimse(ens) - abias2(ens) - avar(ens)) < 1e-15 * (1 + aimse(ens)));
    // translation invariance of avar
    const CurveEnsemble shifted((curves.array() + 3.5).matrix(), truth, g);
    REQUIRE(std::abs(avar(shifted) - avar(ens)) < 1e-12);
    // replicate order does not matter
    std::vector<Eigen::Index> perm(static_cast<std::size_t>(R));
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    const CurveEnsemble permuted(curves(perm, Eigen::all), truth, g);
    REQUIRE(std::abs(abias2(permuted) - abias2(ens)) < 1e-12);
    REQUIRE(std::abs(avar(permuted) - avar(ens)) < 1e-12);
    // avar with denominator R
    double direct = 0.0;
    const Vector mean = curves.colwise().mean();
    for (Eigen::Index r = 0; r < R; ++r) direct += (curves.row(r).transpose() - mean).squaredNorm() / G;
    REQUIRE(std::abs(avar(ens) - direct / R) < 1e-12);
  }
}

TEST_CASE("mspee examples") {
  const auto g = TimeGrid::uniform(101);
  const Vector s = sine(g);
  CHECK(mspee(s, s, g) == 0.0);
  CHECK(mspee(2.0 * s, s, g) == doctest::Approx(100.0).epsilon(1e-12));
  CHECK(mspee(Vector::Zero(101), s, g) == doctest::Approx(100.0).epsilon(1e-12));
  CHECK_THROWS_AS(mspee(s, Vector::Zero(101), g), Error);
}

TEST_CASE("percent difference") {
  Vector naive(4);
  naive << 1.0, -2.0, 0.5, 0.0;
  const auto same = percent_difference(naive, naive);
  CHECK(same.percent == 0.0);
  CHECK(same.excluded == 1);
  const auto scaled = percent_difference(1.5 * naive, naive);
  CHECK(scaled.percent == doctest::Approx(50.0).epsilon(1e-12));
  CHECK_THROWS_AS(percent_difference(naive, Vector::Zero(4)), Error);
}

TEST_CASE("linear-interpolation quantiles") {
  std::vector<double> pool;
  for (int i = 1; i <= 100; ++i) pool.push_back(i);
  pool.push_back(1000);
  CHECK(quantile_linear(pool, 0.75) == doctest::Approx(76.0));
  CHECK(quantile_linear(pool, 0.25) == doctest::Approx(26.0));
  CHECK(quantile_linear({1, 2, 3, 4}, 0.5) == doctest::Approx(2.5));
  CHECK(quantile_linear({4, 1, 3, 2}, 0.0) == 1.0);
  CHECK(quantile_linear({4, 1, 3, 2}, 1.0) == 4.0);
  CHECK(quantile_linear({1, 2, 3, 4, 5}, 0.3) == doctest::Approx(2.2));
  CHECK_THROWS_AS(quantile_linear({}, 0.5), Error);
}

}  // TEST_SUITE
