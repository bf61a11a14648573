#include <doctest.h>

#include <algorithm>

#include "fliv/errors.hpp"
#include "fliv/harness.hpp"

using namespace fliv;

namespace {

ScenarioConfig small(std::size_t n = 150) {
  ScenarioConfig cfg;
  cfg.n = n;
  cfg.n_grid = 40;
  cfg.seed = 99;
  return cfg;
}

MonteCarloOptions quick(int threads = 1) {
  MonteCarloOptions o;
  o.fit.simex.n_sim = 3;
  o.fit.simex.lambda_grid = SimexConfig::lambda_grid_from(2.0001, 0.5);
  o.threads = threads;
  return o;
}

void check_same(const MonteCarloReport& a, const MonteCarloReport& b) {
  REQUIRE(a.estimators.size() == b.estimators.size());
  CHECK(a.k_histogram == b.k_histogram);
  CHECK(a.truth_curve == b.truth_curve);
  for (std::size_t j = 0; j < a.estimators.size(); ++j) {
    const auto &x = a.estimators[j], &y = b.estimators[j];
    CHECK(x.estimator == y.estimator);
    CHECK(x.abias2 == y.abias2);
    CHECK(x.avar == y.avar);
    CHECK(x.aimse == y.aimse);
    CHECK(x.mean_mspee == y.mean_mspee);
    CHECK(x.mean_curve == y.mean_curve);
    CHECK(x.lower == y.lower);
    CHECK(x.upper == y.upper);
    CHECK(x.successes == y.successes);
  }
}

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("one replicate has zero variance") {
  const auto r = run_monte_carlo(small(), 1, quick());
  CHECK(r.R == 1);
  CHECK(r.estimators.size() == 5);
  for (const auto& s : r.estimators) {
    CHECK(s.avar == 0.0);
    CHECK(s.successes == 1);
  }
}

TEST_CASE("reports are deterministic and schedule independent") {
  const auto a = run_monte_carlo(small(), 6, quick(1));
  const auto b = run_monte_carlo(small(), 6, quick(1));
  const auto c = run_monte_carlo(small(), 6, quick(4));
  check_same(a, b);
  check_same(a, c);
}

TEST_CASE("report bookkeeping") {
  const int R = 8;
  const auto r = run_monte_carlo(small(), R, quick());
  int total = 0;
  for (const auto& [k, count] : r.k_histogram) {
    CHECK(k >= 5);
    CHECK(k <= 9);
    total += count;
  }
  CHECK(total == R);
  CHECK(r.grid.size() == 40);
  for (const auto& s : r.estimators) {
    CHECK(s.successes + s.failures == R);
    CHECK(std::abs(s.aimse - s.abias2 - s.avar) < 1e-12);
    CHECK(s.mean_curve.size() == 40);
    CHECK((s.lower.array() <= s.upper.array()).all());
    CHECK(s.mean_fit_seconds >= 0.0);
  }
  CHECK(r.summary(Estimator::Naive).estimator == Estimator::Naive);
}

TEST_CASE("adding estimators does not perturb the data") {
  MonteCarloOptions one = quick();
  one.estimators = {Estimator::Naive};
  MonteCarloOptions two = quick();
  two.estimators = {Estimator::PW2SLS, Estimator::Naive};
  const auto a = run_monte_carlo(small(), 5, one);
  const auto b = run_monte_carlo(small(), 5, two);
  CHECK(a.summary(Estimator::Naive).mean_curve == b.summary(Estimator::Naive).mean_curve);
  CHECK(a.summary(Estimator::Naive).avar == b.summary(Estimator::Naive).avar);
  CHECK_THROWS_AS(a.summary(Estimator::PW2SLS), Error);
}

TEST_CASE("replicate failures are counted and flagged") {
  ScenarioConfig cfg = small();
  cfg.cov_x.sigma = 0.0;  // X is the same curve for everybody
  cfg.cov_m.sigma = 0.0;
  cfg.c = 0.0;
  MonteCarloOptions o = quick();
  o.estimators = {Estimator::Oracle, Estimator::PW2SLS, Estimator::MULTI2SLS, Estimator::Naive};
  const auto r = run_monte_carlo(cfg, 4, o);
  for (Estimator e : {Estimator::Oracle, Estimator::PW2SLS, Estimator::MULTI2SLS}) {
    const auto& s = r.summary(e);
    CHECK(s.failures == 4);
    CHECK(s.successes == 0);
    CHECK(s.flagged);
    CHECK_FALSE(s.first_error.empty());
  }
  CHECK(r.summary(Estimator::Naive).failures == 0);
  CHECK_FALSE(r.summary(Estimator::Naive).flagged);
}

TEST_CASE("bootstrap band basics") {
  const Dataset d = generate_dataset(small(120));
  BootstrapOptions o;
  o.threads = 1;
  const auto band = bootstrap_ci(d, Estimator::MULTI2SLS, 2, 0.95, 5, o);
  CHECK(band.B == 2);
  CHECK((band.lower.array() <= band.upper.array()).all());
  CHECK(band.grid.size() == 40);
  CHECK(band.significant.size() == 40);
  REQUIRE(band.gamma_intervals.size() == 2);
  CHECK(band.gamma_intervals[0].name == "Zc");
  CHECK(band.gamma_intervals[1].name == "Zb");
  CHECK_THROWS_AS(bootstrap_ci(d, Estimator::Naive, 1, 0.95, 5, o), Error);
  CHECK_THROWS_AS(bootstrap_ci(d, Estimator::Naive, 5, 1.0, 5, o), Error);
}

TEST_CASE("bootstrap is seeded and schedule independent") {
  const Dataset d = generate_dataset(small(120));
  BootstrapOptions serial;
  serial.threads = 1;
  BootstrapOptions par = serial;
  par.threads = 4;
  const auto a = bootstrap_ci(d, Estimator::PW2SLS, 12, 0.9, 8, serial);
  const auto b = bootstrap_ci(d, Estimator::PW2SLS, 12, 0.9, 8, serial);
  const auto c = bootstrap_ci(d, Estimator::PW2SLS, 12, 0.9, 8, par);
  const auto other = bootstrap_ci(d, Estimator::PW2SLS, 12, 0.9, 9, serial);
  CHECK(a.lower == b.lower);
  CHECK(a.upper == b.upper);
  CHECK(a.lower == c.lower);
  CHECK(a.upper == c.upper);
  CHECK(a.lower != other.lower);
}

TEST_CASE("percentile bounds are order statistics") {
  const Dataset d = generate_dataset(small(120));
  BootstrapOptions o;
  o.threads = 1;
  o.keep_draws = true;
  const auto band = bootstrap_ci(d, Estimator::Naive, 41, 0.95, 3, o);
  REQUIRE(band.draws.rows() == 41);
  for (Eigen::Index l = 0; l < band.draws.cols(); ++l) {
    std::vector<double> col(band.draws.col(l).data(), band.draws.col(l).data() + 41);
    std::sort(col.begin(), col.end());
    CHECK(std::abs(band.lower(l) - col[1]) < 1e-12);
    CHECK(std::abs(band.upper(l) - col[39]) < 1e-12);
  }
}

TEST_CASE("bands widen with the level") {
  const Dataset d = generate_dataset(small(120));
  BootstrapOptions o;
  o.threads = 1;
  const auto narrow = bootstrap_ci(d, Estimator::Naive, 200, 0.80, 4, o);
  const auto wide = bootstrap_ci(d, Estimator::Naive, 200, 0.99, 4, o);
  CHECK((wide.lower.array() <= narrow.lower.array()).all());
  CHECK((wide.upper.array() >= narrow.upper.array()).all());
  CHECK(((wide.upper - wide.lower).array() > (narrow.upper - narrow.lower).array()).all());
}

TEST_CASE("noiseless outcomes give a zero-width band") {
  ScenarioConfig cfg = small(100);
  Dataset d = generate_dataset(cfg);
  // outcome exactly linear in the K=5 scores of W, subjects duplicated
  std::vector<Eigen::Index> rows;
  for (Eigen::Index i = 0; i < 100; ++i) rows.push_back(i / 2);
  d = d.select_rows(rows);
  const auto basis = build_bspline_basis(5, 4, d.grid());
  Vector omega(5);
  omega << 1, -2, 0.5, 2, -1;
  d.y = project_scores(d.w, basis).scores * omega + 2.0 * d.z.col(0);
  BootstrapOptions o;
  o.threads = 1;
  o.k_range = {5, 5};
  const auto band = bootstrap_ci(d, Estimator::Naive, 20, 0.95, 6, o);
  CHECK((band.upper - band.lower).cwiseAbs().maxCoeff() < 1e-8);
  CHECK((band.estimate - reconstruct_coefficient(omega, *basis)).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("benchmark timing") {
  ScenarioConfig cfg;
  cfg.n = 100;
  const auto naive = benchmark_fit(cfg, Estimator::Naive, 5);
  CHECK(naive.reps == 5);
  CHECK(naive.median_seconds < 0.1);
  CHECK(naive.min_seconds <= naive.median_seconds);
  CHECK(naive.median_seconds <= naive.max_seconds);

  cfg.n = 1000;
  const Dataset d = generate_dataset(cfg);
  const auto first = benchmark_fit(d, 6, Estimator::MULTI2SLS, 31);
  const auto second = benchmark_fit(d, 6, Estimator::MULTI2SLS, 31);
  CHECK(first.median_seconds == doctest::Approx(second.median_seconds).epsilon(0.2));
  CHECK_THROWS_AS(benchmark_fit(d, 6, Estimator::Naive, 0), Error);
}

}  // TEST_SUITE
