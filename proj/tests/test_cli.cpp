#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>

#include "fliv/config.hpp"
#include "fliv/harness.hpp"
#include "fliv/report_io.hpp"
#include "test_util.hpp"

using namespace fliv;
using nlohmann::json;

namespace {

struct Run {
  int code;
  std::string err;
};

Run fliv_run(const ScratchDir& dir, const std::string& args) {
  const std::string err_file = dir.file("stderr.txt");
  const std::string cmd = std::string(FLIV_EXE) + " " + args + " 2>" + err_file + " >" + dir.file("stdout.txt");
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(err_file)};
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("simulate is byte-identical across runs") {
  ScratchDir dir("cli_det");
  const std::string args = "simulate --n 100 --n-grid 20 --reps 3 --estimators naive,pw2sls,multi2sls --seed 4 --out " +
                           dir.file("r.csv");
  REQUIRE(fliv_run(dir, args).code == 0);
  const auto first = slurp(dir.file("r.csv"));
  const auto first_curves = slurp(curve_path(dir.file("r.csv"), 0));
  REQUIRE(fliv_run(dir, args + " --threads 1").code == 0);
  const auto serial = slurp(dir.file("r.csv"));
  REQUIRE(fliv_run(dir, args).code == 0);
  CHECK(!first.empty());
  CHECK(slurp(dir.file("r.csv")) == first);
  CHECK(slurp(curve_path(dir.file("r.csv"), 0)) == first_curves);
  // the echo records the thread count; the numbers do not depend on it
  CHECK(serial.substr(serial.find('\n')) == first.substr(first.find('\n')));
}

TEST_CASE("usage errors") {
  ScratchDir dir("cli_usage");
  const auto missing = fliv_run(dir, "simulate --n 100 --reps 2");
  CHECK(missing.code != 0);
  CHECK(missing.err.find("out") != std::string::npos);
  CHECK(missing.err.find("Usage") != std::string::npos);

  const auto cfg = dir.write("bad.json", R"({"reps": 2, "no_such_key": 1})");
  const auto bad = fliv_run(dir, "simulate --config " + cfg + " --out " + dir.file("r.csv"));
  CHECK(bad.code == 2);
  CHECK(bad.err.find("no_such_key") != std::string::npos);

  CHECK(fliv_run(dir, "simulate --reps nope --out x.csv").code == 2);
  CHECK(fliv_run(dir, "fit --out " + dir.file("f.csv")).code == 2);
  CHECK(fliv_run(dir, "").code != 0);
}

TEST_CASE("exported data refits to the in-memory estimates") {
  ScratchDir dir("cli_fit");
  REQUIRE(fliv_run(dir, "simulate --n 150 --n-grid 25 --reps 1 --estimators naive --seed 9 --export-data " +
                            dir.file("data") + " --out " + dir.file("sim.csv"))
              .code == 0);
  const auto cfg = dir.write("fit.json", R"({"outlier_iqr_multiplier": null})");
  const auto run = fliv_run(dir, "fit --config " + cfg + " --long-csv " + dir.file("data/scenario_01_long.csv") +
                                     " --outcomes " + dir.file("data/scenario_01_outcomes.csv") +
                                     " --covariates Zc,Zb --estimators naive,multi2sls,pw2sls --format json --out " +
                                     dir.file("fit.json.out"));
  REQUIRE_MESSAGE(run.code == 0, run.err);
  const auto fits = json::parse(slurp(dir.file("fit.json.out"))).at("fits");
  REQUIRE(fits.size() == 3);

  ScenarioConfig sc;
  sc.n = 150;
  sc.n_grid = 25;
  sc.seed = 9;
  const Dataset d = generate_dataset(replicate_config(sc, 0));
  const auto opts = RunConfig{}.estimator_options();
  const Estimator order[] = {Estimator::Naive, Estimator::MULTI2SLS, Estimator::PW2SLS};
  for (std::size_t i = 0; i < 3; ++i) {
    const auto ref = fit_with_selection(d, order[i], {}, opts);
    const auto& f = fits[i];
    CHECK(f.at("K").get<int>() == ref.K);
    CHECK(std::abs(f.at("beta0").get<double>() - ref.beta0) < 1e-10);
    const auto curve = f.at("beta1").get<std::vector<double>>();
    REQUIRE(curve.size() == 25);
    double worst = 0.0;
    for (std::size_t l = 0; l < 25; ++l)
      worst = std::max(worst, std::abs(curve[l] - ref.beta1_curve(static_cast<Eigen::Index>(l))));
    CHECK(worst < 1e-10);
    CHECK(f.at("percent_difference").is_null() == (i == 0));
  }
}

TEST_CASE("bootstrap band output") {
  ScratchDir dir("cli_boot");
  REQUIRE(fliv_run(dir, "simulate --n 120 --n-grid 20 --reps 1 --estimators naive --export-data " + dir.file("data") +
                            " --out " + dir.file("sim.csv"))
              .code == 0);
  const std::string args = "bootstrap --long-csv " + dir.file("data/scenario_01_long.csv") + " --outcomes " +
                           dir.file("data/scenario_01_outcomes.csv") +
                           " --covariates Zc,Zb --estimators pw2sls --bootstrap-reps 2 --out " + dir.file("band.csv");
  const auto run = fliv_run(dir, args);
  REQUIRE_MESSAGE(run.code == 0, run.err);
  const auto first = slurp(dir.file("band.csv"));
  const auto band = read_csv_table(dir.file("band.csv"));
  CHECK(band.header == std::vector<std::string>{"t", "estimate", "lower", "upper", "significant"});
  REQUIRE(band.rows.size() == 20);
  for (const auto& row : band.rows) CHECK(std::stod(row[2]) <= std::stod(row[3]));
  REQUIRE(fliv_run(dir, args).code == 0);
  CHECK(slurp(dir.file("band.csv")) == first);
  CHECK(fliv_run(dir, args + " --estimators naive,pw2sls").code == 2);
}

}  // TEST_SUITE
