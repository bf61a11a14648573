// Serial reference loops vs OpenMP loops, plus MULTI-2SLS vs SIMEX single-fit timing.
// Usage: fliv_bench [threads] [n]

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>

#include "fliv/estimators.hpp"
#include "fliv/harness.hpp"
#include "fliv/simgen.hpp"

using namespace fliv;

namespace {

double seconds(const std::function<void()>& f) {
  const auto t0 = std::chrono::steady_clock::now();
  f();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void row(const char* name, double serial, double parallel) {
  std::printf("%-28s %10.3f %10.3f %8.2fx\n", name, serial, parallel, serial / parallel);
}

}  // namespace

int main(int argc, char** argv) {
  const int threads = argc > 1 ? std::atoi(argv[1]) : omp_get_max_threads();
  ScenarioConfig cfg;
  cfg.n = argc > 2 ? static_cast<std::size_t>(std::atoi(argv[2])) : 1000;

  std::printf("threads=%d cores=%d n=%zu\n", threads, omp_get_num_procs(), cfg.n);
  std::printf("%-28s %10s %10s %9s\n", "loop", "serial[s]", "omp[s]", "speedup");

  MonteCarloOptions mc;
  mc.estimators = {Estimator::Oracle, Estimator::MULTI2SLS, Estimator::PW2SLS, Estimator::Naive};
  mc.threads = 1;
  MonteCarloOptions mc_par = mc;
  mc_par.threads = threads;
  row("monte carlo, 40 replicates", seconds([&] { run_monte_carlo(cfg, 40, mc); }),
      seconds([&] { run_monte_carlo(cfg, 40, mc_par); }));

  const Dataset d = generate_dataset(cfg);
  SimexConfig sx;
  sx.threads = 1;
  SimexConfig sx_par = sx;
  sx_par.threads = threads;
  row("SIMEX simulation step", seconds([&] { fit_simex(d.w, d.m, d.y, d.z, 7, sx, 1); }),
      seconds([&] { fit_simex(d.w, d.m, d.y, d.z, 7, sx_par, 1); }));

  BootstrapOptions bo;
  bo.threads = 1;
  BootstrapOptions bo_par = bo;
  bo_par.threads = threads;
  row("bootstrap, B=100 (MULTI)", seconds([&] { bootstrap_ci(d, Estimator::MULTI2SLS, 100, 0.95, 1, bo); }),
      seconds([&] { bootstrap_ci(d, Estimator::MULTI2SLS, 100, 0.95, 1, bo_par); }));

  const auto multi = benchmark_fit(d, 7, Estimator::MULTI2SLS, 50);
  const auto simex = benchmark_fit(d, 7, Estimator::SIMEX, 5);
  std::printf("\nsingle fit, K=7: MULTI-2SLS median %.5fs, SIMEX median %.3fs, ratio %.0fx\n",
              multi.median_seconds, simex.median_seconds, simex.median_seconds / multi.median_seconds);
  return 0;
}
