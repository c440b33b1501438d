// Benchmark of the OpenMP kernels against their serial reference
// implementations.  The parallel paths are written to be bit-identical to
// the serial ones (indexed slot writes, fixed-order reductions), so the
// table reports both the speedup and an equality check.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "cuestat/montecarlo.hpp"
#include "cuestat/pair_statistics.hpp"
#include "cuestat/rng.hpp"
#include "cuestat/test_function.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace {

using namespace cuestat;

template <typename Fn>
double best_of(int reps, Fn&& fn) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    best = std::min(best, dt);
  }
  return best;
}

void report(const char* name, double serial, double parallel, bool identical) {
  std::printf("%-24s %12.4f s %12.4f s %8.2fx   %s\n", name, serial, parallel,
              serial / parallel, identical ? "identical" : "DIFFER");
}

}  // namespace

int main(int argc, char** argv) {
  std::int64_t n = 2048;
  std::int64_t trunc = 64;
  std::int64_t mc_samples = 400;
  int reps = 3;
  CLI::App app{"serial-vs-OpenMP kernel benchmark"};
  app.add_option("--n", n, "configuration size (default 2048)");
  app.add_option("--trunc", trunc, "series cutoff for the direct sum (default 64)");
  app.add_option("--mc-samples", mc_samples, "Monte Carlo loop sample count (default 400)");
  app.add_option("--reps", reps, "repetitions per timing, best taken (default 3)");
  CLI11_PARSE(app, argc, argv);

#ifdef _OPENMP
  std::printf("OpenMP workers: %d\n", omp_get_max_threads());
#else
  std::printf("OpenMP not enabled; both columns run serial code\n");
#endif
  std::printf("%-24s %14s %14s %9s\n", "kernel", "serial", "parallel", "speedup");

  const TestFunction f = TestFunction::parse("power:1.5");
  std::vector<double> angles(static_cast<std::size_t>(n));
  RandomStream stream(2718281828ULL, 0);
  for (auto& a : angles) a = stream.uniform(kTwoPi);

  {
    double ref = 0.0, fast = 0.0;
    const double t_ref =
        best_of(reps, [&] { ref = pair_statistic_direct_reference(angles, f, trunc); });
    const double t_fast = best_of(reps, [&] { fast = pair_statistic_direct(angles, f, trunc); });
    const double gap = std::abs(ref - fast) / (1.0 + std::abs(ref));
    report("pair_statistic_direct", t_ref, t_fast, gap <= 1e-9);
    std::printf("  (running-sum reference vs pairwise kernel, rel gap %.3e)\n", gap);
#ifdef _OPENMP
    // The parallel kernel itself must not depend on the worker count.
    const int workers = omp_get_max_threads();
    omp_set_num_threads(1);
    const double one = pair_statistic_direct(angles, f, trunc);
    omp_set_num_threads(4);
    const double four = pair_statistic_direct(angles, f, trunc);
    omp_set_num_threads(workers);
    std::printf("  (1 worker vs 4 workers: %s)\n", one == four ? "bit-identical" : "DIFFER");
#endif
  }

  {
    std::vector<std::complex<double>> ref, fast;
    const double t_ref = best_of(reps, [&] { ref = power_traces_reference(angles, n); });
    const double t_fast = best_of(reps, [&] { fast = power_traces(angles, n); });
    double gap = 0.0;
    for (std::size_t k = 0; k < ref.size(); ++k)
      gap = std::max(gap, std::abs(ref[k] - fast[k]));
    report("power_traces", t_ref, t_fast, gap <= 1e-9 * static_cast<double>(n));
    std::printf("  (trace recurrence vs direct trig, max gap %.3e)\n", gap);
  }

  {
    ExperimentConfig config;
    config.kind = ExperimentKind::kVarianceCheck;
    config.family = "coslist:1";
    config.n_list = {32};
    config.samples = mc_samples;
    config.seed = 99;
    config.seed_set = true;
    config.threads = 1;
    std::string serial_json, parallel_json;
    const double t_serial = best_of(reps, [&] {
      serial_json = summary_to_json(run_experiment(config)).dump();
    });
    config.threads = 0;
    const double t_parallel = best_of(reps, [&] {
      parallel_json = summary_to_json(run_experiment(config)).dump();
    });
    // The thread count is part of the config echo; strip it before comparing.
    const std::string needle = "\"threads\":";
    const auto cut = [&](const std::string& s) {
      const std::size_t at = s.find(needle);
      return s.substr(0, at) + s.substr(s.find(',', at));
    };
    report("monte_carlo_loop", t_serial, t_parallel,
           cut(serial_json) == cut(parallel_json));
  }
  return 0;
}
