// Times serial::run_cell against the OpenMP run_cell on the same cells and
// confirms the two summaries agree bit for bit.
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <cstring>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "conduct/montecarlo.hpp"

namespace {

template <class F>
double seconds(F&& f) {
  const auto t0 = std::chrono::steady_clock::now();
  f();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

bool same(const conduct::McSummary& a, const conduct::McSummary& b) {
  if (a.n_valid != b.n_valid || a.n_invalid != b.n_invalid) return false;
  for (std::size_t k = 0; k < conduct::kParameterCount; ++k) {
    if (std::memcmp(&a.stats[k], &b.stats[k], sizeof a.stats[k]) != 0) return false;
  }
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  conduct::ExperimentGrid grid;
  grid.n_reps = argc > 1 ? std::strtoul(argv[1], nullptr, 10) : 200;
  int workers = argc > 2 ? std::atoi(argv[2]) : 0;
#ifdef _OPENMP
  if (workers <= 0) workers = omp_get_max_threads();
#endif

  std::printf("reps=%zu workers=%d\n", grid.n_reps, workers);
  std::printf("%8s %6s %12s %12s %8s %s\n", "sigma", "T", "serial[s]", "omp[s]", "speedup", "match");
  bool all_match = true;
  for (std::size_t i = 0; i < grid.sigmas.size(); ++i) {
    for (std::size_t j = 0; j < grid.sample_sizes.size(); ++j) {
      conduct::McSummary ref, par;
      const double ts = seconds([&] { ref = conduct::serial::run_cell(grid, i, j); });
      const double tp = seconds([&] { par = conduct::run_cell(grid, i, j, workers); });
      const bool ok = same(ref, par);
      all_match = all_match && ok;
      std::printf("%8.3f %6zu %12.4f %12.4f %8.2f %s\n", grid.sigmas[i], grid.sample_sizes[j], ts,
                  tp, ts / tp, ok ? "yes" : "NO");
    }
  }
  return all_match ? 0 : 1;
}
