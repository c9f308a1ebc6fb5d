// Micro-benchmark: brute-force versus sorted-sweep pair scans, and the serial
// reference ensemble loop versus the OpenMP fan-out.

#include <chrono>
#include <cstdio>
#include <cstdlib>

#include "abps/ensemble.hpp"
#include "abps/particles.hpp"

using namespace abps;
using clock_type = std::chrono::steady_clock;

namespace {

double seconds_since(clock_type::time_point t0) {
  return std::chrono::duration<double>(clock_type::now() - t0).count();
}

void bench_scans(int m, int iters) {
  SimConfig cfg;
  cfg.N = m;
  ParticleState st;
  RngStream rng(99, static_cast<uint64_t>(m));
  for (int i = 0; i < m; ++i) st.positions.push_back(rng.uniform());

  double r_brute = 0, r_neigh = 0;
  size_t pairs = 0;
  auto t0 = clock_type::now();
  for (int it = 0; it < iters; ++it) {
    auto p = pair_rates_bruteforce(st, cfg);
    pairs = p.size();
    r_brute += p.empty() ? 0 : p.front().rate;
  }
  double tb = seconds_since(t0) / iters;

  t0 = clock_type::now();
  for (int it = 0; it < iters; ++it) {
    auto p = pair_rates_neighbor(st, cfg);
    if (p.size() != pairs) std::abort();  // must agree exactly
    r_neigh += p.empty() ? 0 : p.front().rate;
  }
  double tn = seconds_since(t0) / iters;

  std::printf("scan   m=%-6d pairs=%-8zu brute=%9.3f ms  sweep=%9.3f ms  speedup=%6.1fx\n", m,
              pairs, 1e3 * tb, 1e3 * tn, tb / tn);
  (void)r_brute;
  (void)r_neigh;
}

void bench_ensemble(int N, int replicas) {
  SimConfig cfg;
  cfg.N = N;
  cfg.T = 1.0;
  cfg.record_times = {1.0};

  auto t0 = clock_type::now();
  auto serial = run_ensemble(cfg, replicas, 1);
  double ts = seconds_since(t0);

  t0 = clock_type::now();
  auto parallel = run_ensemble(cfg, replicas, 0);
  double tp = seconds_since(t0);

  for (int r = 0; r < replicas; ++r)
    if (serial.replicas[r].back().positions != parallel.replicas[r].back().positions)
      std::abort();  // thread count must not change the output

  std::printf("run    N=%-6d R=%-5d serial=%8.3f s  openmp=%8.3f s  speedup=%5.2fx\n", N,
              replicas, ts, tp, ts / tp);
}

}  // namespace

int main(int argc, char** argv) {
  int scale = argc > 1 ? std::atoi(argv[1]) : 1;
  std::printf("pair-scan comparison (identical output checked each call)\n");
  bench_scans(300, 200 * scale);
  bench_scans(1000, 50 * scale);
  bench_scans(3000, 5 * scale);
  bench_scans(10000, 1 * scale);
  std::printf("ensemble fan-out (bitwise agreement checked)\n");
  bench_ensemble(200, 50 * scale);
  bench_ensemble(400, 50 * scale);
  return 0;
}
