#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "abps/grid.hpp"
#include "abps/kernel.hpp"
#include "abps/rng.hpp"

namespace abps {

// Injectable pair intensity with the (1/N)-scaling contract. rate(x,y) must be
// symmetric and bounded by sup_bound everywhere.
struct RateModel {
  std::function<double(double, double)> rate;
  double sup_bound = 0;
};

struct SimConfig {
  int N = 100;
  GridFunction u0 = GridFunction::constant(1.0, 401);
  double T = 1.0;
  double dt = 0;             // 0: min(lambda * 2/N^2, 1e-3)
  double lambda = 0.5;
  double cutoff_radius = 0;  // 0: min(8/N, 1)
  uint64_t seed = 1;
  std::vector<double> record_times;
  bool annihilation = true;
  KernelParams kernel;
  std::optional<RateModel> rate_override;

  double resolved_dt() const;
  double resolved_cutoff() const;
  int64_t step_count() const;

  // Per-unordered-pair intensity (1/N) p(2/N^2, x, y); no cutoff applied.
  double pair_rate(double x, double y) const;
  // Upper bound on pair_rate over [0,1]^2 (attained at the corners).
  double rate_bound() const;

  void validate() const;
};

// One realization of the particle system: positions of alive particles only.
struct ParticleState {
  std::vector<double> positions;
  double time = 0;
  int initial_count = 0;

  int alive() const { return static_cast<int>(positions.size()); }
};

// Period-2 triangle-wave reflection of the real line onto [0,1]; applying it
// to x + Gaussian increment realizes the exact reflected-BM transition in law.
double fold_unit(double x);

// round(N * mass(u0)) particles placed i.i.d. with density u0 / mass(u0) by
// inverse-CDF sampling on the grid. Throws std::domain_error if u0 vanishes.
ParticleState init_particles(const SimConfig& config, RngStream& rng);

// One discrete-time step: diffusion of every particle, then pairwise soft
// annihilation (pairs within the cutoff marked with probability
// 1 - exp(-rate*dt), marked pairs resolved in uniformly random order with a
// liveness check).
void step(ParticleState& state, const SimConfig& config, RngStream& rng);

struct PairRate {
  int i, j;  // i < j, indices into positions
  double rate;
};

// All unordered pairs within the cutoff, by the O(m^2) scan.
std::vector<PairRate> pair_rates_bruteforce(const ParticleState& state, const SimConfig& config);
// Same pairs via a sorted sweep over windows of width cutoff; O(m log m + m k).
std::vector<PairRate> pair_rates_neighbor(const ParticleState& state, const SimConfig& config);

// Trajectory snapshots at config.record_times, one entry per requested time.
// Distributionally identical to iterating step(), but annihilation trials are
// drawn by geometric skips over the (step, pair) space and particles advance
// lazily between their interaction candidacies, so cost scales with the
// number of candidate events rather than steps x particles.
std::vector<ParticleState> run(const SimConfig& config, RngStream& rng);

// Per-step dense mode: literal step() dynamics, invoking the observer after
// each diffusion sub-step (before annihilation) with the candidate pair list.
using StepObserver =
    std::function<void(const ParticleState& state, const std::vector<PairRate>& pairs, double dt)>;
std::vector<ParticleState> run_dense(const SimConfig& config, RngStream& rng,
                                     const StepObserver& observer);

}  // namespace abps
