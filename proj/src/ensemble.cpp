#include "abps/ensemble.hpp"

#include <cmath>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace abps {

int ReplicaEnsemble::record_index(double t) const {
  for (size_t i = 0; i < config.record_times.size(); ++i)
    if (std::abs(config.record_times[i] - t) <= 1e-12) return static_cast<int>(i);
  throw std::invalid_argument("ReplicaEnsemble: t is not a record time");
}

ReplicaEnsemble run_ensemble(const SimConfig& config, int replicas, int threads) {
  if (replicas < 1) throw std::invalid_argument("run_ensemble: replicas >= 1");
  config.validate();
  ReplicaEnsemble ens;
  ens.config = config;
  ens.replicas.resize(replicas);

  if (threads == 1) {
    for (int r = 0; r < replicas; ++r) {
      RngStream rng(config.seed, static_cast<uint64_t>(r));
      ens.replicas[r] = run(config, rng);
    }
    return ens;
  }

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(threads > 0 ? threads : omp_get_max_threads())
#endif
  for (int r = 0; r < replicas; ++r) {
    RngStream rng(config.seed, static_cast<uint64_t>(r));
    ens.replicas[r] = run(config, rng);
  }
  return ens;
}

}  // namespace abps
