#pragma once

#include <vector>

#include "abps/particles.hpp"

namespace abps {

// Monte Carlo ensemble: per-replica snapshot trajectories at common record
// times. Replica r draws from RngStream(seed, r), so parallel and serial runs
// produce identical data.
struct ReplicaEnsemble {
  SimConfig config;
  std::vector<std::vector<ParticleState>> replicas;  // [replica][record index]

  int replica_count() const { return static_cast<int>(replicas.size()); }
  int record_index(double t) const;  // throws if t is not a record time
};

// threads == 1 is the serial reference path; threads == 0 uses the OpenMP
// default. Output is independent of the thread count.
ReplicaEnsemble run_ensemble(const SimConfig& config, int replicas, int threads = 0);

}  // namespace abps
