#pragma once

#include <vector>

#include "abps/ensemble.hpp"
#include "abps/grid.hpp"

namespace abps {

// <X_t, phi> = (1/N) sum phi(x_i); phi evaluated by linear interpolation.
double empirical_pairing(const ParticleState& state, const GridFunction& phi, int N);

// Centered differences with one-sided Neumann stencils at the endpoints.
GridFunction half_laplacian(const GridFunction& phi);
GridFunction gradient_squared(const GridFunction& phi);

// Histogram estimate of the k-correlation function, midpoint convention.
struct CorrelationEstimate {
  int k = 1;
  double t = 0;
  int bins = 0;
  std::vector<double> values;           // size bins^k
  std::vector<double> standard_errors;  // same shape

  double bin_width() const { return 1.0 / bins; }
  double at(int b) const { return values[b]; }
  double at(int b, int c) const { return values[static_cast<size_t>(b) * bins + c]; }
};

// Each ordered k-tuple of distinct alive particles contributes
// 1 / (normalizer * binvolume) to its bin; replica mean and standard error.
// falling_factorial selects N(N-1)...(N-k+1) (default) versus N^k.
CorrelationEstimate estimate_correlation(const ReplicaEnsemble& ensemble, int k, double t,
                                         int bins, bool falling_factorial = true);

// Histogram for a single state (used replica-wise by the hierarchy checks).
std::vector<double> correlation_histogram(const ParticleState& state, int k, int bins, int N,
                                          bool falling_factorial = true);

struct MomentReport {
  double lhs = 0, rhs = 0, standard_error = 0, zscore = 0;
};

// Second-moment identity: E<phi,X>^2 = (1/N) int phi^2 F1 + ((N-1)/N) int int
// phi phi F2, assembled from the two histogram estimates with phi integrated
// exactly (cell averages) against the piecewise-constant bins.
// The z-score uses the per-replica paired difference, so correlations between
// the two sides are accounted for.
MomentReport moment_identity_check(const ReplicaEnsemble& ensemble, const GridFunction& phi,
                                   double t, int bins = 20);

struct VarianceEstimate {
  double variance = 0;
  double standard_error = 0;
};

// N * unbiased sample variance of <X_t,phi> across replicas; the standard
// error comes from the fourth-moment formula for Var(s^2).
VarianceEstimate fluctuation_variance(const ReplicaEnsemble& ensemble, const GridFunction& phi,
                                      double t);

// Dense-path martingale data: M reconstructed from the generator drift, QV
// accumulated from the jump and diffusion terms, both by step-wise rectangle
// rule. Indexed [phi][replica][record time].
struct MartingalePaths {
  std::vector<double> record_times;
  std::vector<std::vector<std::vector<double>>> M;
  std::vector<std::vector<std::vector<double>>> QV;
};

MartingalePaths run_martingale_paths(const SimConfig& config,
                                     const std::vector<GridFunction>& phis, int replicas,
                                     int threads = 0);

struct MartingaleReport {
  double mean_M = 0, var_M = 0, qv_mean = 0;
  double z_mean = 0;  // replica mean of M against 0
  double z_var = 0;   // paired statistic M^2 - <M> against 0
};

MartingaleReport martingale_check(const MartingalePaths& paths, int phi_index, double t);

}  // namespace abps
