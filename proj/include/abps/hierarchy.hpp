#pragma once

#include <vector>

#include "abps/ensemble.hpp"
#include "abps/pde.hpp"

namespace abps {

struct HierarchyParams {
  double time_quad_dt = 0.0125;  // trapezoid spacing of the time integral
  KernelParams kernel;
};

struct HierarchyResidual {
  int k = 1;
  double t = 0;
  double sup_residual = 0;
  int resolution = 0;
  double time_quad_dt = 0;
};

// Residual of the limiting hierarchy with product input gamma^(k) = prod u:
//   gamma_t - P_t gamma_0 + sum_i int_0^t P_{t-s} gamma^{(k+1)}_s(..., z_i) ds
// evaluated on u's grid with tensor semigroups and trapezoid time quadrature.
// At k = 1 this is the mild-equation residual of the solution itself.
HierarchyResidual limiting_residual(const PdeSolution& u, int k, double t,
                                    const HierarchyParams& params = {});

struct FiniteResidualReport {
  double t = 0;
  int bins = 0;
  std::vector<double> residual_mean, residual_se, zscores;
  double max_abs_z = 0;
};

// Finite-N hierarchy check at k = 1: per replica, compares the F^(1) histogram
// at t against P_t F^(1)_0 - int_0^t P_{t-s} (R F^(2)_s) ds, with the R-kernel
// integrated against histogram cells by exact Gaussian-cell integrals (the
// Q-term is an empty sum at k = 1). quad_times must start at 0 and end at t
// and be record times of the ensemble.
FiniteResidualReport finite_residual(const ReplicaEnsemble& ensemble, double t, int bins,
                                     const std::vector<double>& quad_times,
                                     const HierarchyParams& params = {});

}  // namespace abps
