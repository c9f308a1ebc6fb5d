#pragma once

#include <vector>

#include "abps/grid.hpp"
#include "abps/kernel.hpp"

namespace abps {

// Time-sliced solution of a reaction-diffusion problem on [0,1].
struct PdeSolution {
  std::vector<double> times;        // increasing, starts at 0
  std::vector<GridFunction> slices; // one dim-1 slice per time
  int resolution = 0;
  double dt = 0;

  // Nearest stored slice; throws if |t - t_i| exceeds dt/2 for all i.
  const GridFunction& at_time(double t) const;
  // Linear interpolation between adjacent slices; t clamped to [0,T].
  GridFunction interp_time(double t) const;
  double final_time() const { return times.back(); }
};

// Mild solution of  du/dt = (1/2) Lap u - u^2  (Neumann), advanced by Strang
// splitting: exact pointwise reaction half-step u -> u/(1 + u dt/2), full
// diffusion step P_dt, reaction half-step.
PdeSolution solve_mild(const GridFunction& u0, double T, double dt,
                       const KernelParams& params = {});

// Kernel-smoothed variant: du/dt = (1/2) Lap u - u * (K_N u) with
// (K_N f)(x) = int p(2/N^2,x,z) f(z) dz. Products of this solution solve the
// annihilation-only approximating hierarchy by construction.
PdeSolution solve_smoothed(const GridFunction& u0, double T, double dt, int N,
                           const KernelParams& params = {});

// Covariance of the fluctuation field in the Neumann cosine basis
// e_0 = 1, e_n = sqrt(2) cos(n pi x).
struct CovarianceState {
  int basis_size = 0;
  std::vector<double> cov;  // row-major basis_size x basis_size, symmetric
  double time = 0;

  double at(int m, int n) const { return cov[static_cast<size_t>(m) * basis_size + n]; }
  double min_eigenvalue() const;  // Jacobi iteration; matrix is small
};

// Evolves C' = A C + C A^T + Q with A = -Lambda - 2 U(t),
// Lambda = diag(n^2 pi^2 / 2), U the Galerkin matrix of multiplication by
// u(t,.), and Q_mn = <grad e_m . grad e_n, u> + 2 <e_m e_n, u^2>.
// The stiff -Lambda decay is applied exactly (Strang split), Heun handles the
// bounded remainder, so any basis_size is stable. cov0 empty means C(0) = 0.
std::vector<CovarianceState> solve_fluctuation_covariance(
    const PdeSolution& u, int basis_size, double dt,
    const std::vector<double>& cov0 = {});

std::vector<double> basis_coefficients(const GridFunction& phi, int basis_size);

// Var(Y_t(phi)) = phi_hat^T C(t) phi_hat.
double fluctuation_variance_of(const CovarianceState& state, const GridFunction& phi);

}  // namespace abps
