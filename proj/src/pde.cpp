#include "abps/pde.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace abps {

namespace {

constexpr double kPi = 3.141592653589793238462643;

void check_u0(const GridFunction& u0, double T, double dt) {
  u0.validate();
  if (u0.dim != 1) throw std::invalid_argument("solver: u0 must be dim-1");
  if (u0.min_value() < 0) throw std::domain_error("solver: u0 must be nonnegative");
  if (!(dt > 0)) throw std::domain_error("solver: dt must be positive");
  if (dt > T) throw std::domain_error("solver: dt must not exceed T");
}

void reaction_half_step(std::vector<double>& u, const std::vector<double>& decay, double s) {
  for (size_t i = 0; i < u.size(); ++i) u[i] = u[i] / (1.0 + decay[i] * s);
}

}  // namespace

const GridFunction& PdeSolution::at_time(double t) const {
  for (size_t i = 0; i < times.size(); ++i)
    if (std::abs(times[i] - t) <= 0.5 * dt) return slices[i];
  throw std::domain_error("PdeSolution: time not on stored grid");
}

GridFunction PdeSolution::interp_time(double t) const {
  t = std::clamp(t, times.front(), times.back());
  size_t i = 0;
  while (i + 1 < times.size() && times[i + 1] < t) ++i;
  if (i + 1 == times.size()) return slices[i];
  double w = (t - times[i]) / (times[i + 1] - times[i]);
  GridFunction out = slices[i];
  for (int j = 0; j < resolution; ++j)
    out.values[j] = (1.0 - w) * slices[i].values[j] + w * slices[i + 1].values[j];
  return out;
}

PdeSolution solve_mild(const GridFunction& u0, double T, double dt, const KernelParams& params) {
  check_u0(u0, T, dt);
  const int steps = std::max<int>(1, static_cast<int>(std::llround(T / dt)));
  const double h = T / steps;
  SemigroupOperator diffuse(h, u0.resolution, params);

  PdeSolution sol;
  sol.resolution = u0.resolution;
  sol.dt = h;
  sol.times.reserve(steps + 1);
  sol.slices.reserve(steps + 1);
  sol.times.push_back(0);
  sol.slices.push_back(u0);

  GridFunction u = u0;
  std::vector<double> tmp(u.values.size());
  for (int s = 0; s < steps; ++s) {
    reaction_half_step(u.values, u.values, h / 2);
    diffuse.apply_raw(u.values.data(), tmp.data());
    u.values.swap(tmp);
    reaction_half_step(u.values, u.values, h / 2);
    sol.times.push_back((s + 1) * h);
    sol.slices.push_back(u);
  }
  return sol;
}

PdeSolution solve_smoothed(const GridFunction& u0, double T, double dt, int N,
                           const KernelParams& params) {
  check_u0(u0, T, dt);
  if (N < 2) throw std::domain_error("solve_smoothed: N must be >= 2");
  const int steps = std::max<int>(1, static_cast<int>(std::llround(T / dt)));
  const double h = T / steps;
  SemigroupOperator diffuse(h, u0.resolution, params);
  // Interaction smoother; always image-evaluated since 2/N^2 can exceed the
  // crossover for small N while staying in the images' regime of validity.
  SemigroupOperator smooth(2.0 / (static_cast<double>(N) * N), u0.resolution, params,
                           /*force_images=*/true);

  PdeSolution sol;
  sol.resolution = u0.resolution;
  sol.dt = h;
  sol.times.push_back(0);
  sol.slices.push_back(u0);

  GridFunction u = u0;
  std::vector<double> tmp(u.values.size()), g(u.values.size());
  for (int s = 0; s < steps; ++s) {
    smooth.apply_raw(u.values.data(), g.data());
    reaction_half_step(u.values, g, h / 2);
    diffuse.apply_raw(u.values.data(), tmp.data());
    u.values.swap(tmp);
    smooth.apply_raw(u.values.data(), g.data());
    reaction_half_step(u.values, g, h / 2);
    sol.times.push_back((s + 1) * h);
    sol.slices.push_back(u);
  }
  return sol;
}

double CovarianceState::min_eigenvalue() const {
  // Cyclic Jacobi on a copy; basis_size is a few dozen at most.
  int n = basis_size;
  std::vector<double> a = cov;
  auto A = [&](int i, int j) -> double& { return a[static_cast<size_t>(i) * n + j]; };
  for (int sweep = 0; sweep < 50; ++sweep) {
    double off = 0;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) off += A(p, q) * A(p, q);
    if (off < 1e-30) break;
    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) {
        double apq = A(p, q);
        if (std::abs(apq) < 1e-300) continue;
        double theta = (A(q, q) - A(p, p)) / (2.0 * apq);
        double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1));
        double c = 1.0 / std::sqrt(t * t + 1), s = t * c;
        for (int k = 0; k < n; ++k) {
          double akp = A(k, p), akq = A(k, q);
          A(k, p) = c * akp - s * akq;
          A(k, q) = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          double apk = A(p, k), aqk = A(q, k);
          A(p, k) = c * apk - s * aqk;
          A(q, k) = s * apk + c * aqk;
        }
      }
    }
  }
  double mn = A(0, 0);
  for (int i = 1; i < n; ++i) mn = std::min(mn, A(i, i));
  return mn;
}

namespace {

struct GalerkinTables {
  int basis, res;
  std::vector<double> e;   // basis x res, e_n(x_j)
  std::vector<double> de;  // basis x res, e_n'(x_j)
  std::vector<double> w;   // trapezoid weights

  GalerkinTables(int basis_size, int resolution) : basis(basis_size), res(resolution) {
    e.resize(static_cast<size_t>(basis) * res);
    de.resize(static_cast<size_t>(basis) * res);
    w = trapezoid_weights(res);
    for (int n = 0; n < basis; ++n) {
      for (int j = 0; j < res; ++j) {
        double x = static_cast<double>(j) / (res - 1);
        if (n == 0) {
          e[j] = 1.0;
          de[j] = 0.0;
        } else {
          e[static_cast<size_t>(n) * res + j] = std::sqrt(2.0) * std::cos(n * kPi * x);
          de[static_cast<size_t>(n) * res + j] = -std::sqrt(2.0) * n * kPi * std::sin(n * kPi * x);
        }
      }
    }
  }

  // bounded drift part A = -2U and noise Q for the slice u; the stiff -Lambda
  // part is applied separately as an exact decay factor.
  void assemble(const std::vector<double>& u, std::vector<double>& A,
                std::vector<double>& Q) const {
    int B = basis;
    A.assign(static_cast<size_t>(B) * B, 0.0);
    Q.assign(static_cast<size_t>(B) * B, 0.0);
    for (int m = 0; m < B; ++m) {
      for (int n = m; n < B; ++n) {
        double umn = 0, gmn = 0, smn = 0;
        const double* em = &e[static_cast<size_t>(m) * res];
        const double* en = &e[static_cast<size_t>(n) * res];
        const double* dm = &de[static_cast<size_t>(m) * res];
        const double* dn = &de[static_cast<size_t>(n) * res];
        for (int j = 0; j < res; ++j) {
          double wu = w[j] * u[j];
          umn += wu * em[j] * en[j];
          gmn += wu * dm[j] * dn[j];
          smn += w[j] * u[j] * u[j] * em[j] * en[j];
        }
        double a = -2.0 * umn;
        A[static_cast<size_t>(m) * B + n] = a;
        A[static_cast<size_t>(n) * B + m] = a;
        // annihilation removes particles in pairs, hence the factor 2
        double q = gmn + 2.0 * smn;
        Q[static_cast<size_t>(m) * B + n] = q;
        Q[static_cast<size_t>(n) * B + m] = q;
      }
    }
  }
};

// dC = A C + C A^T + Q (A symmetric here, but keep the general form).
void lyapunov_rhs(int B, const std::vector<double>& A, const std::vector<double>& C,
                  const std::vector<double>& Q, std::vector<double>& out) {
  out.assign(static_cast<size_t>(B) * B, 0.0);
  for (int i = 0; i < B; ++i)
    for (int k = 0; k < B; ++k) {
      double aik = A[static_cast<size_t>(i) * B + k];
      if (aik == 0) continue;
      for (int j = 0; j < B; ++j)
        out[static_cast<size_t>(i) * B + j] += aik * C[static_cast<size_t>(k) * B + j];
    }
  for (int i = 0; i < B; ++i)
    for (int j = 0; j < B; ++j) {
      double s = 0;
      for (int k = 0; k < B; ++k)
        s += C[static_cast<size_t>(i) * B + k] * A[static_cast<size_t>(j) * B + k];
      out[static_cast<size_t>(i) * B + j] += s + Q[static_cast<size_t>(i) * B + j];
    }
}

}  // namespace

std::vector<CovarianceState> solve_fluctuation_covariance(const PdeSolution& u, int basis_size,
                                                          double dt,
                                                          const std::vector<double>& cov0) {
  if (basis_size < 1) throw std::domain_error("covariance: basis_size >= 1");
  if (!(dt > 0)) throw std::domain_error("covariance: dt must be positive");
  const int B = basis_size;
  const double T = u.final_time();
  const int steps = std::max<int>(1, static_cast<int>(std::llround(T / dt)));
  const double h = T / steps;

  std::vector<double> C;
  if (cov0.empty()) {
    C.assign(static_cast<size_t>(B) * B, 0.0);
  } else {
    if (cov0.size() != static_cast<size_t>(B) * B)
      throw std::invalid_argument("covariance: cov0 size mismatch");
    C = cov0;
  }

  GalerkinTables tab(B, u.resolution);
  std::vector<CovarianceState> out;
  out.push_back({B, C, 0.0});

  // Strang split: the mode decay exp(-Lambda h/2) C exp(-Lambda h/2) is exact
  // (so arbitrarily stiff high modes are stable), Heun handles the bounded
  // -2U coupling and the Q source in between.
  std::vector<double> decay(B);
  for (int n = 0; n < B; ++n) decay[n] = std::exp(-0.25 * n * n * kPi * kPi * h);
  auto damp = [&](std::vector<double>& M) {
    for (int i = 0; i < B; ++i)
      for (int j = 0; j < B; ++j) M[static_cast<size_t>(i) * B + j] *= decay[i] * decay[j];
  };

  std::vector<double> A0, Q0, A1, Q1, k1, k2, Cpred;
  for (int s = 0; s < steps; ++s) {
    double t0 = s * h, t1 = (s + 1) * h;
    tab.assemble(u.interp_time(t0).values, A0, Q0);
    tab.assemble(u.interp_time(t1).values, A1, Q1);
    damp(C);
    lyapunov_rhs(B, A0, C, Q0, k1);
    Cpred = C;
    for (size_t i = 0; i < C.size(); ++i) Cpred[i] += h * k1[i];
    lyapunov_rhs(B, A1, Cpred, Q1, k2);
    for (size_t i = 0; i < C.size(); ++i) C[i] += 0.5 * h * (k1[i] + k2[i]);
    damp(C);
    out.push_back({B, C, t1});
  }
  return out;
}

std::vector<double> basis_coefficients(const GridFunction& phi, int basis_size) {
  phi.validate();
  GalerkinTables tab(basis_size, phi.resolution);
  std::vector<double> c(basis_size, 0.0);
  for (int n = 0; n < basis_size; ++n) {
    const double* en = &tab.e[static_cast<size_t>(n) * tab.res];
    double s = 0;
    for (int j = 0; j < tab.res; ++j) s += tab.w[j] * en[j] * phi.values[j];
    c[n] = s;
  }
  return c;
}

double fluctuation_variance_of(const CovarianceState& state, const GridFunction& phi) {
  auto c = basis_coefficients(phi, state.basis_size);
  double v = 0;
  for (int m = 0; m < state.basis_size; ++m)
    for (int n = 0; n < state.basis_size; ++n) v += c[m] * state.at(m, n) * c[n];
  return v;
}

}  // namespace abps
