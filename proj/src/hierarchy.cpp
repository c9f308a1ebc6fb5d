#include "abps/hierarchy.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <stdexcept>

#include "abps/stats.hpp"

namespace abps {

namespace {

// Non-uniform trapezoid weights for increasing time points.
std::vector<double> time_weights(const std::vector<double>& s) {
  std::vector<double> w(s.size(), 0.0);
  for (size_t j = 0; j + 1 < s.size(); ++j) {
    double h = s[j + 1] - s[j];
    w[j] += 0.5 * h;
    w[j + 1] += 0.5 * h;
  }
  return w;
}

}  // namespace

HierarchyResidual limiting_residual(const PdeSolution& u, int k, double t,
                                    const HierarchyParams& params) {
  if (k != 1 && k != 2) throw std::invalid_argument("limiting_residual: k must be 1 or 2");
  if (t > u.final_time() + 1e-12)
    throw std::invalid_argument("limiting_residual: t beyond solution horizon");
  const int res = u.resolution;

  int nq = std::max<int>(1, static_cast<int>(std::llround(t / params.time_quad_dt)));
  std::vector<double> squad(nq + 1);
  for (int j = 0; j <= nq; ++j) squad[j] = t * j / nq;
  auto wq = time_weights(squad);

  std::map<int64_t, std::unique_ptr<SemigroupOperator>> ops;  // keyed by lag in ulps of t/nq
  auto op_for = [&](double lag) -> const SemigroupOperator* {
    if (lag <= 1e-15) return nullptr;  // identity
    int64_t key = std::llround(lag * 1e12);
    auto it = ops.find(key);
    if (it == ops.end())
      it = ops.emplace(key, std::make_unique<SemigroupOperator>(lag, res, params.kernel)).first;
    return it->second.get();
  };

  const GridFunction& u0 = u.slices.front();
  const GridFunction ut = u.interp_time(t);

  if (k == 1) {
    GridFunction acc = op_for(t) ? op_for(t)->apply(u0) : u0;  // P_t u_0
    for (int j = 0; j <= nq; ++j) {
      GridFunction us = u.interp_time(squad[j]);
      for (auto& v : us.values) v = v * v;
      GridFunction g = op_for(t - squad[j]) ? op_for(t - squad[j])->apply(us) : us;
      for (int i = 0; i < res; ++i) acc.values[i] -= wq[j] * g.values[i];
    }
    double sup = 0;
    for (int i = 0; i < res; ++i) sup = std::max(sup, std::abs(ut.values[i] - acc.values[i]));
    return {1, t, sup, res, t / nq};
  }

  // k = 2: gamma^(2) = u (x) u; integrand for i=1 is u^2(z1) u(z2), the i=2
  // term is its transpose and the tensor semigroup commutes with transposition.
  auto outer = [&](const std::vector<double>& a, const std::vector<double>& b) {
    GridFunction g;
    g.dim = 2;
    g.resolution = res;
    g.values.resize(static_cast<size_t>(res) * res);
    for (int i = 0; i < res; ++i)
      for (int j = 0; j < res; ++j) g.at(i, j) = a[i] * b[j];
    return g;
  };

  GridFunction gamma0 = outer(u0.values, u0.values);
  GridFunction acc = op_for(t) ? op_for(t)->apply(gamma0) : gamma0;
  for (int j = 0; j <= nq; ++j) {
    GridFunction us = u.interp_time(squad[j]);
    std::vector<double> us2(us.values);
    for (auto& v : us2) v = v * v;
    GridFunction g1 = outer(us2, us.values);
    GridFunction pg = op_for(t - squad[j]) ? op_for(t - squad[j])->apply(g1) : g1;
    for (int a = 0; a < res; ++a)
      for (int b = 0; b < res; ++b)
        acc.at(a, b) -= wq[j] * (pg.at(a, b) + pg.at(b, a));
  }
  GridFunction gamma_t = outer(ut.values, ut.values);
  double sup = 0;
  for (size_t i = 0; i < acc.values.size(); ++i)
    sup = std::max(sup, std::abs(gamma_t.values[i] - acc.values[i]));
  return {2, t, sup, res, t / nq};
}

FiniteResidualReport finite_residual(const ReplicaEnsemble& ensemble, double t, int bins,
                                     const std::vector<double>& quad_times,
                                     const HierarchyParams& params) {
  if (quad_times.size() < 2 || std::abs(quad_times.front()) > 1e-12 ||
      std::abs(quad_times.back() - t) > 1e-12)
    throw std::invalid_argument("finite_residual: quad_times must span [0, t]");
  const int R = ensemble.replica_count();
  const int N = ensemble.config.N;
  const double w = 1.0 / bins;

  // Bin-to-bin transport matrices P_tau[b][c] = int_cell_c p(tau, mid_b, .).
  auto transport = [&](double tau) {
    std::vector<double> M(static_cast<size_t>(bins) * bins, 0.0);
    if (tau <= 1e-15) {
      for (int b = 0; b < bins; ++b) M[static_cast<size_t>(b) * bins + b] = 1.0;
      return M;
    }
    for (int b = 0; b < bins; ++b) {
      double x = (b + 0.5) * w;
      for (int c = 0; c < bins; ++c)
        M[static_cast<size_t>(b) * bins + c] =
            kernel_cell_integral(tau, x, c * w, (c + 1) * w, params.kernel);
    }
    return M;
  };
  std::vector<std::vector<double>> P_lag;
  for (double s : quad_times) P_lag.push_back(transport(t - s));

  // R-operator kernel against z-cells: spike p(2/N^2, x_b, .) integrated
  // exactly (error-function differences); its width ~1/N is below bin width.
  double t_int = 2.0 / (static_cast<double>(N) * N);
  KernelParams spike = params.kernel;
  spike.crossover_time = std::max(spike.crossover_time, 2 * t_int);  // keep images
  // The ordered-pair sum against the falling-factorial F2 carries N(N-1)/N^2.
  const double pair_factor = static_cast<double>(N - 1) / N;
  std::vector<double> RK(static_cast<size_t>(bins) * bins);
  for (int b = 0; b < bins; ++b) {
    double x = (b + 0.5) * w;
    for (int c = 0; c < bins; ++c)
      RK[static_cast<size_t>(b) * bins + c] =
          pair_factor * kernel_cell_integral(t_int, x, c * w, (c + 1) * w, spike);
  }

  auto wq = time_weights(quad_times);

  std::vector<int> rec_idx;
  for (double s : quad_times) rec_idx.push_back(ensemble.record_index(s));
  int rec_t = ensemble.record_index(t);

  std::vector<double> mean(bins, 0.0), m2(bins, 0.0);
  std::vector<double> rhs(bins), rf(bins), tmp(bins);
  for (int r = 0; r < R; ++r) {
    auto h1_0 = correlation_histogram(ensemble.replicas[r][rec_idx.front()], 1, bins, N);
    // P_t F1_0
    for (int b = 0; b < bins; ++b) {
      double s = 0;
      for (int c = 0; c < bins; ++c) s += P_lag.front()[static_cast<size_t>(b) * bins + c] * h1_0[c];
      rhs[b] = s;
    }
    for (size_t j = 0; j < quad_times.size(); ++j) {
      auto h2 = correlation_histogram(ensemble.replicas[r][rec_idx[j]], 2, bins, N);
      for (int b = 0; b < bins; ++b) {
        double s = 0;
        for (int c = 0; c < bins; ++c)
          s += h2[static_cast<size_t>(b) * bins + c] * RK[static_cast<size_t>(b) * bins + c];
        rf[b] = s;
      }
      for (int b = 0; b < bins; ++b) {
        double s = 0;
        for (int c = 0; c < bins; ++c) s += P_lag[j][static_cast<size_t>(b) * bins + c] * rf[c];
        tmp[b] = s;
      }
      for (int b = 0; b < bins; ++b) rhs[b] -= wq[j] * tmp[b];
    }
    auto h1_t = correlation_histogram(ensemble.replicas[r][rec_t], 1, bins, N);
    for (int b = 0; b < bins; ++b) {
      double d = h1_t[b] - rhs[b];
      double delta = d - mean[b];
      mean[b] += delta / (r + 1);
      m2[b] += delta * (d - mean[b]);
    }
  }

  FiniteResidualReport rep;
  rep.t = t;
  rep.bins = bins;
  rep.residual_mean = mean;
  rep.residual_se.resize(bins);
  rep.zscores.resize(bins);
  for (int b = 0; b < bins; ++b) {
    double se = std::sqrt(m2[b] / (R - 1) / R);
    rep.residual_se[b] = se;
    // Extinct/empty bins: zero discrepancy and zero spread reads as z = 0.
    rep.zscores[b] = se > 0 ? mean[b] / se : 0.0;
    rep.max_abs_z = std::max(rep.max_abs_z, std::abs(rep.zscores[b]));
  }
  return rep;
}

}  // namespace abps
