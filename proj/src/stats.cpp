#include "abps/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace abps {

namespace {

int bin_of(double x, int bins) {
  int b = static_cast<int>(x * bins);
  return std::clamp(b, 0, bins - 1);
}

double sample_mean(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x;
  return s / v.size();
}

// Unbiased sample variance.
double sample_variance(const std::vector<double>& v, double mean) {
  if (v.size() < 2) throw std::invalid_argument("variance needs >= 2 replicas");
  double s = 0;
  for (double x : v) s += (x - mean) * (x - mean);
  return s / (v.size() - 1);
}

}  // namespace

double empirical_pairing(const ParticleState& state, const GridFunction& phi, int N) {
  if (phi.dim != 1) throw std::invalid_argument("empirical_pairing: phi must be dim-1");
  double s = 0;
  for (double x : state.positions) s += phi.interpolate(x);
  return s / N;
}

GridFunction half_laplacian(const GridFunction& phi) {
  if (phi.dim != 1) throw std::invalid_argument("half_laplacian: dim-1 only");
  const int n = phi.resolution;
  const double h2 = phi.spacing() * phi.spacing();
  GridFunction out = phi;
  out.values[0] = (phi.values[1] - phi.values[0]) / h2;  // ghost phi_{-1} = phi_1
  for (int i = 1; i < n - 1; ++i)
    out.values[i] = 0.5 * (phi.values[i - 1] - 2 * phi.values[i] + phi.values[i + 1]) / h2;
  out.values[n - 1] = (phi.values[n - 2] - phi.values[n - 1]) / h2;
  return out;
}

GridFunction gradient_squared(const GridFunction& phi) {
  if (phi.dim != 1) throw std::invalid_argument("gradient_squared: dim-1 only");
  const int n = phi.resolution;
  const double h = phi.spacing();
  GridFunction out = phi;
  out.values[0] = 0;  // Neumann
  for (int i = 1; i < n - 1; ++i) {
    double g = (phi.values[i + 1] - phi.values[i - 1]) / (2 * h);
    out.values[i] = g * g;
  }
  out.values[n - 1] = 0;
  return out;
}

std::vector<double> correlation_histogram(const ParticleState& state, int k, int bins, int N,
                                          bool falling_factorial) {
  if (k != 1 && k != 2) throw std::invalid_argument("correlation_histogram: k must be 1 or 2");
  const double w = 1.0 / bins;
  const int m = state.alive();
  if (k == 1) {
    double norm = static_cast<double>(N);
    std::vector<double> h(bins, 0.0);
    for (double x : state.positions) h[bin_of(x, bins)] += 1.0 / (norm * w);
    return h;
  }
  double norm = falling_factorial ? static_cast<double>(N) * (N - 1)
                                  : static_cast<double>(N) * N;
  std::vector<double> h(static_cast<size_t>(bins) * bins, 0.0);
  const double weight = 1.0 / (norm * w * w);
  for (int i = 0; i < m; ++i) {
    int bi = bin_of(state.positions[i], bins);
    for (int j = i + 1; j < m; ++j) {
      int bj = bin_of(state.positions[j], bins);
      h[static_cast<size_t>(bi) * bins + bj] += weight;
      h[static_cast<size_t>(bj) * bins + bi] += weight;
    }
  }
  return h;
}

CorrelationEstimate estimate_correlation(const ReplicaEnsemble& ensemble, int k, double t,
                                         int bins, bool falling_factorial) {
  if (bins < 1) throw std::invalid_argument("estimate_correlation: bins >= 1");
  const int R = ensemble.replica_count();
  if (R < 2) throw std::invalid_argument("estimate_correlation: needs >= 2 replicas");
  const int rec = ensemble.record_index(t);
  const int N = ensemble.config.N;

  size_t cells = k == 1 ? bins : static_cast<size_t>(bins) * bins;
  std::vector<double> mean(cells, 0.0), m2(cells, 0.0);
  for (int r = 0; r < R; ++r) {
    auto h = correlation_histogram(ensemble.replicas[r][rec], k, bins, N, falling_factorial);
    // Welford accumulation per cell.
    for (size_t c = 0; c < cells; ++c) {
      double d = h[c] - mean[c];
      mean[c] += d / (r + 1);
      m2[c] += d * (h[c] - mean[c]);
    }
  }
  CorrelationEstimate est;
  est.k = k;
  est.t = t;
  est.bins = bins;
  est.values = std::move(mean);
  est.standard_errors.resize(cells);
  for (size_t c = 0; c < cells; ++c)
    est.standard_errors[c] = std::sqrt(m2[c] / (R - 1) / R);
  return est;
}

MomentReport moment_identity_check(const ReplicaEnsemble& ensemble, const GridFunction& phi,
                                   double t, int bins) {
  const int R = ensemble.replica_count();
  const int rec = ensemble.record_index(t);
  const int N = ensemble.config.N;
  const double w = 1.0 / bins;

  // Cell averages of phi and phi^2 make the quadrature exact against the
  // piecewise-constant histograms; midpoint weights would leave an O(w^2)
  // bias far above the paired standard error at large N.
  std::vector<double> phi_bar(bins), phi2_bar(bins);
  for (int b = 0; b < bins; ++b) {
    const int ns = 64;  // Simpson panels per bin
    double s1 = 0, s2i = 0;
    for (int j = 0; j <= ns; ++j) {
      double x = (b + static_cast<double>(j) / ns) * w;
      double wt = (j == 0 || j == ns) ? 1.0 : (j % 2 ? 4.0 : 2.0);
      double v = phi.interpolate(x);
      s1 += wt * v;
      s2i += wt * v * v;
    }
    phi_bar[b] = s1 / (3.0 * ns);
    phi2_bar[b] = s2i / (3.0 * ns);
  }

  std::vector<double> lhs_r(R), rhs_r(R), diff(R);
  for (int r = 0; r < R; ++r) {
    const ParticleState& st = ensemble.replicas[r][rec];
    double a = empirical_pairing(st, phi, N);
    lhs_r[r] = a * a;
    auto f1 = correlation_histogram(st, 1, bins, N);
    auto f2 = correlation_histogram(st, 2, bins, N);
    double t1 = 0;
    for (int b = 0; b < bins; ++b) t1 += phi2_bar[b] * f1[b] * w;
    double t2 = 0;
    for (int b = 0; b < bins; ++b)
      for (int c = 0; c < bins; ++c)
        t2 += phi_bar[b] * phi_bar[c] * f2[static_cast<size_t>(b) * bins + c] * w * w;
    rhs_r[r] = t1 / N + (static_cast<double>(N - 1) / N) * t2;
    diff[r] = lhs_r[r] - rhs_r[r];
  }

  MomentReport rep;
  rep.lhs = sample_mean(lhs_r);
  rep.rhs = sample_mean(rhs_r);
  double dm = sample_mean(diff);
  // floor at the rounding noise of the two sides: when the identity holds
  // exactly (e.g. phi constant) the difference is pure floating-point error
  // and the raw z would be noise over noise
  double floor = 1e-12 * std::max({std::abs(rep.lhs), std::abs(rep.rhs), 1.0});
  rep.standard_error = std::max(std::sqrt(sample_variance(diff, dm) / R), floor);
  rep.zscore = dm / rep.standard_error;
  return rep;
}

VarianceEstimate fluctuation_variance(const ReplicaEnsemble& ensemble, const GridFunction& phi,
                                      double t) {
  const int R = ensemble.replica_count();
  if (R < 2) throw std::invalid_argument("fluctuation_variance: needs >= 2 replicas");
  const int rec = ensemble.record_index(t);
  const int N = ensemble.config.N;

  std::vector<double> a(R);
  for (int r = 0; r < R; ++r) a[r] = empirical_pairing(ensemble.replicas[r][rec], phi, N);
  double mean = sample_mean(a);
  double s2 = sample_variance(a, mean);
  double m4 = 0;
  for (double x : a) {
    double d = x - mean;
    m4 += d * d * d * d;
  }
  m4 /= R;
  // Var(s^2) = (m4 - s^4 (R-3)/(R-1)) / R.
  double var_s2 = std::max(0.0, (m4 - s2 * s2 * (R - 3.0) / (R - 1.0)) / R);
  return {N * s2, N * std::sqrt(var_s2)};
}

MartingalePaths run_martingale_paths(const SimConfig& config,
                                     const std::vector<GridFunction>& phis, int replicas,
                                     int threads) {
  if (config.record_times.empty())
    throw std::invalid_argument("run_martingale_paths: record_times required (dense mode)");
  const int P = static_cast<int>(phis.size());
  const int N = config.N;
  const double dt = config.resolved_dt();
  const int64_t nsteps = config.step_count();

  // The martingale is anchored at t = 0, so always capture the initial state
  // even when the caller did not ask for it.
  SimConfig cfg = config;
  const bool prepend_zero = cfg.record_times.front() > 0;
  if (prepend_zero) cfg.record_times.insert(cfg.record_times.begin(), 0.0);
  const size_t skip = prepend_zero ? 1 : 0;

  std::vector<int64_t> rec_steps;
  for (double t : cfg.record_times)
    rec_steps.push_back(std::clamp<int64_t>(std::llround(t / dt), 0, nsteps));

  std::vector<GridFunction> half_lap, grad_sq;
  for (const auto& phi : phis) {
    half_lap.push_back(half_laplacian(phi));
    grad_sq.push_back(gradient_squared(phi));
  }

  MartingalePaths out;
  out.record_times = config.record_times;
  out.M.assign(P, std::vector<std::vector<double>>(replicas));
  out.QV.assign(P, std::vector<std::vector<double>>(replicas));

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(threads > 0 ? threads : omp_get_max_threads())
#endif
  for (int r = 0; r < replicas; ++r) {
    RngStream rng(config.seed, static_cast<uint64_t>(r));
    std::vector<double> drift(P, 0.0), qv(P, 0.0);
    // Integrals at each record step; [phi][record index].
    std::vector<std::vector<double>> drift_rec(P), qv_rec(P);
    int64_t step_index = 0;
    size_t next_rec = 0;
    while (next_rec < rec_steps.size() && rec_steps[next_rec] == 0) {
      for (int p = 0; p < P; ++p) {
        drift_rec[p].push_back(0.0);
        qv_rec[p].push_back(0.0);
      }
      ++next_rec;
    }
    auto observer = [&](const ParticleState& st, const std::vector<PairRate>& pairs, double h) {
      for (int p = 0; p < P; ++p) {
        double lap_term = empirical_pairing(st, half_lap[p], N);
        double grad_term = empirical_pairing(st, grad_sq[p], N) / N;
        double pair_drift = 0, pair_qv = 0;
        if (config.annihilation) {  // otherwise the generator has no jump part
          for (const auto& pr : pairs) {
            double fi = phis[p].interpolate(st.positions[pr.i]);
            double fj = phis[p].interpolate(st.positions[pr.j]);
            pair_drift += pr.rate * (fi + fj);
            double avg = 0.5 * (fi + fj);
            pair_qv += pr.rate * avg * avg;
          }
        }
        // pr.rate is the per-unordered-pair jump intensity; a jump removes
        // (phi_i + phi_j)/N from <X,phi>, so the compensator is
        // sum rate (phi_i + phi_j)/N and the jump QV is sum rate (jump)^2.
        drift[p] += h * (lap_term - pair_drift / N);
        qv[p] += h * (grad_term + 4.0 * pair_qv / (static_cast<double>(N) * N));
      }
      ++step_index;
      while (next_rec < rec_steps.size() && rec_steps[next_rec] == step_index) {
        for (int p = 0; p < P; ++p) {
          drift_rec[p].push_back(drift[p]);
          qv_rec[p].push_back(qv[p]);
        }
        ++next_rec;
      }
    };
    auto snaps = run_dense(cfg, rng, observer);
    for (int p = 0; p < P; ++p) {
      double a0 = empirical_pairing(snaps[0], phis[p], N);
      out.M[p][r].resize(snaps.size() - skip);
      out.QV[p][r].resize(snaps.size() - skip);
      for (size_t k = skip; k < snaps.size(); ++k) {
        double ak = empirical_pairing(snaps[k], phis[p], N);
        out.M[p][r][k - skip] = ak - a0 - drift_rec[p][k];
        out.QV[p][r][k - skip] = qv_rec[p][k];
      }
    }
  }
  return out;
}

MartingaleReport martingale_check(const MartingalePaths& paths, int phi_index, double t) {
  size_t k = 0;
  while (k < paths.record_times.size() && std::abs(paths.record_times[k] - t) > 1e-12) ++k;
  if (k == paths.record_times.size())
    throw std::invalid_argument("martingale_check: t is not a record time");
  const auto& M = paths.M[phi_index];
  const auto& QV = paths.QV[phi_index];
  const int R = static_cast<int>(M.size());

  std::vector<double> m(R), q(R), paired(R);
  for (int r = 0; r < R; ++r) {
    m[r] = M[r][k];
    q[r] = QV[r][k];
    paired[r] = m[r] * m[r] - q[r];  // E[M^2] = E[<M>] for a martingale from 0
  }
  MartingaleReport rep;
  rep.mean_M = sample_mean(m);
  rep.var_M = sample_variance(m, rep.mean_M);
  rep.qv_mean = sample_mean(q);
  double se_m = std::sqrt(rep.var_M / R);
  rep.z_mean = se_m > 0 ? rep.mean_M / se_m : 0.0;
  double pm = sample_mean(paired);
  double se_p = std::sqrt(sample_variance(paired, pm) / R);
  rep.z_var = se_p > 0 ? pm / se_p : 0.0;
  return rep;
}

}  // namespace abps
