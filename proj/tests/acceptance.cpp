// Acceptance gate: one check per line, pinned tolerances, nonzero exit on any
// failure. Every random quantity uses a fixed seed, so the run is reproducible.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "abps/ensemble.hpp"
#include "abps/hierarchy.hpp"
#include "abps/io.hpp"
#include "abps/pde.hpp"
#include "abps/stats.hpp"
#include "picard_oracle.hpp"

using namespace abps;
using clock_type = std::chrono::steady_clock;

namespace {

int failures = 0;

void report(int criterion, bool pass, const std::string& detail) {
  std::printf("[%s] criterion %2d: %s\n", pass ? "PASS" : "FAIL", criterion, detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

double seconds_since(clock_type::time_point t0) {
  return std::chrono::duration<double>(clock_type::now() - t0).count();
}

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof(buf), f, ap);
  va_end(ap);
  return buf;
}

double sup_diff(const GridFunction& a, const GridFunction& b) {
  double m = 0;
  for (size_t i = 0; i < a.values.size(); ++i)
    m = std::max(m, std::abs(a.values[i] - b.values[i]));
  return m;
}

GridFunction cosine_profile(int res) {
  return GridFunction::sample(res, [](double x) { return 1.0 + 0.5 * std::cos(M_PI * x); });
}

// ---------------------------------------------------------------------------

void criterion_1_kernel() {
  auto t0 = clock_type::now();
  double worst_sym = 0, worst_mass = 0, worst_agree = 0, worst_ck = 0;

  for (double t : {0.001, 0.02, 0.1, 0.7, 3.0})
    for (double x = 0.0; x <= 1.0; x += 0.2)
      for (double y = 0.0; y <= 1.0; y += 0.2)
        worst_sym = std::max(worst_sym, std::abs(eval_kernel(t, x, y) - eval_kernel(t, y, x)));

  const int res = 2001;
  auto w = trapezoid_weights(res);
  for (double t : {1e-4, 1e-2, 0.1, 1.0})
    for (double x : {0.0, 0.25, 0.7, 1.0}) {
      double mass = 0;
      for (int j = 0; j < res; ++j)
        mass += w[j] * eval_kernel(t, x, static_cast<double>(j) / (res - 1));
      worst_mass = std::max(worst_mass, std::abs(mass - 1.0));
    }

  for (int it = 0; it < 5; ++it) {  // 5 t-values x 25 (x,y) samples
    double t = 0.01 + it * (1.0 - 0.01) / 4;
    for (int a = 0; a < 5; ++a)
      for (int b = 0; b < 5; ++b) {
        double x = a / 4.0, y = b / 4.0;
        worst_agree = std::max(worst_agree, std::abs(eval_kernel_images(t, x, y, 8) -
                                                     eval_kernel_spectral(t, x, y, 400)));
      }
  }

  for (auto [s, t, x, y] : {std::array<double, 4>{0.01, 0.04, 0.3, 0.8},
                            std::array<double, 4>{0.05, 0.05, 0.0, 0.5},
                            std::array<double, 4>{0.2, 0.3, 0.9, 0.95}}) {
    double conv = 0;
    for (int j = 0; j < res; ++j) {
      double z = static_cast<double>(j) / (res - 1);
      conv += w[j] * eval_kernel(s, x, z) * eval_kernel(t, z, y);
    }
    worst_ck = std::max(worst_ck, std::abs(conv - eval_kernel(s + t, x, y)));
  }

  double secs = seconds_since(t0);
  bool pass = worst_sym <= 1e-12 && worst_mass <= 1e-8 && worst_agree <= 1e-8 &&
              worst_ck <= 1e-6 && secs < 5.0;
  report(1, pass,
         fmt("kernel: sym %.1e (<=1e-12), mass %.1e (<=1e-8), methods %.1e (<=1e-8), "
             "semigroup %.1e (<=1e-6), %.1f s (<5)",
             worst_sym, worst_mass, worst_agree, worst_ck, secs));
}

void criterion_2_pde() {
  auto flat = solve_mild(GridFunction::constant(1.0, 401), 1.0, 1e-3);
  double worst = 0;
  for (double v : flat.slices.back().values) worst = std::max(worst, std::abs(v - 0.5));

  // Splitting order by self-convergence on a non-flat profile: with flat data
  // the split flow is exact in time, so the order is measured on cosine data.
  auto u0 = cosine_profile(201);
  auto ref = solve_mild(u0, 0.5, 0.5 / 512).slices.back();
  double e1 = sup_diff(solve_mild(u0, 0.5, 0.5 / 64).slices.back(), ref);
  double e2 = sup_diff(solve_mild(u0, 0.5, 0.5 / 128).slices.back(), ref);
  double order = std::log2(e1 / e2);

  auto picard = testing::picard_mild_solution(cosine_profile(101), 1.0, 1.0 / 250);
  double pic = sup_diff(solve_mild(cosine_profile(101), 1.0, 1e-3).slices.back(), picard);

  bool pass = worst <= 1e-5 && order >= 1.7 && pic <= 1e-4;
  report(2, pass,
         fmt("pde: flat-data error %.2e (<=1e-5), splitting order %.2f (>=1.7), "
             "Picard gap %.2e (<=1e-4)",
             worst, order, pic));
}

struct LadderData {
  std::vector<int> Ns{100, 400, 1600};
  std::vector<ReplicaEnsemble> ens;
  GridFunction u1;  // limit profile at t = 1

  LadderData() : u1(solve_mild(GridFunction::constant(1.0, 401), 1.0, 1e-3).slices.back()) {
    for (int N : Ns) {
      SimConfig cfg;
      cfg.N = N;
      cfg.T = 1.0;
      cfg.record_times = {0.0, 1.0};
      cfg.seed = 303;
      ens.push_back(run_ensemble(cfg, 200, 0));
    }
  }
};

void criterion_3_lln(const LadderData& lad) {
  std::vector<double> l1s;
  double worst_ratio = 0;  // |dev| / (3 SE) over the N = 1600 bins
  for (size_t k = 0; k < lad.Ns.size(); ++k) {
    auto est = estimate_correlation(lad.ens[k], 1, 1.0, 20);
    double l1 = 0;
    for (int b = 0; b < 20; ++b) {
      double tgt = lad.u1.interpolate((b + 0.5) / 20.0);
      l1 += std::abs(est.values[b] - tgt) / 20.0;
      if (lad.Ns[k] == 1600)
        worst_ratio =
            std::max(worst_ratio, std::abs(est.values[b] - tgt) / (3 * est.standard_errors[b]));
    }
    l1s.push_back(l1);
  }
  bool decreasing = l1s[0] > l1s[1] && l1s[1] > l1s[2];

  // replica mean of the survivor fraction at the largest N
  const auto& big = lad.ens.back();
  int R = big.replica_count();
  std::vector<double> frac(R);
  for (int r = 0; r < R; ++r) frac[r] = big.replicas[r].back().alive() / 1600.0;
  double mean = 0;
  for (double v : frac) mean += v / R;
  double var = 0;
  for (double v : frac) var += (v - mean) * (v - mean) / (R - 1);
  double z_mass = (mean - 0.5) / std::sqrt(var / R);

  bool pass = decreasing && worst_ratio <= 1.0 && std::abs(z_mass) <= 3.0;
  report(3, pass,
         fmt("lln: L1 %.4f > %.4f > %.4f (decreasing=%d), worst bin dev %.2fx3SE (<=1), "
             "mass z %.2f (<=3)",
             l1s[0], l1s[1], l1s[2], decreasing, worst_ratio, z_mass));
}

void criterion_4_poc(const LadderData& lad) {
  std::vector<double> sups;
  double worst_frac = 1.0;
  for (size_t k = 0; k < lad.Ns.size(); ++k) {
    auto est = estimate_correlation(lad.ens[k], 2, 1.0, 20);
    double sup = 0;
    int within = 0;
    for (int b = 0; b < 20; ++b)
      for (int c = 0; c < 20; ++c) {
        double tgt =
            lad.u1.interpolate((b + 0.5) / 20.0) * lad.u1.interpolate((c + 0.5) / 20.0);
        double dev = est.at(b, c) - tgt;
        sup = std::max(sup, std::abs(dev));
        if (std::abs(dev) <= 4 * est.standard_errors[b * 20 + c]) ++within;
      }
    sups.push_back(sup);
    worst_frac = std::min(worst_frac, within / 400.0);
  }
  bool pass = worst_frac >= 0.99 && sups[0] > sups[1] && sups[1] > sups[2];
  report(4, pass,
         fmt("poc: within-4SE fraction %.3f (>=0.99), sup %.4f > %.4f > %.4f", worst_frac,
             sups[0], sups[1], sups[2]));
}

ReplicaEnsemble make_ensemble_B() {
  SimConfig cfg;
  cfg.N = 400;
  cfg.T = 1.0;
  cfg.record_times = {0.0, 0.05, 0.1, 0.15, 0.2, 0.25, 0.5, 1.0};
  cfg.seed = 404;
  return run_ensemble(cfg, 500, 0);
}

void criterion_5_moment(const ReplicaEnsemble& ensB) {
  auto one = GridFunction::constant(1.0, 201);
  auto cosx = GridFunction::sample(201, [](double x) { return std::cos(M_PI * x); });
  double worst = 0;
  for (const auto* phi : {&one, &cosx})
    for (double t : {0.25, 0.5, 1.0}) {
      auto rep = moment_identity_check(ensB, *phi, t, 20);
      worst = std::max(worst, std::abs(rep.zscore));
    }
  report(5, worst <= 3.0, fmt("moment identity: worst |z| %.2f (<=3, 6 checks)", worst));
}

void criterion_6_fluct() {
  SimConfig cfg;
  cfg.N = 400;
  cfg.T = 1.0;
  cfg.record_times = {1.0};
  cfg.seed = 606;
  auto ens = run_ensemble(cfg, 2000, 0);

  auto u = solve_mild(GridFunction::constant(1.0, 201), 1.0, 1e-3);
  auto cov = solve_fluctuation_covariance(u, 8, 1e-3);
  auto one = GridFunction::constant(1.0, 201);
  double ode_value = fluctuation_variance_of(cov.back(), one);
  // Closed form for the mass mode: w' = -4uw + 2u^2, w(1) = 7/24. (The factor
  // 2 reflects that each reaction removes two particles; see the ledger note
  // on the printed covariance formula.)
  double closed = 7.0 / 24.0;

  auto est = fluctuation_variance(ens, one, 1.0);
  double z = (est.variance - ode_value) / est.standard_error;
  bool pass = std::abs(z) <= 3.0 && std::abs(ode_value - closed) <= 1e-4;
  report(6, pass,
         fmt("fluctuation: N Var %.4f vs ODE %.4f, z %.2f (<=3); ODE vs closed form 7/24 "
             "gap %.1e (<=1e-4)",
             est.variance, ode_value, z, std::abs(ode_value - closed)));
}

void criterion_7_martingale() {
  SimConfig cfg;
  cfg.N = 200;
  cfg.T = 0.25;
  cfg.dt = 1e-4;
  cfg.record_times = {0.125, 0.25};
  cfg.seed = 707;
  auto one = GridFunction::constant(1.0, 201);
  auto cosx = GridFunction::sample(201, [](double x) { return std::cos(M_PI * x); });
  auto paths = run_martingale_paths(cfg, {one, cosx}, 500);
  double worst_mean = 0, worst_var = 0;
  for (int p = 0; p < 2; ++p)
    for (double t : {0.125, 0.25}) {
      auto rep = martingale_check(paths, p, t);
      worst_mean = std::max(worst_mean, std::abs(rep.z_mean));
      worst_var = std::max(worst_var, std::abs(rep.z_var));
    }
  bool pass = worst_mean <= 3.0 && worst_var <= 3.0;
  report(7, pass,
         fmt("martingale: worst mean-zero |z| %.2f, worst QV |z| %.2f (both <=3)", worst_mean,
             worst_var));
}

void criterion_8_hierarchy(const ReplicaEnsemble& ensB) {
  auto u = solve_mild(cosine_profile(201), 1.0, 1e-3);
  double r1 = limiting_residual(u, 1, 1.0, {.time_quad_dt = 0.005}).sup_residual;
  double r2 = limiting_residual(u, 2, 0.5, {.time_quad_dt = 0.01}).sup_residual;

  auto fin = finite_residual(ensB, 0.25, 10, {0.0, 0.05, 0.1, 0.15, 0.2, 0.25});
  bool pass = r1 <= 1e-3 && r2 <= 1e-3 && fin.max_abs_z <= 4.0;
  report(8, pass,
         fmt("hierarchy: limiting residual k1 %.1e, k2 %.1e (<=1e-3); finite max |z| %.2f "
             "(<=4)",
             r1, r2, fin.max_abs_z));
}

void criterion_9_smoothed() {
  // flat data makes the interaction smoothing invisible (constants are fixed
  // points of the smoother), so the comparison runs on the cosine profile
  auto u0 = cosine_profile(401);
  auto lim = solve_mild(u0, 0.5, 1e-3);
  std::vector<double> sups;
  for (int N : {100, 200, 400}) {
    auto sm = solve_smoothed(u0, 0.5, 1e-3, N);
    double sup = 0;
    for (size_t i = 0; i < sm.slices.size(); ++i)
      sup = std::max(sup, sup_diff(sm.slices[i], lim.slices[i]));
    sups.push_back(sup);
  }
  bool pass = sups[0] > sups[1] && sups[1] > sups[2];
  report(9, pass,
         fmt("smoothed equation: sup|u_N - u| %.2e > %.2e > %.2e over N in {100,200,400}",
             sups[0], sups[1], sups[2]));
}

void criterion_10_pruning() {
  // exact agreement of the two scans
  SimConfig scan_cfg;
  scan_cfg.N = 100;
  ParticleState st;
  RngStream rng(55);
  for (int i = 0; i < 500; ++i) st.positions.push_back(rng.uniform());
  auto brute = pair_rates_bruteforce(st, scan_cfg);
  auto neigh = pair_rates_neighbor(st, scan_cfg);
  auto key = [](const PairRate& p) { return p.i * 1000 + p.j; };
  std::sort(neigh.begin(), neigh.end(),
            [&](const PairRate& a, const PairRate& b) { return key(a) < key(b); });
  std::sort(brute.begin(), brute.end(),
            [&](const PairRate& a, const PairRate& b) { return key(a) < key(b); });
  double worst_rate = brute.size() == neigh.size() ? 0 : 1;
  for (size_t k = 0; worst_rate == 0 && k < brute.size(); ++k)
    worst_rate = std::max(worst_rate, std::abs(brute[k].rate - neigh[k].rate));

  // statistical agreement with and without the cutoff
  auto mean_frac = [](double cutoff, uint64_t seed) {
    SimConfig cfg;
    cfg.N = 100;
    cfg.T = 1.0;
    cfg.cutoff_radius = cutoff;
    cfg.record_times = {1.0};
    cfg.seed = seed;
    auto ens = run_ensemble(cfg, 200, 0);
    std::vector<double> f(200);
    for (int r = 0; r < 200; ++r) f[r] = ens.replicas[r].back().alive() / 100.0;
    double m = 0;
    for (double v : f) m += v / 200;
    double var = 0;
    for (double v : f) var += (v - m) * (v - m) / 199.0;
    return std::make_pair(m, var / 200);
  };
  auto [m_cut, v_cut] = mean_frac(0.0, 1111);  // default 8/N window
  auto [m_all, v_all] = mean_frac(1.0, 2222);  // every pair considered
  double z_prune = (m_cut - m_all) / std::sqrt(v_cut + v_all);

  // near-linear scan cost in the particle count
  auto scan_time = [](int m, int iters) {
    SimConfig cfg;
    cfg.N = m;
    cfg.cutoff_radius = 8.0 / m;
    ParticleState s;
    RngStream r(77, static_cast<uint64_t>(m));
    for (int i = 0; i < m; ++i) s.positions.push_back(r.uniform());
    // best-of-batches: the minimum is robust against scheduler noise
    double best = 1e30;
    for (int batch = 0; batch < 7; ++batch) {
      auto t0 = clock_type::now();
      size_t total = 0;
      for (int it = 0; it < iters; ++it) total += pair_rates_neighbor(s, cfg).size();
      static_cast<void>(total);
      best = std::min(best, seconds_since(t0) / iters);
    }
    return best;
  };
  scan_time(1000, 10);  // warm up
  double t1 = scan_time(1000, 50);
  double t2 = scan_time(10000, 5);
  double exponent = std::log10(t2 / t1);

  bool pass = worst_rate <= 1e-12 && std::abs(z_prune) <= 2.0 && exponent <= 1.2;
  report(10, pass,
         fmt("pruning: scan diff %.1e (<=1e-12), pruned-vs-full z %.2f (<=2), cost exponent "
             "%.2f (<=1.2)",
             worst_rate, z_prune, exponent));
}

void criterion_11_determinism() {
  SimConfig cfg;
  cfg.N = 80;
  cfg.T = 0.5;
  cfg.record_times = {0.0, 0.25, 0.5};
  cfg.seed = 1212;

  namespace fs = std::filesystem;
  auto dir = fs::temp_directory_path() / "abps_accept";
  fs::create_directories(dir);
  auto dump = [&](const ReplicaEnsemble& ens, const std::string& name) {
    auto path = (dir / name).string();
    CsvWriter csv(path, {"replica", "t", "particle_index", "x"});
    for (int r = 0; r < ens.replica_count(); ++r)
      for (const auto& snap : ens.replicas[r])
        for (int i = 0; i < snap.alive(); ++i)
          csv.row({static_cast<double>(r), snap.time, static_cast<double>(i),
                   snap.positions[i]});
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  auto serial = dump(run_ensemble(cfg, 32, 1), "serial.csv");
  auto parallel = dump(run_ensemble(cfg, 32, 0), "parallel.csv");
  auto repeat = dump(run_ensemble(cfg, 32, 0), "repeat.csv");
  bool pass = serial == parallel && parallel == repeat && !serial.empty();
  report(11, pass,
         fmt("determinism: serial/parallel/rerun CSV bodies byte-identical (%zu bytes)",
             serial.size()));
}

}  // namespace

int main() {
  auto t0 = clock_type::now();
  criterion_1_kernel();
  criterion_2_pde();
  {
    LadderData lad;
    criterion_3_lln(lad);
    criterion_4_poc(lad);
  }
  {
    auto ensB = make_ensemble_B();
    criterion_5_moment(ensB);
    criterion_8_hierarchy(ensB);
  }
  criterion_6_fluct();
  criterion_7_martingale();
  criterion_9_smoothed();
  criterion_10_pruning();
  criterion_11_determinism();
  std::printf("%d/11 criteria passed in %.0f s\n", 11 - failures, seconds_since(t0));
  return failures == 0 ? 0 : 1;
}
