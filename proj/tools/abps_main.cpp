// Command-line front end: simulation studies that compare the particle system
// against its scaling limits and write CSV + manifest artifacts.
//
// Exit codes: 0 all checks passed, 1 at least one statistical check failed,
// 2 usage or configuration error.

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "abps/ensemble.hpp"
#include "abps/hierarchy.hpp"
#include "abps/io.hpp"
#include "abps/pde.hpp"
#include "abps/stats.hpp"

using namespace abps;

namespace {

constexpr double kPi = 3.141592653589793238462643;

struct Manifest {
  std::vector<std::pair<std::string, std::string>> entries;

  void add(const std::string& key, const std::string& value) { entries.emplace_back(key, value); }
  void add(const std::string& key, double value) { add(key, CsvWriter::format(value)); }
  void add(const std::string& key, int64_t value) { add(key, std::to_string(value)); }

  void write(const std::filesystem::path& dir, const std::string& study, bool pass) {
    auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char stamp[64];
    std::strftime(stamp, sizeof(stamp), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    std::ofstream out(dir / "manifest.txt");
    out << "study=" << study << "\n" << "generated_at=" << stamp << "\n";
    for (const auto& [k, v] : entries) out << k << "=" << v << "\n";
    out << "pass=" << (pass ? 1 : 0) << "\n";
  }
};

std::vector<int> parse_ladder(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(std::stoi(item));
  if (out.empty()) throw CLI::ValidationError("--n-ladder", "empty ladder");
  return out;
}

// Options shared by the simulation studies; flags override the config file.
struct CommonOpts {
  std::string out_dir = "out";
  std::string config_path;
  std::string ladder = "100,400,1600";
  std::string u0_spec;
  int N = 0;
  int replicas = 0;
  int bins = 20;
  int threads = 0;
  double T = 0;
  double dt = 0;
  double z_threshold = 4.0;
  uint64_t seed = 0;
  bool dense_paths = false;

  CLI::App* cmd = nullptr;

  void attach(CLI::App* sub, bool with_ladder) {
    cmd = sub;
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--config", config_path, "key=value config file");
    if (with_ladder) sub->add_option("--n-ladder", ladder, "comma-separated N values");
    sub->add_option("--N", N, "particle-number scale");
    sub->add_option("--replicas", replicas, "Monte Carlo replicas");
    sub->add_option("--bins", bins, "histogram bins");
    sub->add_option("--threads", threads, "worker threads (0 = all)");
    sub->add_option("--T", T, "time horizon");
    sub->add_option("--dt", dt, "time step (0 = resolution-matched default)");
    sub->add_option("--z-threshold", z_threshold, "|z| acceptance threshold");
    sub->add_option("--seed", seed, "base RNG seed");
    sub->add_option("--u0", u0_spec, "initial profile: uniform:c | cosine:base,amp | linear:a,b");
    sub->add_flag("--dense-paths", dense_paths, "also write per-replica path CSVs");
  }

  SimConfig make_config(int default_N, double default_T) const {
    SimConfig cfg;
    if (!config_path.empty()) cfg = read_config(config_path);
    cfg.N = cmd->count("--N") ? N : (cfg.N == 100 && default_N ? default_N : cfg.N);
    if (cmd->count("--T")) cfg.T = T;
    else if (default_T > 0 && cfg.T == 1.0) cfg.T = default_T;
    if (cmd->count("--dt")) cfg.dt = dt;
    if (cmd->count("--seed")) cfg.seed = seed;
    if (cmd->count("--u0")) cfg.u0 = parse_u0(u0_spec, cfg.u0.resolution);
    return cfg;
  }

  std::filesystem::path ensure_out() const {
    std::filesystem::path dir(out_dir);
    std::filesystem::create_directories(dir);
    return dir;
  }
};

bool is_uniform(const GridFunction& u0, double& level) {
  level = u0.values.front();
  for (double v : u0.values)
    if (v != level) return false;
  return true;
}

// --------------------------------------------------------------------------
// kernel-check

int cmd_kernel_check(const CommonOpts& opts) {
  auto dir = opts.ensure_out();
  CsvWriter csv((dir / "kernel_check.csv").string(),
                {"check", "t", "x", "value", "bound"});
  Manifest man;
  bool pass = true;
  auto record = [&](const std::string& name, double t, double x, double value, double bound) {
    csv.row(name, {t, x, value, bound});
    if (!(value <= bound)) pass = false;
  };

  const int res = 2001;
  auto wts = trapezoid_weights(res);
  for (double t : {1e-4, 1e-2, 0.1, 1.0}) {
    for (double x : {0.0, 0.25, 0.7, 1.0}) {
      double mass = 0;
      for (int j = 0; j < res; ++j)
        mass += wts[j] * eval_kernel(t, x, static_cast<double>(j) / (res - 1));
      record("conservation", t, x, std::abs(mass - 1.0), 1e-8);
      record("symmetry", t, x, std::abs(eval_kernel(t, x, 0.37) - eval_kernel(t, 0.37, x)),
             1e-12);
    }
    // crossover consistency between evaluation methods
    double worst = 0;
    for (double x = 0; x <= 1.0; x += 0.1)
      worst = std::max(worst, std::abs(eval_kernel_images(std::max(t, 5e-3), x, 0.6, 8) -
                                       eval_kernel_spectral(std::max(t, 5e-3), x, 0.6, 400)));
    record("method_agreement", std::max(t, 5e-3), -1, worst, 1e-8);
  }
  // semigroup property on the quadrature grid
  for (auto [s, t] : {std::pair{0.02, 0.05}, std::pair{0.1, 0.1}}) {
    double worst = 0;
    for (double x : {0.0, 0.33, 1.0}) {
      double conv = 0;
      for (int j = 0; j < res; ++j) {
        double z = static_cast<double>(j) / (res - 1);
        conv += wts[j] * eval_kernel(s, x, z) * eval_kernel(t, z, 0.5);
      }
      worst = std::max(worst, std::abs(conv - eval_kernel(s + t, x, 0.5)));
    }
    record("chapman_kolmogorov", s + t, -1, worst, 1e-6);
  }
  man.write(dir, "kernel-check", pass);
  std::printf("kernel-check: %s\n", pass ? "pass" : "FAIL");
  return pass ? 0 : 1;
}

// --------------------------------------------------------------------------
// pde

int cmd_pde(const CommonOpts& opts) {
  auto dir = opts.ensure_out();
  SimConfig cfg = opts.make_config(0, 1.0);
  double dt = opts.cmd->count("--dt") && opts.dt > 0 ? opts.dt : 1e-3;
  auto sol = solve_mild(cfg.u0, cfg.T, dt);

  CsvWriter csv((dir / "pde.csv").string(), {"t", "x", "u"});
  int stride = std::max<int>(1, static_cast<int>(sol.times.size() / 10));
  for (size_t i = 0; i < sol.times.size(); i += stride)
    for (int j = 0; j < sol.resolution; ++j)
      csv.row({sol.times[i], sol.slices[i].node(j), sol.slices[i].values[j]});

  Manifest man;
  man.add("T", cfg.T);
  man.add("dt", dt);
  bool pass = true;
  double level = 0;
  if (is_uniform(cfg.u0, level) && level > 0) {
    double target = level / (1.0 + level * cfg.T);
    double worst = 0;
    for (double v : sol.slices.back().values) worst = std::max(worst, std::abs(v - target));
    man.add("uniform_closed_form_error", worst);
    pass = worst <= 1e-4;
  }
  man.add("final_mass", sol.slices.back().integral());
  man.write(dir, "pde", pass);
  std::printf("pde: %s\n", pass ? "pass" : "FAIL");
  return pass ? 0 : 1;
}

// --------------------------------------------------------------------------
// simulate

int cmd_simulate(const CommonOpts& opts) {
  auto dir = opts.ensure_out();
  SimConfig cfg = opts.make_config(100, 1.0);
  if (cfg.record_times.empty()) cfg.record_times = {0.0, cfg.T / 2, cfg.T};
  int replicas = opts.replicas > 0 ? opts.replicas : 1;
  auto ens = run_ensemble(cfg, replicas, opts.threads);

  char name[64];
  std::snprintf(name, sizeof(name), "simulate_%d.csv", cfg.N);
  CsvWriter csv((dir / name).string(), {"replica", "t", "particle_index", "x"});
  for (int r = 0; r < ens.replica_count(); ++r)
    for (const auto& snap : ens.replicas[r])
      for (int i = 0; i < snap.alive(); ++i)
        csv.row({static_cast<double>(r), snap.time, static_cast<double>(i), snap.positions[i]});

  Manifest man;
  man.add("N", static_cast<int64_t>(cfg.N));
  man.add("replicas", static_cast<int64_t>(replicas));
  man.add("seed", static_cast<int64_t>(cfg.seed));
  double mean_final = 0;
  for (const auto& rep : ens.replicas) mean_final += rep.back().alive();
  man.add("mean_final_count", mean_final / replicas);
  man.write(dir, "simulate", true);
  return 0;
}

// --------------------------------------------------------------------------
// lln

int cmd_lln(const CommonOpts& opts) {
  auto dir = opts.ensure_out();
  auto ladder = parse_ladder(opts.ladder);
  int replicas = opts.replicas > 0 ? opts.replicas : 200;
  SimConfig base = opts.make_config(0, 1.0);
  auto limit = solve_mild(base.u0, base.T, 1e-3);
  const GridFunction target = limit.slices.back();

  Manifest man;
  bool pass = true;
  double prev_l1 = -1;
  std::vector<double> l1s;
  for (int N : ladder) {
    SimConfig cfg = base;
    cfg.N = N;
    cfg.record_times = {0.0, cfg.T};
    auto ens = run_ensemble(cfg, replicas, opts.threads);
    auto est = estimate_correlation(ens, 1, cfg.T, opts.bins);

    char name[64];
    std::snprintf(name, sizeof(name), "lln_%d.csv", N);
    CsvWriter csv((dir / name).string(), {"bin", "x", "value", "stderr", "target", "z"});
    double l1 = 0;
    int bad = 0;
    for (int b = 0; b < opts.bins; ++b) {
      double x = (b + 0.5) / opts.bins;
      double tgt = target.interpolate(x);
      double z = est.standard_errors[b] > 0 ? (est.values[b] - tgt) / est.standard_errors[b] : 0;
      csv.row({static_cast<double>(b), x, est.values[b], est.standard_errors[b], tgt, z});
      l1 += std::abs(est.values[b] - tgt) / opts.bins;
      // allow the O(1/N) finite-size bias on top of the Monte Carlo band
      if (std::abs(est.values[b] - tgt) > opts.z_threshold * est.standard_errors[b] + 10.0 / N)
        ++bad;
    }
    l1s.push_back(l1);
    char key[32];
    std::snprintf(key, sizeof(key), "l1_%d", N);
    man.add(key, l1);
    if (bad > 0 && N == ladder.back()) pass = false;
    if (prev_l1 >= 0 && l1 >= prev_l1) pass = false;
    prev_l1 = l1;
  }
  man.write(dir, "lln", pass);
  std::printf("lln: %s (l1:", pass ? "pass" : "FAIL");
  for (double v : l1s) std::printf(" %.4g", v);
  std::printf(")\n");
  return pass ? 0 : 1;
}

// --------------------------------------------------------------------------
// poc (propagation of chaos)

int cmd_poc(const CommonOpts& opts) {
  auto dir = opts.ensure_out();
  auto ladder = parse_ladder(opts.ladder);
  int replicas = opts.replicas > 0 ? opts.replicas : 200;
  int bins = std::min(opts.bins, 20);
  SimConfig base = opts.make_config(0, 1.0);
  auto limit = solve_mild(base.u0, base.T, 1e-3);
  const GridFunction u = limit.slices.back();

  Manifest man;
  bool pass = true;
  double prev_sup = -1;
  for (int N : ladder) {
    SimConfig cfg = base;
    cfg.N = N;
    cfg.record_times = {0.0, cfg.T};
    auto ens = run_ensemble(cfg, replicas, opts.threads);
    auto est = estimate_correlation(ens, 2, cfg.T, bins);

    char name[64];
    std::snprintf(name, sizeof(name), "poc_%d.csv", N);
    CsvWriter csv((dir / name).string(),
                  {"bin_i", "bin_j", "value", "stderr", "target", "z"});
    double sup = 0;
    int within = 0, cells = bins * bins;
    for (int b = 0; b < bins; ++b)
      for (int c = 0; c < bins; ++c) {
        double tgt = u.interpolate((b + 0.5) / bins) * u.interpolate((c + 0.5) / bins);
        double se = est.standard_errors[b * bins + c];
        double dev = est.at(b, c) - tgt;
        double z = se > 0 ? dev / se : 0;
        csv.row({static_cast<double>(b), static_cast<double>(c), est.at(b, c), se, tgt, z});
        sup = std::max(sup, std::abs(dev));
        if (std::abs(z) <= opts.z_threshold) ++within;
      }
    char key[32];
    std::snprintf(key, sizeof(key), "sup_%d", N);
    man.add(key, sup);
    std::snprintf(key, sizeof(key), "within_frac_%d", N);
    double frac = static_cast<double>(within) / cells;
    man.add(key, frac);
    if (N == ladder.back() && frac < 0.99) pass = false;
    if (prev_sup >= 0 && sup >= prev_sup) pass = false;
    prev_sup = sup;
  }
  man.write(dir, "poc", pass);
  std::printf("poc: %s\n", pass ? "pass" : "FAIL");
  return pass ? 0 : 1;
}

// --------------------------------------------------------------------------
// fluct

int cmd_fluct(const CommonOpts& opts) {
  auto dir = opts.ensure_out();
  SimConfig cfg = opts.make_config(400, 1.0);
  int replicas = opts.replicas > 0 ? opts.replicas : 2000;
  cfg.record_times = {0.0, cfg.T / 2, cfg.T};
  auto ens = run_ensemble(cfg, replicas, opts.threads);

  auto limit = solve_mild(cfg.u0, cfg.T, 1e-3);
  auto cov = solve_fluctuation_covariance(limit, 16, 1e-3);

  std::vector<GridFunction> phis = {
      GridFunction::constant(1.0, 201),
      GridFunction::sample(201, [](double x) { return std::sqrt(2.0) * std::cos(kPi * x); }),
      GridFunction::sample(201, [](double x) { return std::sqrt(2.0) * std::cos(2 * kPi * x); })};

  char name[64];
  std::snprintf(name, sizeof(name), "fluct_%d.csv", cfg.N);
  CsvWriter csv((dir / name).string(), {"phi", "t", "variance", "stderr", "target", "z"});
  Manifest man;
  man.add("N", static_cast<int64_t>(cfg.N));
  man.add("replicas", static_cast<int64_t>(replicas));
  bool pass = true;
  for (double t : {cfg.T / 2, cfg.T}) {
    size_t ci = 0;
    while (ci < cov.size() && cov[ci].time < t - 1e-9) ++ci;
    for (size_t p = 0; p < phis.size(); ++p) {
      auto est = fluctuation_variance(ens, phis[p], t);
      double tgt = fluctuation_variance_of(cov[ci], phis[p]);
      double z = est.standard_error > 0 ? (est.variance - tgt) / est.standard_error : 0;
      csv.row({static_cast<double>(p), t, est.variance, est.standard_error, tgt, z});
      if (std::abs(z) > opts.z_threshold) pass = false;
    }
  }
  man.write(dir, "fluct", pass);
  std::printf("fluct: %s\n", pass ? "pass" : "FAIL");
  return pass ? 0 : 1;
}

// --------------------------------------------------------------------------
// martingale

int cmd_martingale(const CommonOpts& opts) {
  auto dir = opts.ensure_out();
  SimConfig cfg = opts.make_config(200, 0.5);
  int replicas = opts.replicas > 0 ? opts.replicas : 500;
  if (cfg.record_times.empty()) cfg.record_times = {cfg.T / 2, cfg.T};

  std::vector<GridFunction> phis = {
      GridFunction::constant(1.0, 201),
      GridFunction::sample(201, [](double x) { return std::cos(kPi * x); })};
  auto paths = run_martingale_paths(cfg, phis, replicas, opts.threads);

  char name[64];
  std::snprintf(name, sizeof(name), "martingale_%d.csv", cfg.N);
  CsvWriter csv((dir / name).string(),
                {"phi", "t", "mean_M", "var_M", "qv_mean", "z_mean", "z_var"});
  Manifest man;
  man.add("N", static_cast<int64_t>(cfg.N));
  man.add("replicas", static_cast<int64_t>(replicas));
  bool pass = true;
  for (size_t p = 0; p < phis.size(); ++p)
    for (double t : cfg.record_times) {
      auto rep = martingale_check(paths, static_cast<int>(p), t);
      csv.row({static_cast<double>(p), t, rep.mean_M, rep.var_M, rep.qv_mean, rep.z_mean,
               rep.z_var});
      if (std::abs(rep.z_mean) > opts.z_threshold || std::abs(rep.z_var) > opts.z_threshold)
        pass = false;
    }
  if (opts.dense_paths) {
    std::snprintf(name, sizeof(name), "martingale_paths_%d.csv", cfg.N);
    CsvWriter pcsv((dir / name).string(), {"phi", "replica", "t", "M", "QV"});
    for (size_t p = 0; p < phis.size(); ++p)
      for (size_t r = 0; r < paths.M[p].size(); ++r)
        for (size_t k = 0; k < paths.record_times.size(); ++k)
          pcsv.row({static_cast<double>(p), static_cast<double>(r), paths.record_times[k],
                    paths.M[p][r][k], paths.QV[p][r][k]});
  }
  man.write(dir, "martingale", pass);
  std::printf("martingale: %s\n", pass ? "pass" : "FAIL");
  return pass ? 0 : 1;
}

// --------------------------------------------------------------------------
// hierarchy

int cmd_hierarchy(const CommonOpts& opts) {
  auto dir = opts.ensure_out();
  SimConfig cfg = opts.make_config(200, 0.5);
  int replicas = opts.replicas > 0 ? opts.replicas : 300;
  int bins = std::min(opts.bins, 20);

  auto limit = solve_mild(cfg.u0, cfg.T, 1e-3);
  auto r1 = limiting_residual(limit, 1, cfg.T, {.time_quad_dt = 0.005});
  auto r2 = limiting_residual(limit, 2, cfg.T, {.time_quad_dt = 0.01});

  // quadrature record times for the finite-system check
  std::vector<double> quad;
  int nq = 6;
  for (int j = 0; j <= nq; ++j) quad.push_back(cfg.T * j / nq);
  cfg.record_times = quad;
  auto ens = run_ensemble(cfg, replicas, opts.threads);
  auto fin = finite_residual(ens, cfg.T, bins, quad);

  char name[64];
  std::snprintf(name, sizeof(name), "hierarchy_%d.csv", cfg.N);
  CsvWriter csv((dir / name).string(), {"quantity", "bin", "value", "stderr", "z"});
  csv.row("limiting_residual_k1", {-1, r1.sup_residual, 0, 0});
  csv.row("limiting_residual_k2", {-1, r2.sup_residual, 0, 0});
  for (int b = 0; b < bins; ++b)
    csv.row("finite_residual",
            {static_cast<double>(b), fin.residual_mean[b], fin.residual_se[b], fin.zscores[b]});

  Manifest man;
  man.add("N", static_cast<int64_t>(cfg.N));
  man.add("replicas", static_cast<int64_t>(replicas));
  man.add("limiting_residual_k1", r1.sup_residual);
  man.add("limiting_residual_k2", r2.sup_residual);
  man.add("finite_max_abs_z", fin.max_abs_z);
  bool pass = r1.sup_residual <= 2e-4 && r2.sup_residual <= 1e-3;
  int bad = 0;
  for (int b = 0; b < bins; ++b)
    if (std::abs(fin.residual_mean[b]) > opts.z_threshold * fin.residual_se[b] + 0.02) ++bad;
  if (bad > 0) pass = false;
  man.write(dir, "hierarchy", pass);
  std::printf("hierarchy: %s\n", pass ? "pass" : "FAIL");
  return pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"annihilating Brownian particle system: simulation and limit checks"};
  app.require_subcommand(1);

  std::map<std::string, CommonOpts> opts;
  struct Sub {
    const char* name;
    const char* help;
    bool ladder;
    int (*fn)(const CommonOpts&);
  };
  const Sub subs[] = {
      {"kernel-check", "verify the reflecting heat kernel", false, cmd_kernel_check},
      {"pde", "solve the limiting reaction-diffusion equation", false, cmd_pde},
      {"simulate", "run the particle system and dump snapshots", false, cmd_simulate},
      {"lln", "density histogram against the limit profile over an N-ladder", true, cmd_lln},
      {"poc", "pair correlations against the product profile over an N-ladder", true, cmd_poc},
      {"fluct", "fluctuation variance against the covariance equation", false, cmd_fluct},
      {"martingale", "drift compensation and quadratic variation checks", false, cmd_martingale},
      {"hierarchy", "correlation-hierarchy residuals, limiting and finite-N", false,
       cmd_hierarchy},
  };
  for (const auto& s : subs) opts[s.name].attach(app.add_subcommand(s.name, s.help), s.ladder);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    for (const auto& s : subs)
      if (app.got_subcommand(s.name)) return s.fn(opts[s.name]);
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::domain_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 2;
}
