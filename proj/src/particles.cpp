#include "abps/particles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace abps {

double SimConfig::resolved_dt() const {
  if (dt > 0) return dt;
  return std::min(lambda * 2.0 / (static_cast<double>(N) * N), 1e-3);
}

double SimConfig::resolved_cutoff() const {
  if (cutoff_radius > 0) return cutoff_radius;
  return std::min(8.0 / N, 1.0);
}

int64_t SimConfig::step_count() const {
  return std::max<int64_t>(1, std::llround(T / resolved_dt()));
}

double SimConfig::pair_rate(double x, double y) const {
  if (rate_override) return rate_override->rate(x, y);
  double t = 2.0 / (static_cast<double>(N) * N);
  // For N >= 10 only the images n in {-1,0,1} contribute above 1e-16.
  int terms = N >= 10 ? 1 : kernel.image_terms;
  return eval_kernel_images(t, x, y, terms) / N;
}

double SimConfig::rate_bound() const {
  if (rate_override) return rate_override->sup_bound;
  // sup_{x,y} p(2/N^2,x,y) is attained on the diagonal at the corners.
  return pair_rate(0.0, 0.0) * (1.0 + 1e-12);
}

void SimConfig::validate() const {
  if (N < 2) throw std::invalid_argument("SimConfig: N >= 2");
  u0.validate();
  if (u0.dim != 1) throw std::invalid_argument("SimConfig: u0 must be dim-1");
  if (!(T > 0)) throw std::invalid_argument("SimConfig: T > 0");
  if (!(resolved_dt() > 0)) throw std::invalid_argument("SimConfig: dt > 0");
  double cut = resolved_cutoff();
  if (!(cut > 0) || cut > 1) throw std::invalid_argument("SimConfig: cutoff in (0,1]");
  if (!std::is_sorted(record_times.begin(), record_times.end()))
    throw std::invalid_argument("SimConfig: record_times must be sorted");
  for (double t : record_times)
    if (t < 0 || t > T + 1e-12) throw std::invalid_argument("SimConfig: record time outside [0,T]");
}

double fold_unit(double x) {
  double y = std::fmod(x, 2.0);
  if (y < 0) y += 2.0;
  return y <= 1.0 ? y : 2.0 - y;
}

ParticleState init_particles(const SimConfig& config, RngStream& rng) {
  config.validate();
  const GridFunction& u0 = config.u0;
  double mass = u0.integral();
  if (mass <= 0) throw std::domain_error("init_particles: u0 must not be identically zero");

  // Cumulative trapezoid CDF on the grid nodes.
  const int res = u0.resolution;
  const double h = u0.spacing();
  std::vector<double> cdf(res, 0.0);
  for (int i = 1; i < res; ++i)
    cdf[i] = cdf[i - 1] + 0.5 * h * (u0.values[i - 1] + u0.values[i]);
  for (double& c : cdf) c /= cdf.back();

  int m0 = static_cast<int>(std::llround(config.N * mass));
  ParticleState state;
  state.initial_count = m0;
  state.positions.resize(m0);
  for (int k = 0; k < m0; ++k) {
    double u = rng.uniform();
    auto it = std::lower_bound(cdf.begin(), cdf.end(), u);
    int i = std::max<int>(1, static_cast<int>(it - cdf.begin()));
    double span = cdf[i] - cdf[i - 1];
    double frac = span > 0 ? (u - cdf[i - 1]) / span : 0.0;
    state.positions[k] = (i - 1 + frac) * h;
  }
  return state;
}

namespace {

// Row of the lexicographic unordered-pair index c over m elements.
std::pair<int, int> decode_pair(int64_t c, int64_t m) {
  auto row_offset = [m](int64_t i) { return i * (2 * m - i - 1) / 2; };
  double disc = (2.0 * m - 1) * (2.0 * m - 1) - 8.0 * static_cast<double>(c);
  int64_t i = static_cast<int64_t>((2.0 * m - 1 - std::sqrt(std::max(disc, 0.0))) / 2.0);
  i = std::clamp<int64_t>(i, 0, m - 2);
  while (i > 0 && row_offset(i) > c) --i;
  while (i < m - 2 && row_offset(i + 1) <= c) ++i;
  int64_t j = i + 1 + (c - row_offset(i));
  return {static_cast<int>(i), static_cast<int>(j)};
}

// Resolve marked pairs in uniformly random order with a liveness check, then
// compact the survivors. Order of surviving particles is preserved.
void resolve_marks(ParticleState& state, std::vector<std::pair<int, int>>& marks,
                   RngStream& rng) {
  if (marks.empty()) return;
  for (size_t k = marks.size(); k > 1; --k)
    std::swap(marks[k - 1], marks[rng.below(k)]);
  std::vector<char> alive(state.positions.size(), 1);
  for (auto [i, j] : marks) {
    if (alive[i] && alive[j]) alive[i] = alive[j] = 0;
  }
  size_t w = 0;
  for (size_t k = 0; k < state.positions.size(); ++k)
    if (alive[k]) state.positions[w++] = state.positions[k];
  state.positions.resize(w);
  marks.clear();
}

double mark_probability(double rate, double dt) { return -std::expm1(-rate * dt); }

}  // namespace

std::vector<PairRate> pair_rates_bruteforce(const ParticleState& state, const SimConfig& config) {
  std::vector<PairRate> out;
  const double cut = config.resolved_cutoff();
  const int m = state.alive();
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j) {
      double xi = state.positions[i], xj = state.positions[j];
      if (std::abs(xi - xj) <= cut)
        out.push_back({i, j, config.pair_rate(xi, xj)});
    }
  return out;
}

std::vector<PairRate> pair_rates_neighbor(const ParticleState& state, const SimConfig& config) {
  const double cut = config.resolved_cutoff();
  const int m = state.alive();
  std::vector<int> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return state.positions[a] < state.positions[b]; });
  std::vector<PairRate> out;
  for (int a = 0; a < m; ++a) {
    double xa = state.positions[order[a]];
    for (int b = a + 1; b < m && state.positions[order[b]] - xa <= cut; ++b) {
      int i = order[a], j = order[b];
      if (i > j) std::swap(i, j);
      out.push_back({i, j, config.pair_rate(state.positions[i], state.positions[j])});
    }
  }
  return out;
}

void step(ParticleState& state, const SimConfig& config, RngStream& rng) {
  const double dt = config.resolved_dt();
  const double sq = std::sqrt(dt);
  for (double& x : state.positions) x = fold_unit(x + sq * rng.normal());
  state.time += dt;
  if (!config.annihilation || state.alive() < 2) return;

  auto pairs = pair_rates_neighbor(state, config);
  std::vector<std::pair<int, int>> marks;
  for (const auto& p : pairs)
    if (rng.uniform() < mark_probability(p.rate, dt)) marks.emplace_back(p.i, p.j);
  resolve_marks(state, marks, rng);
}

namespace {

// Event-skipping trajectory engine. Annihilation candidacies are i.i.d.
// Bernoulli trials with the uniform bound p_hat over the flattened
// (step, pair) space; a geometric skip selects the next candidate, whose true
// marking probability is then applied by thinning. Particle positions advance
// lazily since Gaussian increments compose across steps.
class LazyEngine {
 public:
  LazyEngine(const SimConfig& cfg, RngStream& rng) : cfg_(cfg), rng_(rng) {
    dt_ = cfg.resolved_dt();
    nsteps_ = cfg.step_count();
    cutoff_ = cfg.resolved_cutoff();
    p_hat_ = cfg.annihilation ? mark_probability(cfg.rate_bound(), dt_) : 0.0;
    log_q_ = std::log1p(-std::min(p_hat_, 1.0 - 1e-16));
    ParticleState init = init_particles(cfg, rng_);
    initial_count_ = init.initial_count;
    pos_ = std::move(init.positions);
    synced_.assign(pos_.size(), -1);  // post-diffusion step each particle is at
  }

  std::vector<ParticleState> take_snapshots() {
    std::vector<int64_t> rec_steps;
    for (double t : cfg_.record_times)
      rec_steps.push_back(std::clamp<int64_t>(std::llround(t / dt_), 0, nsteps_));

    size_t rec = 0;
    auto emit_upto = [&](int64_t s) {
      while (rec < rec_steps.size() && rec_steps[rec] <= s) {
        sync_all(rec_steps[rec] - 1);
        ParticleState snap;
        snap.positions = pos_;
        snap.time = cfg_.record_times[rec];
        snap.initial_count = initial_count_;
        snapshots_.push_back(std::move(snap));
        ++rec;
      }
    };

    int64_t s = 0, c = 0;
    std::vector<std::pair<int, int>> marks;
    emit_upto(0);
    while (s < nsteps_ && alive() >= 2 && p_hat_ > 0) {
      int64_t pairs = static_cast<int64_t>(alive()) * (alive() - 1) / 2;
      int64_t skip = draw_skip();
      bool hit = true;
      while (skip >= pairs - c) {
        skip -= pairs - c;
        resolve_marks_at_step_end(marks);
        ++s;
        c = 0;
        emit_upto(s);
        if (s >= nsteps_ || alive() < 2) {
          hit = false;
          break;
        }
        pairs = static_cast<int64_t>(alive()) * (alive() - 1) / 2;
      }
      if (!hit) continue;
      c += skip;
      auto [i, j] = decode_pair(c, alive());
      ++c;
      sync(i, s);
      sync(j, s);
      double r = 0;
      if (std::abs(pos_[i] - pos_[j]) <= cutoff_) r = cfg_.pair_rate(pos_[i], pos_[j]);
      if (rng_.uniform() * p_hat_ < mark_probability(r, dt_)) marks.emplace_back(i, j);
    }
    // Tail: no interactions remain; only diffusion up to the last records.
    resolve_marks_at_step_end(marks);
    emit_upto(nsteps_);
    return std::move(snapshots_);
  }

 private:
  int alive() const { return static_cast<int>(pos_.size()); }

  int64_t draw_skip() {
    double u = std::log(rng_.uniform()) / log_q_;
    if (u >= 9.0e18) return std::numeric_limits<int64_t>::max();
    return static_cast<int64_t>(u);
  }

  void sync(int k, int64_t s) {
    int64_t d = s - synced_[k];
    if (d > 0) {
      pos_[k] = fold_unit(pos_[k] + std::sqrt(d * dt_) * rng_.normal());
      synced_[k] = s;
    }
  }

  void sync_all(int64_t s) {
    for (int k = 0; k < alive(); ++k) sync(k, s);
  }

  void resolve_marks_at_step_end(std::vector<std::pair<int, int>>& marks) {
    if (marks.empty()) return;
    for (size_t k = marks.size(); k > 1; --k)
      std::swap(marks[k - 1], marks[rng_.below(k)]);
    std::vector<char> alive_flag(pos_.size(), 1);
    for (auto [i, j] : marks)
      if (alive_flag[i] && alive_flag[j]) alive_flag[i] = alive_flag[j] = 0;
    size_t w = 0;
    for (size_t k = 0; k < pos_.size(); ++k)
      if (alive_flag[k]) {
        pos_[w] = pos_[k];
        synced_[w] = synced_[k];
        ++w;
      }
    pos_.resize(w);
    synced_.resize(w);
    marks.clear();
  }

  const SimConfig& cfg_;
  RngStream& rng_;
  double dt_, cutoff_, p_hat_, log_q_;
  int64_t nsteps_;
  int initial_count_;
  std::vector<double> pos_;
  std::vector<int64_t> synced_;
  std::vector<ParticleState> snapshots_;
};

}  // namespace

std::vector<ParticleState> run(const SimConfig& config, RngStream& rng) {
  config.validate();
  return LazyEngine(config, rng).take_snapshots();
}

std::vector<ParticleState> run_dense(const SimConfig& config, RngStream& rng,
                                     const StepObserver& observer) {
  config.validate();
  const double dt = config.resolved_dt();
  const int64_t nsteps = config.step_count();
  std::vector<int64_t> rec_steps;
  for (double t : config.record_times)
    rec_steps.push_back(std::clamp<int64_t>(std::llround(t / dt), 0, nsteps));

  ParticleState state = init_particles(config, rng);
  std::vector<ParticleState> snapshots;
  size_t rec = 0;
  auto emit_upto = [&](int64_t s) {
    while (rec < rec_steps.size() && rec_steps[rec] <= s) {
      ParticleState snap = state;
      snap.time = config.record_times[rec];
      snapshots.push_back(std::move(snap));
      ++rec;
    }
  };

  const double sq = std::sqrt(dt);
  std::vector<std::pair<int, int>> marks;
  for (int64_t s = 0; s < nsteps; ++s) {
    emit_upto(s);
    for (double& x : state.positions) x = fold_unit(x + sq * rng.normal());
    state.time = (s + 1) * dt;
    auto pairs = pair_rates_neighbor(state, config);
    if (observer) observer(state, pairs, dt);
    if (config.annihilation && state.alive() >= 2) {
      for (const auto& p : pairs)
        if (rng.uniform() < mark_probability(p.rate, dt)) marks.emplace_back(p.i, p.j);
      resolve_marks(state, marks, rng);
    }
  }
  emit_upto(nsteps);
  return snapshots;
}

}  // namespace abps
