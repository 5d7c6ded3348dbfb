#include "osp/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <thread>

#include <boost/random/normal_distribution.hpp>

#include "osp/numerics.hpp"

namespace osp {

int jump_target(const FiniteCTMC& c, int i, double u) {
  double acc = u * c.exit_rate(i);
  int last = -1;
  for (int j = 0; j < c.n_states(); ++j) {
    if (j == i || c.rates(i, j) <= 0.0) continue;
    last = j;
    if (acc < c.rates(i, j)) return j;
    acc -= c.rates(i, j);
  }
  return last;
}

std::mt19937_64 stream_rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32), 0x5eedu};
  return std::mt19937_64(seq);
}

int worker_count() {
  if (const char* env = std::getenv("OSP_WORKERS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<double> simulate_values(std::size_t n_paths, std::uint64_t seed,
                                    const std::function<double(std::mt19937_64&)>& fn) {
  std::vector<double> out(n_paths);
  const std::size_t n_blocks = (n_paths + kPathsPerBlock - 1) / kPathsPerBlock;
  auto run_block = [&](std::size_t b) {
    auto rng = stream_rng(seed, b);
    const std::size_t end = std::min(n_paths, (b + 1) * kPathsPerBlock);
    for (std::size_t i = b * kPathsPerBlock; i < end; ++i) out[i] = fn(rng);
  };
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(worker_count()), n_blocks);
  if (workers <= 1) {
    for (std::size_t b = 0; b < n_blocks; ++b) run_block(b);
    return out;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t b = w; b < n_blocks; b += workers) run_block(b);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

Estimate summarize(std::span<const double> values) {
  Estimate e;
  e.n = values.size();
  if (e.n == 0) return e;
  e.mean = pairwise_sum(values) / static_cast<double>(e.n);
  if (e.n < 2) return e;
  std::vector<double> sq(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) sq[i] = (values[i] - e.mean) * (values[i] - e.mean);
  const double var = pairwise_sum(sq) / static_cast<double>(e.n - 1);
  e.se = std::sqrt(var / static_cast<double>(e.n));
  return e;
}

// ---------------------------------------------------------------------------

Stepper::Stepper(const ProcessModel& p, double dt) : model_(p), dt_(dt), sqrt_dt_(std::sqrt(dt)) {
  if (!(dt > 0.0)) throw std::invalid_argument("simulation: dt must be > 0");
  if (const auto* l = std::get_if<LevyModel>(&model_); l && !l->has_jumps()) {
    constant_ = true;
    mu_ = l->mu;
    sigma_ = l->sigma;
  }
  if (const auto* d = std::get_if<LinearDiffusion>(&model_);
      d && d->closed_form && !std::holds_alternative<OrnsteinUhlenbeck>(*d->closed_form)) {
    constant_ = true;
    mu_ = d->mu(0.0);
    sigma_ = std::sqrt(d->sigma2(0.0));
    if (std::isfinite(d->left) && d->left_kind == BoundaryKind::absorbing) lower_ = d->left;
    if (std::isfinite(d->right) && d->right_kind == BoundaryKind::absorbing) upper_ = d->right;
  }
  if (const auto* d = std::get_if<LinearDiffusion>(&model_);
      d && d->closed_form && std::holds_alternative<OrnsteinUhlenbeck>(*d->closed_form)) {
    const double g = std::get<OrnsteinUhlenbeck>(*d->closed_form).gamma;
    ou_decay_ = std::exp(-g * dt);
    ou_sd_ = std::sqrt(-std::expm1(-2.0 * g * dt) / (2.0 * g));
  }
}

bool Stepper::absorbed(double x) const {
  if (const auto* d = std::get_if<LinearDiffusion>(&model_)) {
    return (d->left_kind == BoundaryKind::absorbing && x <= d->left) ||
           (d->right_kind == BoundaryKind::absorbing && x >= d->right);
  }
  if (const auto* c = std::get_if<FiniteCTMC>(&model_)) return c->is_absorbing(static_cast<int>(x));
  return false;
}

double Stepper::advance(double x, double h, std::mt19937_64& rng) const {
  if (constant_) return h <= 0.0 || x <= lower_ || x >= upper_ ? x : advance_constant(x, h, rng);
  if (h <= 0.0 || absorbed(x)) return x;
  if (const auto* l = std::get_if<LevyModel>(&model_)) return advance_levy(*l, x, h, rng);
  if (const auto* c = std::get_if<FiniteCTMC>(&model_)) return advance_chain(*c, x, h, rng);
  return advance_diffusion(x, h, rng);
}

double Stepper::advance_constant(double x, double h, std::mt19937_64& rng) const {
  boost::random::normal_distribution<double> normal(0.0, 1.0);
  const double sh = h == dt_ ? sqrt_dt_ : std::sqrt(h);
  const double y = x + mu_ * h + sigma_ * sh * normal(rng);
  if (lower_ == -kInf && upper_ == kInf) return y;
  // Absorption between the endpoints via the bridge extreme; no uniform is
  // drawn when the crossing probability is below e^-40.
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double v = sigma_ * sigma_ * h;
  auto crossed = [&](double level) {
    const double e = 2.0 * (x - level) * (y - level) / v;
    return e < 40.0 && unif(rng) < std::exp(-e);
  };
  if (lower_ > -kInf && (y <= lower_ || crossed(lower_))) return lower_;
  if (upper_ < kInf && (y >= upper_ || crossed(upper_))) return upper_;
  return y;
}

double Stepper::advance_diffusion(double x, double h, std::mt19937_64& rng) const {
  const auto& d = std::get<LinearDiffusion>(model_);
  boost::random::normal_distribution<double> normal(0.0, 1.0);
  if (d.closed_form && std::holds_alternative<OrnsteinUhlenbeck>(*d.closed_form) && !std::isfinite(d.left) &&
      !std::isfinite(d.right)) {
    if (h == dt_) return x * ou_decay_ + ou_sd_ * normal(rng);
    const double g = std::get<OrnsteinUhlenbeck>(*d.closed_form).gamma;
    return x * std::exp(-g * h) + std::sqrt(-std::expm1(-2.0 * g * h) / (2.0 * g)) * normal(rng);
  }
  double y = x;
  double left = h;
  while (left > 0.0) {
    const double s = std::min(dt_, left);
    y += d.mu(y) * s + std::sqrt(d.sigma2(y) * s) * normal(rng);
    left -= s;
    if (y <= d.left) return d.left;
    if (y >= d.right) return d.right;
  }
  return y;
}

double Stepper::advance_levy(const LevyModel& l, double x, double h, std::mt19937_64& rng) const {
  boost::random::normal_distribution<double> normal(0.0, 1.0);
  double y = x + l.mu * h + l.sigma * std::sqrt(h) * normal(rng);
  if (l.has_jumps()) {
    std::poisson_distribution<int> count(l.jump_rate * h);
    const int n = count(rng);
    if (n > 0) {
      std::gamma_distribution<double> total(n, 1.0 / l.jump_decay);
      y += (l.jump_side == JumpSide::positive ? 1.0 : -1.0) * total(rng);
    }
  }
  return y;
}

double Stepper::advance_chain(const FiniteCTMC& c, double x, double h, std::mt19937_64& rng) const {
  int i = static_cast<int>(x);
  double t = 0.0;
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  while (!c.is_absorbing(i)) {
    std::exponential_distribution<double> hold(c.exit_rate(i));
    t += hold(rng);
    if (t >= h) break;
    i = jump_target(c, i, unif(rng));
  }
  return i;
}

Path simulate_path(const ProcessModel& p, double x0, double horizon, double dt, std::uint64_t seed) {
  if (!(horizon >= 0.0)) throw std::invalid_argument("simulate_path: horizon must be >= 0");
  auto rng = stream_rng(seed, 0);
  Path path;
  path.t.push_back(0.0);
  path.x.push_back(x0);
  if (const auto* c = std::get_if<FiniteCTMC>(&p)) {
    int i = static_cast<int>(x0);
    if (i < 0 || i >= c->n_states() || static_cast<double>(i) != x0)
      throw std::invalid_argument("simulate_path: chain start must be a state index");
    double t = 0.0;
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    while (!c->is_absorbing(i)) {
      std::exponential_distribution<double> hold(c->exit_rate(i));
      t += hold(rng);
      if (t >= horizon) break;
      i = jump_target(*c, i, unif(rng));
      path.t.push_back(t);
      path.x.push_back(i);
    }
    path.t.push_back(horizon);
    path.x.push_back(i);
    return path;
  }
  Stepper stepper(p, dt);
  double t = 0.0, x = x0;
  while (t < horizon) {
    const double h = std::min(dt, horizon - t);
    x = stepper.advance(x, h, rng);
    t = (horizon - t <= dt) ? horizon : t + h;
    path.t.push_back(t);
    path.x.push_back(x);
  }
  return path;
}

std::pair<double, double> sample_levy_extremes(const LevyModel& l, double beta, std::mt19937_64& rng) {
  std::exponential_distribution<double> killing(beta);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  boost::random::normal_distribution<double> normal(0.0, 1.0);
  const double T = killing(rng);
  const double s2 = l.sigma * l.sigma;
  double x = 0.0, hi = 0.0, lo = 0.0, t = 0.0;
  auto segment = [&](double dur) {
    const double inc = l.mu * dur + l.sigma * std::sqrt(dur) * normal(rng);
    const double bmax = 0.5 * (inc + std::sqrt(inc * inc - 2.0 * s2 * dur * std::log1p(-unif(rng))));
    const double bmin = 0.5 * (inc - std::sqrt(inc * inc - 2.0 * s2 * dur * std::log1p(-unif(rng))));
    hi = std::max(hi, x + bmax);
    lo = std::min(lo, x + bmin);
    x += inc;
  };
  if (l.has_jumps()) {
    std::exponential_distribution<double> wait(l.jump_rate);
    std::exponential_distribution<double> size(l.jump_decay);
    const double sign = l.jump_side == JumpSide::positive ? 1.0 : -1.0;
    while (true) {
      const double w = wait(rng);
      if (t + w >= T) break;
      segment(w);
      t += w;
      x += sign * size(rng);
      hi = std::max(hi, x);
      lo = std::min(lo, x);
    }
  }
  segment(T - t);
  return {hi, lo};
}

}  // namespace osp
