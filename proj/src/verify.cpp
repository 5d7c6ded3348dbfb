#include "osp/verify.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "osp/numerics.hpp"

namespace osp {

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

// Volatility for bridge crossing checks; 0 when the model has no exact
// Gaussian bridge between grid points.
double bridge_sigma(const ProcessModel& p) {
  if (const auto* d = std::get_if<LinearDiffusion>(&p)) {
    if (d->closed_form && !std::holds_alternative<OrnsteinUhlenbeck>(*d->closed_form)) return std::sqrt(d->sigma2(0.0));
    return 0.0;
  }
  if (const auto* l = std::get_if<LevyModel>(&p)) return l->has_jumps() ? 0.0 : l->sigma;
  return 0.0;
}

std::uint64_t check_seed(std::uint64_t seed, std::uint64_t check) { return seed ^ (0x9E3779B97F4A7C15ull * check); }

double chain_payoff(const FiniteCTMC& c, const Policy& pol, const RealFn& G, double beta, int i,
                    std::mt19937_64& rng) {
  std::exponential_distribution<double> killing(beta);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double T = killing(rng);
  double t = 0.0;
  while (true) {
    if (pol.stops(i)) return G(i);
    if (c.is_absorbing(i)) return 0.0;
    std::exponential_distribution<double> hold(c.exit_rate(i));
    t += hold(rng);
    if (t >= T) return 0.0;
    i = jump_target(c, i, unif(rng));
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Policy
// ---------------------------------------------------------------------------

Policy Policy::threshold_right(double b) {
  Policy p;
  p.kind = Kind::threshold_right;
  p.b = b;
  p.description = "threshold_right(" + fmt(b) + ")";
  return p;
}

Policy Policy::threshold_left(double a) {
  Policy p;
  p.kind = Kind::threshold_left;
  p.a = a;
  p.description = "threshold_left(" + fmt(a) + ")";
  return p;
}

Policy Policy::two_sided(double a, double b) {
  Policy p;
  p.kind = Kind::two_sided;
  p.a = a;
  p.b = b;
  p.description = "two_sided(" + fmt(a) + "," + fmt(b) + ")";
  return p;
}

Policy Policy::state_set(std::vector<int> states, const std::string& label) {
  Policy p;
  p.kind = Kind::state_set;
  std::sort(states.begin(), states.end());
  states.erase(std::unique(states.begin(), states.end()), states.end());
  p.states = std::move(states);
  p.description = "state_set{" + label + "}";
  return p;
}

Policy Policy::immediate() {
  Policy p;
  p.description = "immediate";
  return p;
}

bool Policy::stops(double x) const {
  switch (kind) {
    case Kind::threshold_right:
      return x >= b;
    case Kind::threshold_left:
      return x <= a;
    case Kind::two_sided:
      return x <= a || x >= b;
    case Kind::state_set:
      return std::binary_search(states.begin(), states.end(), static_cast<int>(std::lround(x)));
    case Kind::immediate:
      return true;
  }
  return true;
}

void Policy::validate() const {
  if ((kind == Kind::threshold_right || kind == Kind::two_sided) && !std::isfinite(b))
    throw std::invalid_argument("policy: threshold must be finite");
  if ((kind == Kind::threshold_left || kind == Kind::two_sided) && !std::isfinite(a))
    throw std::invalid_argument("policy: threshold must be finite");
  if (kind == Kind::two_sided && !(a < b)) throw std::invalid_argument("policy: two-sided levels must satisfy a < b");
  if (kind == Kind::state_set && states.empty()) throw std::invalid_argument("policy: empty state set");
}

// ---------------------------------------------------------------------------
// Policy evaluation
// ---------------------------------------------------------------------------

std::vector<double> policy_payoffs(const ProcessModel& p, const Policy& pol, const RealFn& G, double beta, double x0,
                                   const SimulationOptions& o) {
  pol.validate();
  if (!(beta > 0.0)) throw std::invalid_argument("evaluate_policy: beta must be > 0");
  if (o.n_paths == 0) throw std::invalid_argument("evaluate_policy: n_paths must be > 0");
  if (const auto* c = std::get_if<FiniteCTMC>(&p)) {
    const int i0 = static_cast<int>(std::lround(x0));
    if (i0 < 0 || i0 >= c->n_states()) throw std::invalid_argument("evaluate_policy: state out of range");
    return simulate_values(o.n_paths, o.seed, [&](std::mt19937_64& block) {
      std::mt19937_64 rng(block());
      return chain_payoff(*c, pol, G, beta, i0, rng);
    });
  }
  const Stepper stepper(p, o.dt);
  const double s = o.bridge ? bridge_sigma(p) : 0.0;
  const bool watch_upper = pol.kind == Policy::Kind::threshold_right || pol.kind == Policy::Kind::two_sided;
  const bool watch_lower = pol.kind == Policy::Kind::threshold_left || pol.kind == Policy::Kind::two_sided;
  return simulate_values(o.n_paths, o.seed, [&](std::mt19937_64& block) {
    std::mt19937_64 rng(block());
    std::exponential_distribution<double> killing(beta);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const double T = killing(rng);
    double x = x0, t = 0.0;
    if (pol.stops(x)) return G(x);
    while (t < T) {
      const double h = std::min(o.dt, T - t);
      const double y = stepper.advance(x, h, rng);
      if (s > 0.0) {
        const double u = unif(rng);
        if (watch_upper && y < pol.b && u < std::exp(-2.0 * (pol.b - x) * (pol.b - y) / (s * s * h))) return G(pol.b);
        if (watch_lower && y > pol.a && u < std::exp(-2.0 * (x - pol.a) * (y - pol.a) / (s * s * h))) return G(pol.a);
      }
      if (pol.stops(y)) {
        // The continuous path met the level inside the step.
        if (s > 0.0 && watch_upper && y >= pol.b) return G(pol.b);
        if (s > 0.0 && watch_lower && y <= pol.a) return G(pol.a);
        return G(y);
      }
      if (stepper.absorbed(y)) return 0.0;
      x = y;
      t += h;
    }
    return 0.0;
  });
}

Estimate evaluate_policy(const ProcessModel& p, const Policy& pol, const RealFn& G, double beta, double x0,
                         const SimulationOptions& o) {
  const auto v = policy_payoffs(p, pol, G, beta, x0, o);
  return summarize(v);
}

namespace {

SweepRow compare(const Estimate& ref, const Estimate& e, const std::string& policy, double delta) {
  SweepRow r;
  r.policy = policy;
  r.delta = delta;
  r.estimate = e;
  r.difference = ref.mean - e.mean;
  r.combined_se = std::sqrt(ref.se * ref.se + e.se * e.se);
  r.passed = r.difference >= -3.0 * r.combined_se;
  return r;
}

}  // namespace

std::vector<SweepRow> perturbation_sweep(const ProcessModel& p, const Policy& reference, const RealFn& G, double beta,
                                         double x0, const std::vector<double>& deltas, const SimulationOptions& o,
                                         double domain_left, double domain_right) {
  const auto ref = evaluate_policy(p, reference, G, beta, x0, o);
  std::vector<SweepRow> rows;
  for (double delta : deltas) {
    Policy alt;
    switch (reference.kind) {
      case Policy::Kind::threshold_right:
        alt = Policy::threshold_right(reference.b + delta);
        break;
      case Policy::Kind::threshold_left:
        alt = Policy::threshold_left(reference.a + delta);
        break;
      case Policy::Kind::two_sided:
        alt = Policy::two_sided(reference.a - delta, reference.b + delta);
        break;
      default:
        throw std::invalid_argument("perturbation_sweep: reference must be a threshold policy");
    }
    const double level = alt.kind == Policy::Kind::threshold_left ? alt.a : alt.b;
    if (level < domain_left || level > domain_right) continue;
    if (alt.kind == Policy::Kind::two_sided && !(alt.a < alt.b)) continue;
    if (delta == 0.0) {
      rows.push_back(compare(ref, ref, reference.description, 0.0));
      continue;
    }
    rows.push_back(compare(ref, evaluate_policy(p, alt, G, beta, x0, o), alt.description, delta));
  }
  return rows;
}

std::vector<SweepRow> state_toggle_sweep(const FiniteCTMC& c, const std::vector<int>& reference,
                                         const std::vector<double>& G, double beta, int x0,
                                         const SimulationOptions& o) {
  const RealFn g = [&G](double x) { return G.at(static_cast<std::size_t>(std::lround(x))); };
  auto label = [&c](const std::vector<int>& set) {
    std::string s;
    for (int i : set) s += (s.empty() ? "" : ",") + c.labels[i];
    return s;
  };
  const auto ref_policy = Policy::state_set(reference, label(reference));
  const auto ref = evaluate_policy(c, ref_policy, g, beta, x0, o);
  std::vector<SweepRow> rows;
  for (int j = 0; j < c.n_states(); ++j) {
    std::vector<int> alt = reference;
    auto it = std::find(alt.begin(), alt.end(), j);
    if (it != alt.end()) alt.erase(it);
    else alt.push_back(j);
    std::sort(alt.begin(), alt.end());
    if (alt.empty()) continue;
    const auto pol = Policy::state_set(alt, label(alt));
    rows.push_back(compare(ref, evaluate_policy(c, pol, g, beta, x0, o), pol.description, 0.0));
  }
  return rows;
}

std::vector<ExcessivityRow> excessivity_test(const RealFn& V, const ProcessModel& p, double beta,
                                             const std::vector<double>& times, const std::vector<double>& xs,
                                             const SimulationOptions& o) {
  const Stepper stepper(p, o.dt);
  std::vector<ExcessivityRow> rows;
  std::uint64_t k = 0;
  for (double t : times) {
    if (!(t >= 0.0)) throw std::invalid_argument("excessivity_test: times must be >= 0");
    for (double x : xs) {
      ExcessivityRow r;
      r.t = t;
      r.x = x;
      r.value = V(x);
      ++k;
      if (t == 0.0) {
        r.estimate = {r.value, 0.0, o.n_paths};
      } else {
        const double discount = std::exp(-beta * t);
        const auto v = simulate_values(o.n_paths, check_seed(o.seed, k), [&](std::mt19937_64& block) {
          std::mt19937_64 rng(block());
          return discount * V(stepper.advance(x, t, rng));
        });
        r.estimate = summarize(v);
      }
      r.passed = r.estimate.mean <= r.value + 3.0 * r.estimate.se + 1e-9 * std::max(1.0, std::abs(r.value));
      rows.push_back(r);
    }
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Full verification
// ---------------------------------------------------------------------------

bool VerificationReport::red_flag() const {
  return std::any_of(rows.begin(), rows.end(), [](const VerifyRow& r) { return r.status == "fail"; });
}

namespace {

VerifyRow make_row(const std::string& check, const std::string& policy, double x0, const Estimate& e,
                   double reference, const SimulationOptions& o, const std::string& status) {
  VerifyRow r;
  r.check = check;
  r.policy = policy;
  r.x0 = x0;
  r.estimate = e.mean;
  r.se = e.se;
  r.reference = reference;
  r.n_paths = e.n;
  r.dt = o.dt;
  r.seed = o.seed;
  r.status = status;
  return r;
}

void add_sweep_rows(VerificationReport& rep, const std::vector<SweepRow>& rows, double x0, double ref_estimate,
                    const SimulationOptions& o) {
  for (const auto& s : rows) {
    auto r = make_row("sweep", s.policy, x0, s.estimate, ref_estimate, o, s.passed ? "pass" : "fail");
    r.delta = s.delta;
    r.se = s.combined_se;
    rep.rows.push_back(r);
  }
}

void add_excessivity_rows(VerificationReport& rep, const std::vector<ExcessivityRow>& rows,
                          const SimulationOptions& o, std::uint64_t seed) {
  for (const auto& e : rows) {
    auto r = make_row("excessivity", "", e.x, e.estimate, e.value, o, e.passed ? "pass" : "fail");
    r.t = e.t;
    r.seed = seed;
    rep.rows.push_back(r);
  }
}

std::vector<double> inside(const std::vector<double>& xs, double lo, double hi) {
  std::vector<double> out;
  for (double x : xs)
    if (x >= lo && x <= hi) out.push_back(x);
  return out;
}

}  // namespace

VerificationReport run_verification(const Solution& sol, const VerifyOptions& o) {
  VerificationReport rep;
  const double beta = sol.problem.beta;
  const RealFn G = [&sol](double x) { return sol.reward(x); };
  const RealFn V = [&sol](double x) { return sol.value_at(x); };
  auto sim_for = [&](std::uint64_t k) {
    SimulationOptions s = o.sim;
    s.seed = check_seed(o.sim.seed, k);
    return s;
  };

  if (sol.is_chain()) {
    const auto& c = std::get<FiniteCTMC>(sol.problem.process);
    const auto& region = sol.chain->stopping_region;
    std::string label;
    for (int i : region) label += (label.empty() ? "" : ",") + c.labels[i];
    std::vector<double> states;
    for (int i = 0; i < c.n_states(); ++i) states.push_back(i);
    if (!region.empty()) {
      const auto pol = Policy::state_set(region, label);
      for (int i = 0; i < c.n_states(); ++i) {
        const auto s = sim_for(1);
        const auto e = evaluate_policy(c, pol, G, beta, i, s);
        const bool ok = std::abs(e.mean - sol.chain_value[i]) <= 3.0 * e.se + 1e-12;
        rep.rows.push_back(make_row("policy_value", pol.description, i, e, sol.chain_value[i], s, ok ? "pass" : "fail"));
      }
      for (int i = 0; i < c.n_states(); ++i) {
        const auto s = sim_for(2);
        const auto ref = evaluate_policy(c, pol, G, beta, i, s);
        add_sweep_rows(rep, state_toggle_sweep(c, region, sol.problem.chain_reward, beta, i, s), i, ref.mean, s);
      }
    }
    SimulationOptions es = sim_for(3);
    es.n_paths = o.excessivity_paths;
    add_excessivity_rows(rep, excessivity_test(V, c, beta, o.times, states, es), es, es.seed);
  } else {
    const auto& thr = *sol.threshold;
    const bool right = thr.side == Side::right;
    const double dir = right ? 1.0 : -1.0;
    const double scale = sol.scale();
    const double lo = sol.domain_left(), hi = sol.domain_right();
    const double level = thr.x_star + o.threshold_shift;
    const Policy pol = (thr.immediate_stop && o.threshold_shift == 0.0)
                           ? Policy::immediate()
                           : (right ? Policy::threshold_right(level) : Policy::threshold_left(level));
    const bool exact = o.sim.bridge && bridge_sigma(sol.problem.process) > 0.0 && o.threshold_shift == 0.0;

    std::vector<double> x0s = o.x0s;
    if (x0s.empty()) {
      for (double k : {0.5, 1.0}) x0s.push_back(thr.immediate_stop ? thr.x_star + dir * k * scale
                                                                         : thr.x_star - dir * k * scale);
    }
    x0s = inside(x0s, lo, hi);
    for (std::size_t j = 0; j < x0s.size(); ++j) {
      const double x0 = x0s[j];
      const auto s = sim_for(1);
      const auto e = evaluate_policy(sol.problem.process, pol, G, beta, x0, s);
      const double v = V(x0);
      std::string status = "info";
      if (pol.kind == Policy::Kind::immediate || exact)
        status = std::abs(e.mean - v) <= 3.0 * e.se + 1e-9 * std::max(1.0, std::abs(v)) ? "pass" : "fail";
      rep.rows.push_back(make_row("policy_value", pol.description, x0, e, v, s, status));
      if (o.dt_halving && j == 0 && pol.kind != Policy::Kind::immediate && !exact) {
        auto half = s;
        half.dt = s.dt / 2.0;
        const auto e2 = evaluate_policy(sol.problem.process, pol, G, beta, x0, half);
        rep.rows.push_back(make_row("policy_value_half_dt", pol.description, x0, e2, v, half, "info"));
      }
    }

    double sweep_x0;
    if (o.sweep_x0) {
      sweep_x0 = *o.sweep_x0;
    } else if (thr.immediate_stop && o.threshold_shift == 0.0) {
      sweep_x0 = level + dir * 0.25 * scale;
    } else {
      sweep_x0 = level - dir * scale;
      if (sweep_x0 < lo) sweep_x0 = 0.5 * (lo + level);
      if (sweep_x0 > hi) sweep_x0 = 0.5 * (hi + level);
    }
    const Policy sweep_ref = right ? Policy::threshold_right(level) : Policy::threshold_left(level);
    const auto s = sim_for(2);
    std::vector<double> deltas{0.0};
    deltas.insert(deltas.end(), o.deltas.begin(), o.deltas.end());
    const auto sweep = perturbation_sweep(sol.problem.process, sweep_ref, G, beta, sweep_x0, deltas, s, lo, hi);
    const auto at_zero = std::find_if(sweep.begin(), sweep.end(), [](const SweepRow& r) { return r.delta == 0.0; });
    const double ref_mean = at_zero != sweep.end() ? at_zero->estimate.mean
                                                   : evaluate_policy(sol.problem.process, sweep_ref, G, beta, sweep_x0, s).mean;
    add_sweep_rows(rep, sweep, sweep_x0, ref_mean, s);

    std::vector<double> xs = o.excessivity_xs;
    if (xs.empty())
      for (double k : {-2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0}) xs.push_back(thr.x_star + k * scale);
    xs = inside(xs, lo, hi);
    SimulationOptions es = sim_for(3);
    es.n_paths = o.excessivity_paths;
    add_excessivity_rows(rep, excessivity_test(V, sol.problem.process, beta, o.times, xs, es), es, es.seed);
  }

  // Relative shortfall of V below G, judged with the solver's tolerance.
  double worst = 0.0, tol = 1e-12;
  if (sol.is_chain()) {
    for (std::size_t i = 0; i < sol.chain_value.size(); ++i) {
      const double g = sol.problem.chain_reward[i];
      worst = std::max(worst, (g - sol.chain_value[i]) / std::max(1.0, std::abs(g)));
    }
  } else {
    tol = sol.problem.options.route_tol;
    for (const auto& r : sol.value_grid) worst = std::max(worst, (r.reward - r.max_law) / std::max(1.0, std::abs(r.reward)));
  }
  VerifyRow maj;
  maj.check = "majorant";
  maj.estimate = worst;
  maj.reference = tol;
  maj.status = worst <= tol ? "pass" : "fail";
  rep.rows.push_back(maj);
  return rep;
}

}  // namespace osp
