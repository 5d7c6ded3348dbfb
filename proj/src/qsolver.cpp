#include "osp/qsolver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace osp {

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

}  // namespace

bool ConditionReport::certified() const {
  return std::all_of(checks.begin(), checks.end(), [](const ConditionCheck& c) { return c.passed; });
}

const ConditionCheck* ConditionReport::find(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name) return &c;
  return nullptr;
}

double ThresholdSolution::f_hat(double x) const {
  if (side == Side::right ? x < x_star : x > x_star) return 0.0;
  return std::max(q(x), 0.0);
}

ExpPoly q_levy(const LevyModel& l, const FTilde& ftilde, double beta) {
  if (!ftilde.closed) throw std::invalid_argument("q_levy: f~ has no closed form");
  const auto laws = wh_factor_laws(l, beta);
  return expect_shifted(*ftilde.closed, laws.second) * (1.0 / beta);
}

ExpPoly q_levy_from_reward(const LevyModel& l, const ExpPoly& G, double beta) {
  return invert_shifted(G, wh_factor_laws(l, beta).first);
}

bool resolvent_route_applicable(const LevyModel& l, const ExpPoly& G, double beta) {
  const auto [lo, hi] = l.strip();
  for (const auto& t : G.terms())
    if (!(t.rate > lo && t.rate < hi) || !(l.laplace_exponent(t.rate) < beta)) return false;
  return true;
}

// ---------------------------------------------------------------------------
// DiffusionQ
// ---------------------------------------------------------------------------

DiffusionQ::DiffusionQ(std::shared_ptr<const FundamentalPair> fp, FTilde ftilde, double beta, const QOptions& options)
    : fp_(std::move(fp)), ftilde_(std::move(ftilde)), beta_(beta), options_(options) {
  const auto& d = fp_->diffusion();
  const double hi = std::min(options_.hi, d.right);
  double lo = std::max(options_.lo, d.left);
  if (!(lo < hi)) throw std::invalid_argument("q_diffusion: empty table range");
  const bool absorbing_left = std::isfinite(d.left) && d.left_kind == BoundaryKind::absorbing;

  // Left end: the absorbing boundary, or where the integrand has decayed.
  double a = lo;
  if (absorbing_left) {
    a = d.left;
  } else {
    const double ref = log_reference(lo);
    const double floor = std::max(fp_->lo(), d.left);
    for (int k = 0; k < 400; ++k) {
      const double scale = d.local_scale(beta_, a);
      const double env = (1.0 + std::abs(ftilde_(a))) * weight(a, ref) * scale;
      if (k > 0 && env < 1e-2 * options_.tail_rel) break;
      if (a - scale <= floor) {
        a = floor;
        break;
      }
      a -= scale;
    }
    tail_bound_ = (1.0 + std::abs(ftilde_(a))) * weight(a, ref) * d.local_scale(beta_, a);
  }
  if (!ftilde_.closed) kinks_ = ftilde_.expr.kinks(a, hi);

  nodes_.push_back(a);
  std::size_t next_kink = 0;
  while (nodes_.back() < hi) {
    const double x = nodes_.back();
    double next = std::min(hi, x + options_.cell_scales * d.local_scale(beta_, x));
    while (next_kink < kinks_.size() && kinks_[next_kink] <= x) ++next_kink;
    if (next_kink < kinks_.size() && kinks_[next_kink] < next) next = kinks_[next_kink];
    nodes_.push_back(next);
  }

  log_ref_.resize(nodes_.size());
  n_.resize(nodes_.size());
  d_.resize(nodes_.size());
  for (std::size_t k = 0; k < nodes_.size(); ++k) log_ref_[k] = log_reference(nodes_[k]);
  n_[0] = 0.0;
  d_[0] = absorbing_left ? 1.0 : 0.0;
  for (std::size_t k = 0; k + 1 < nodes_.size(); ++k) {
    const double carry = std::exp(log_ref_[k] - log_ref_[k + 1]);
    const auto [cn, cd] = cell(nodes_[k], nodes_[k + 1], log_ref_[k + 1]);
    n_[k + 1] = n_[k] * carry + cn;
    d_[k + 1] = d_[k] * carry + cd;
    if (nodes_[k + 1] >= lo) normalization_error_ = std::max(normalization_error_, std::abs(d_[k + 1] - 1.0));
  }
}

double DiffusionQ::log_reference(double z) const {
  const auto s = fp_->psi_state(z);
  return s.log_scale + std::log(s.slope) - s.log_scale_density - std::log(beta_);
}

double DiffusionQ::weight(double y, double log_ref) const {
  const auto s = fp_->psi_state(y);
  if (s.value <= 0.0) return 0.0;
  return std::exp(s.log_scale + std::log(s.value) + fp_->log_speed_density(y) - log_ref);
}

std::pair<double, double> DiffusionQ::cell(double a, double b, double log_ref) const {
  if (a == b) return {0.0, 0.0};
  const auto num = integrate([&](double y) { return ftilde_(y) * weight(y, log_ref); }, a, b, options_.rel_tol);
  const auto den = integrate([&](double y) { return weight(y, log_ref); }, a, b, options_.rel_tol);
  return {num.value, den.value};
}

std::pair<double, double> DiffusionQ::scaled_integrals(double z) const {
  if (z < nodes_.front() || z > nodes_.back())
    throw std::out_of_range("q_diffusion: z = " + fmt(z) + " outside the tabulated range [" + fmt(nodes_.front()) +
                            ", " + fmt(nodes_.back()) + "]");
  auto it = std::upper_bound(nodes_.begin(), nodes_.end(), z);
  const std::size_t k = static_cast<std::size_t>(std::distance(nodes_.begin(), it)) - 1;
  const double lr = log_reference(z);
  const double carry = std::exp(log_ref_[k] - lr);
  const auto [cn, cd] = cell(nodes_[k], z, lr);
  return {n_[k] * carry + cn, d_[k] * carry + cd};
}

double DiffusionQ::operator()(double z) const {
  const auto [n, d] = scaled_integrals(z);
  if (d <= 0.0) return ftilde_(z) / beta_;
  return n / d / beta_;
}

// ---------------------------------------------------------------------------
// Threshold
// ---------------------------------------------------------------------------

ThresholdSolution find_threshold(const RealFn& q, const ThresholdSearch& search) {
  if (!(search.lo < search.hi)) throw std::invalid_argument("find_threshold: empty search interval");
  if (search.grid_points < 2) throw std::invalid_argument("find_threshold: need at least 2 grid points");
  const auto grid = linspace(search.lo, search.hi, static_cast<std::size_t>(search.grid_points));
  std::vector<double> qv(grid.size());
  int last_nonpositive = -1;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    qv[i] = q(grid[i]);
    if (!std::isfinite(qv[i])) throw std::runtime_error("find_threshold: Q is not finite at z = " + fmt(grid[i]));
    if (!(qv[i] > 0.0)) last_nonpositive = static_cast<int>(i);
  }
  ThresholdSolution s;
  s.q = q;
  s.side = Side::right;
  s.search_lo = search.lo;
  s.search_hi = search.hi;
  const int n = static_cast<int>(grid.size());
  if (last_nonpositive == n - 1) {
    const bool all = std::none_of(qv.begin(), qv.end(), [](double v) { return v > 0.0; });
    if (all)
      throw std::runtime_error("find_threshold: Q <= 0 on the whole search interval [" + fmt(search.lo) + ", " +
                               fmt(search.hi) + "]; never stopping is the degenerate answer");
    throw std::runtime_error("find_threshold: Q <= 0 at the right end of the search interval; enlarge it");
  }
  if (last_nonpositive == -1 || (last_nonpositive == 0 && qv[0] == 0.0)) {
    s.immediate_stop = true;
    s.x_star = search.lo;
  } else {
    const auto j = static_cast<std::size_t>(last_nonpositive);
    s.x_star = bisect_transition([&](double z) { return q(z) > 0.0; }, grid[j], grid[j + 1], search.tol);
  }
  s.q_at_threshold = q(s.x_star);
  return s;
}

Problem mirror_left(const Problem& p) {
  if (p.is_chain()) throw std::invalid_argument("mirror_left: chains have no left/right mirror");
  Problem m = p;
  if (const auto* d = std::get_if<LinearDiffusion>(&p.process)) m.process = d->mirrored();
  if (const auto* l = std::get_if<LevyModel>(&p.process)) m.process = l->mirrored();
  m.reward = p.reward.compose(-RewardExpr::variable());
  if (p.side == SideChoice::left) m.side = SideChoice::right;
  else if (p.side == SideChoice::right) m.side = SideChoice::left;
  m.options.search_lo.reset();
  m.options.search_hi.reset();
  if (p.options.search_hi) m.options.search_lo = -*p.options.search_hi;
  if (p.options.search_lo) m.options.search_hi = -*p.options.search_lo;
  return m;
}

ThresholdSolution mirror_solution(const ThresholdSolution& s) {
  ThresholdSolution m = s;
  m.q = [q = s.q](double x) { return q(-x); };
  if (s.q_closed) {
    ExpPoly p;
    for (const auto& t : s.q_closed->terms())
      p += ExpPoly::monomial(t.power % 2 == 0 ? t.coeff : -t.coeff, t.power, -t.rate);
    m.q_closed = p;
  }
  m.x_star = -s.x_star;
  m.side = s.side == Side::right ? Side::left : Side::right;
  m.search_lo = -s.search_hi;
  m.search_hi = -s.search_lo;
  return m;
}

ConditionReport validate_theorem_conditions(const ThresholdSolution& sol, const RealFn& G, const RealFn& expected_sup,
                                            const ConditionOptions& o) {
  if (sol.side != Side::right) throw std::invalid_argument("validate_theorem_conditions: expects a right-sided solution");
  ConditionReport r;
  const double probe = o.probe_scales * sol.scale;
  const double xs = sol.x_star;
  const double left = std::max(xs - probe, o.domain_left);

  ConditionCheck ai{"a_i", true, 0.0, "f_hat <= 0 left of x* on " + std::to_string(o.probe_points) + " points"};
  for (double x : linspace(left, xs, static_cast<std::size_t>(o.probe_points))) {
    if (x >= xs) continue;
    const double v = sol.f_hat(x);
    ai.worst = std::max(ai.worst, v);
    if (v > 0.0) ai.passed = false;
  }
  r.checks.push_back(ai);

  ConditionCheck aii{"a_ii", true, 0.0,
                     "f_hat positive and nondecreasing on (x*, x* + " + fmt(probe) + "], " +
                         std::to_string(o.probe_points) + " points"};
  double prev = sol.f_hat(xs);
  for (int i = 1; i <= o.probe_points; ++i) {
    const double x = xs + probe * i / o.probe_points;
    const double v = sol.f_hat(x);
    const double drop = prev - v - 1e-12 * std::max(1.0, std::abs(v));
    if (!(v > 0.0)) {
      aii.passed = false;
      aii.worst = std::max(aii.worst, -v);
    }
    if (drop > 0.0) {
      aii.passed = false;
      aii.worst = std::max(aii.worst, drop);
    }
    prev = v;
  }
  r.checks.push_back(aii);

  ConditionCheck bi{"b_i", true, 0.0,
                    "E sup f_hat = G on [x*, x* + " + fmt(probe) + "], relative tol " + fmt(o.tol)};
  for (double x : linspace(xs, xs + probe, static_cast<std::size_t>(o.check_points))) {
    const double g = G(x);
    const double dev = std::abs(expected_sup(x) - g) / std::max(1.0, std::abs(g));
    bi.worst = std::max(bi.worst, dev);
    if (!(dev <= o.tol)) bi.passed = false;
  }
  r.checks.push_back(bi);

  ConditionCheck bii{"b_ii", true, 0.0, "E sup f_hat >= G on [" + fmt(left) + ", x*], relative tol " + fmt(o.tol)};
  if (left < xs) {
    for (double x : linspace(left, xs, static_cast<std::size_t>(o.check_points))) {
      const double g = G(x);
      const double short_by = (g - expected_sup(x)) / std::max(1.0, std::abs(g));
      bii.worst = std::max(bii.worst, short_by);
      if (!(short_by <= o.tol)) bii.passed = false;
    }
  }
  r.checks.push_back(bii);

  if (!sol.immediate_stop) {
    const double tol = std::max(1e-9 * sol.scale, 1e-9);
    const double qv = std::abs(sol.q(xs));
    r.checks.push_back({"q_continuity", qv <= tol, qv, "|Q(x*)| <= " + fmt(tol)});
  }

  r.assumptions.push_back("E_x e^{-beta t} G(X_t) -> 0 as t -> inf is assumed, not checked");
  r.assumptions.push_back("condition (b)(ii) is checked on a finite grid only");
  r.assumptions.push_back("stopping time convention: analytic routes use inf{t: X_t > x*}; simulation uses X_t >= x*");
  return r;
}

}  // namespace osp
