#include "osp/processes.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "osp/numerics.hpp"

namespace osp {

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

// (theta_minus, theta_plus) solving 1/2 sigma^2 t^2 + mu t = beta.
std::pair<double, double> constant_coefficient_roots(double mu, double sigma, double beta) {
  const double s2 = sigma * sigma;
  const double disc = std::sqrt(mu * mu + 2.0 * beta * s2);
  return {(-mu - disc) / s2, (-mu + disc) / s2};
}

}  // namespace

// ---------------------------------------------------------------------------
// LinearDiffusion
// ---------------------------------------------------------------------------

LinearDiffusion LinearDiffusion::brownian(double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("brownian: sigma must be > 0");
  LinearDiffusion d;
  d.drift = RewardExpr::constant(0.0);
  d.variance = RewardExpr::constant(sigma * sigma);
  d.closed_form = BrownianMotion{sigma};
  return d;
}

LinearDiffusion LinearDiffusion::brownian_with_drift(double mu, double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("brownian_with_drift: sigma must be > 0");
  if (!std::isfinite(mu)) throw std::invalid_argument("brownian_with_drift: mu must be finite");
  LinearDiffusion d;
  d.drift = RewardExpr::constant(mu);
  d.variance = RewardExpr::constant(sigma * sigma);
  d.closed_form = BrownianWithDrift{mu, sigma};
  return d;
}

LinearDiffusion LinearDiffusion::ornstein_uhlenbeck(double gamma) {
  if (!(gamma > 0.0)) throw std::invalid_argument("ornstein_uhlenbeck: gamma must be > 0");
  LinearDiffusion d;
  d.drift = RewardExpr::constant(-gamma) * RewardExpr::variable();
  d.variance = RewardExpr::constant(1.0);
  d.closed_form = OrnsteinUhlenbeck{gamma};
  return d;
}

LinearDiffusion LinearDiffusion::absorbed_brownian(double sigma, double level) {
  LinearDiffusion d = brownian(sigma);
  d.left = level;
  d.left_kind = BoundaryKind::absorbing;
  return d;
}

LinearDiffusion LinearDiffusion::general(RewardExpr drift, RewardExpr variance, double left, BoundaryKind left_kind,
                                         double right, BoundaryKind right_kind) {
  LinearDiffusion d;
  d.drift = std::move(drift);
  d.variance = std::move(variance);
  d.left = left;
  d.right = right;
  d.left_kind = left_kind;
  d.right_kind = right_kind;
  d.validate();
  return d;
}

double LinearDiffusion::mu(double x) const {
  if (closed_form) {
    return std::visit(Overloaded{[](const BrownianMotion&) { return 0.0; },
                                 [](const BrownianWithDrift& b) { return b.mu; },
                                 [x](const OrnsteinUhlenbeck& o) { return -o.gamma * x; }},
                      *closed_form);
  }
  return drift(x);
}

double LinearDiffusion::sigma2(double x) const {
  if (closed_form) {
    return std::visit(Overloaded{[](const BrownianMotion& b) { return b.sigma * b.sigma; },
                                 [](const BrownianWithDrift& b) { return b.sigma * b.sigma; },
                                 [](const OrnsteinUhlenbeck&) { return 1.0; }},
                      *closed_form);
  }
  return variance(x);
}

double LinearDiffusion::local_scale(double beta, double x) const { return std::sqrt(sigma2(x) / (2.0 * beta)); }

std::optional<double> LinearDiffusion::closed_log_scale_density(double x) const {
  if (!closed_form) return std::nullopt;
  return std::visit(Overloaded{[](const BrownianMotion&) { return 0.0; },
                               [x](const BrownianWithDrift& b) { return -2.0 * b.mu * x / (b.sigma * b.sigma); },
                               [x](const OrnsteinUhlenbeck& o) { return o.gamma * x * x; }},
                    *closed_form);
}

LinearDiffusion LinearDiffusion::mirrored() const {
  LinearDiffusion m;
  const auto neg_x = -RewardExpr::variable();
  m.drift = -drift.compose(neg_x);
  m.variance = variance.compose(neg_x);
  m.left = -right;
  m.right = -left;
  m.left_kind = right_kind;
  m.right_kind = left_kind;
  if (closed_form) {
    m.closed_form = std::visit(
        Overloaded{[](const BrownianMotion& b) -> DiffusionClosedForm { return b; },
                   [](const BrownianWithDrift& b) -> DiffusionClosedForm { return BrownianWithDrift{-b.mu, b.sigma}; },
                   [](const OrnsteinUhlenbeck& o) -> DiffusionClosedForm { return o; }},
        *closed_form);
  }
  return m;
}

void LinearDiffusion::validate() const {
  if (!(left < right)) throw std::invalid_argument("diffusion: state interval is empty");
  const double a = std::isfinite(left) ? left : std::min(-50.0, right - 50.0);
  const double b = std::isfinite(right) ? right : std::max(50.0, left + 50.0);
  for (int i = 1; i < 1000; ++i) {
    const double x = a + (b - a) * i / 1000.0;
    const double s2 = sigma2(x);
    const double m = mu(x);
    if (!(s2 > 0.0) || !std::isfinite(s2))
      throw std::invalid_argument("diffusion: sigma2 must be positive on the interior (fails at x = " + fmt(x) + ")");
    if (!std::isfinite(m)) throw std::invalid_argument("diffusion: drift not finite at x = " + fmt(x));
  }
}

std::string LinearDiffusion::describe() const {
  std::string s;
  if (closed_form) {
    s = std::visit(Overloaded{[](const BrownianMotion& b) { return "BrownianMotion(sigma=" + fmt(b.sigma) + ")"; },
                              [](const BrownianWithDrift& b) {
                                return "BrownianWithDrift(mu=" + fmt(b.mu) + ", sigma=" + fmt(b.sigma) + ")";
                              },
                              [](const OrnsteinUhlenbeck& o) { return "OrnsteinUhlenbeck(gamma=" + fmt(o.gamma) + ")"; }},
                   *closed_form);
  } else {
    s = "Diffusion(mu=" + drift.str() + ", sigma2=" + variance.str() + ")";
  }
  auto kind = [](BoundaryKind k) { return k == BoundaryKind::absorbing ? "absorbing" : "natural"; };
  s += " on (" + fmt(left) + ", " + fmt(right) + ") [" + kind(left_kind) + ", " + kind(right_kind) + "]";
  return s;
}

// ---------------------------------------------------------------------------
// Fundamental solutions
// ---------------------------------------------------------------------------

namespace {

using State = FundamentalPair::State;

// u = e^{theta (x - origin)}
class ExpBranch final : public FundamentalPair::Branch {
 public:
  ExpBranch(double theta, double origin, double scale_slope) : theta_(theta), origin_(origin), s_(scale_slope) {}
  State at(double x) const override {
    return {theta_ * (x - origin_), 1.0, theta_, s_ * x};
  }

 private:
  double theta_, origin_, s_;
};

// u = e^{a (x - b0)} - e^{c (x - b0)}, which vanishes at the boundary b0.
// For a left boundary a > c and x > b0; for a right boundary a < c and x < b0.
class TwoExpBranch final : public FundamentalPair::Branch {
 public:
  TwoExpBranch(double a, double c, double boundary, double scale_slope)
      : a_(a), c_(c), b0_(boundary), s_(scale_slope) {}
  State at(double x) const override {
    const double d = x - b0_;
    const double r = std::exp((c_ - a_) * d);
    return {a_ * d, 1.0 - r, a_ - c_ * r, s_ * x};
  }

 private:
  double a_, c_, b0_, s_;
};

struct Node {
  double x, log_scale, u, v, s;
};

// Renormalized RK4 for (u, u', log s') with u'' = 2 (beta u - mu u') / sigma2.
class NumericBranch final : public FundamentalPair::Branch {
 public:
  NumericBranch(const LinearDiffusion& d, double beta, double x_start, double x_end, double u0, double v0,
                double step_fraction)
      : d_(d), beta_(beta) {
    const double dir = x_end > x_start ? 1.0 : -1.0;
    double x = x_start, L = 0.0, u = u0, v = v0, s = 0.0;
    renormalize(L, u, v);
    nodes_.push_back({x, L, u, v, s});
    const std::size_t max_steps = 50'000'000;
    while (dir * (x_end - x) > 0.0) {
      double h = step_fraction / rate_bound(x);
      if (!(h > 0.0) || !std::isfinite(h)) throw std::runtime_error("fundamental solutions: invalid step");
      h = std::min(h, dir * (x_end - x));
      step(x, dir * h, u, v, s);
      x += dir * h;
      if (!std::isfinite(u) || !std::isfinite(v) || !std::isfinite(s))
        throw std::runtime_error("fundamental solutions: numeric integration diverged at x = " + fmt(x));
      renormalize(L, u, v);
      nodes_.push_back({x, L, u, v, s});
      if (nodes_.size() > max_steps) throw std::runtime_error("fundamental solutions: step budget exceeded");
    }
    if (dir < 0.0) std::reverse(nodes_.begin(), nodes_.end());
  }

  State at(double x) const override { return at_near(x, x); }

  State at_near(double x, double anchor) const override {
    if (x < nodes_.front().x - 1e-12 || x > nodes_.back().x + 1e-12)
      throw std::out_of_range("fundamental solutions: x = " + fmt(x) + " outside the integrated range [" +
                              fmt(nodes_.front().x) + ", " + fmt(nodes_.back().x) + "]");
    auto it = std::lower_bound(nodes_.begin(), nodes_.end(), anchor, [](const Node& n, double v) { return n.x < v; });
    if (it == nodes_.end()) --it;
    if (it != nodes_.begin() && std::abs(std::prev(it)->x - anchor) < std::abs(it->x - anchor)) --it;
    double u = it->u, v = it->v, s = it->s;
    const double h = x - it->x;
    if (h != 0.0) step(it->x, h, u, v, s);
    return {it->log_scale, u, v, s};
  }

  double first() const { return nodes_.front().x; }
  double last() const { return nodes_.back().x; }

 private:
  double rate_bound(double x) const {
    const double s2 = d_.sigma2(x);
    const double b = 2.0 * d_.mu(x) / s2;
    const double c = 2.0 * beta_ / s2;
    return 0.5 * (std::abs(b) + std::sqrt(b * b + 4.0 * c));
  }

  void rhs(double x, double u, double v, double& du, double& dv, double& ds) const {
    const double s2 = d_.sigma2(x);
    const double m = d_.mu(x);
    du = v;
    dv = 2.0 * (beta_ * u - m * v) / s2;
    ds = -2.0 * m / s2;
  }

  void step(double x, double h, double& u, double& v, double& s) const {
    double ku[4], kv[4], ks[4];
    rhs(x, u, v, ku[0], kv[0], ks[0]);
    rhs(x + 0.5 * h, u + 0.5 * h * ku[0], v + 0.5 * h * kv[0], ku[1], kv[1], ks[1]);
    rhs(x + 0.5 * h, u + 0.5 * h * ku[1], v + 0.5 * h * kv[1], ku[2], kv[2], ks[2]);
    rhs(x + h, u + h * ku[2], v + h * kv[2], ku[3], kv[3], ks[3]);
    u += h / 6.0 * (ku[0] + 2.0 * ku[1] + 2.0 * ku[2] + ku[3]);
    v += h / 6.0 * (kv[0] + 2.0 * kv[1] + 2.0 * kv[2] + kv[3]);
    s += h / 6.0 * (ks[0] + 2.0 * ks[1] + 2.0 * ks[2] + ks[3]);
  }

  static void renormalize(double& L, double& u, double& v) {
    const double m = std::max(std::abs(u), std::abs(v));
    if (m > 0.0) {
      L += std::log(m);
      u /= m;
      v /= m;
    }
  }

  LinearDiffusion d_;
  double beta_;
  std::vector<Node> nodes_;
};

// Numeric phi carries no scale density; take it from the psi branch.
class PhiWithScale final : public FundamentalPair::Branch {
 public:
  PhiWithScale(std::shared_ptr<const NumericBranch> phi, std::shared_ptr<const NumericBranch> psi)
      : phi_(std::move(phi)), psi_(std::move(psi)) {}
  State at(double x) const override {
    State st = phi_->at(x);
    st.log_scale_density = psi_->at(x).log_scale_density;
    return st;
  }
  State at_near(double x, double anchor) const override { return phi_->at_near(x, anchor); }

 private:
  std::shared_ptr<const NumericBranch> phi_, psi_;
};

double log_wronskian_at(const State& p, const State& f) {
  const double w = p.slope * f.value - p.value * f.slope;
  if (!(w > 0.0)) throw std::runtime_error("fundamental solutions: non-positive Wronskian");
  return p.log_scale + f.log_scale + std::log(w) - p.log_scale_density;
}

}  // namespace

FundamentalPair::FundamentalPair(std::shared_ptr<const Branch> psi, std::shared_ptr<const Branch> phi,
                                 const LinearDiffusion& d, double beta, bool closed_form, double lo, double hi)
    : psi_(std::move(psi)), phi_(std::move(phi)), diffusion_(d), beta_(beta), closed_form_(closed_form), lo_(lo),
      hi_(hi) {
  // Fix the free constants of psi, phi and s' at a central point so that
  // u, m and w stay representable over the whole region.
  double c = (lo_ <= 0.0 && 0.0 <= hi_) ? 0.0 : 0.5 * (lo_ + hi_);
  if (std::isfinite(d.left) && d.left_kind == BoundaryKind::absorbing && c <= d.left)
    c = 0.5 * (std::max(lo_, d.left) + hi_);
  const State p = psi_->at(c);
  const State f = phi_->at(c);
  scale_offset_ = p.log_scale_density;
  psi_offset_ = p.log_scale + std::log(p.value);
  phi_offset_ = f.log_scale + std::log(f.value);

  const int n = 21;
  std::vector<double> logs;
  for (int i = 0; i < n; ++i) {
    const double x = lo_ + (hi_ - lo_) * i / (n - 1);
    logs.push_back(log_wronskian_at(psi_state(x), phi_state(x)));
  }
  log_wronskian_ = logs[n / 2];
  for (double l : logs) wronskian_spread_ = std::max(wronskian_spread_, std::abs(std::expm1(l - log_wronskian_)));
}

FundamentalPair::State FundamentalPair::psi_state(double x) const {
  State s = psi_->at(x);
  s.log_scale -= psi_offset_;
  s.log_scale_density -= scale_offset_;
  return s;
}

FundamentalPair::State FundamentalPair::phi_state(double x) const {
  State s = phi_->at(x);
  s.log_scale -= phi_offset_;
  s.log_scale_density -= scale_offset_;
  return s;
}

double FundamentalPair::psi(double x) const {
  const auto s = psi_state(x);
  return std::exp(s.log_scale) * s.value;
}
double FundamentalPair::phi(double x) const {
  const auto s = phi_state(x);
  return std::exp(s.log_scale) * s.value;
}
double FundamentalPair::psi_prime(double x) const {
  const auto s = psi_state(x);
  return std::exp(s.log_scale) * s.slope;
}
double FundamentalPair::phi_prime(double x) const {
  const auto s = phi_state(x);
  return std::exp(s.log_scale) * s.slope;
}
double FundamentalPair::log_psi(double x) const {
  const auto s = psi_state(x);
  return s.log_scale + std::log(s.value);
}
double FundamentalPair::log_phi(double x) const {
  const auto s = phi_state(x);
  return s.log_scale + std::log(s.value);
}

double FundamentalPair::log_scale_density(double x) const { return psi_->at(x).log_scale_density - scale_offset_; }

double FundamentalPair::log_speed_density(double x) const {
  return std::log(2.0 / diffusion_.sigma2(x)) - log_scale_density(x);
}

double FundamentalPair::speed_density(double x) const { return std::exp(log_speed_density(x)); }

double FundamentalPair::max_ode_residual(const std::vector<double>& grid, bool use_psi) const {
  if (grid.empty()) return 0.0;
  const Branch& b = use_psi ? *psi_ : *phi_;
  const double mid = grid[grid.size() / 2];
  const State ref = b.at(mid);
  double worst = 0.0;
  for (double x : grid) {
    const double h = 1e-4 * std::min(1.0, diffusion_.local_scale(beta_, x));
    auto st = [&](double y) { return b.at_near(y, x); };
    auto norm = [&](const State& s, double w) { return std::exp(s.log_scale - ref.log_scale) * w / ref.value; };
    const State c = st(x);
    const double u = norm(c, c.value);
    const double du = norm(c, c.slope);
    double d2 = 0.0;
    const double w[4] = {-2.0, -1.0, 1.0, 2.0};
    const double k[4] = {1.0, -8.0, 8.0, -1.0};
    for (int i = 0; i < 4; ++i) {
      const State s = st(x + w[i] * h);
      d2 += k[i] * norm(s, s.slope);
    }
    d2 /= 12.0 * h;
    const double r = std::abs(0.5 * diffusion_.sigma2(x) * d2 + diffusion_.mu(x) * du - beta_ * u);
    worst = std::max(worst, r / (1.0 + std::abs(u)));
  }
  return worst;
}

FundamentalPair fundamental_pair(const LinearDiffusion& d, double beta, const PairOptions& options) {
  if (!(beta > 0.0) || !std::isfinite(beta)) throw std::invalid_argument("fundamental_pair: beta must be > 0");
  if (!(options.lo < options.hi)) throw std::invalid_argument("fundamental_pair: empty region");
  const double lo = std::max(options.lo, d.left);
  const double hi = std::min(options.hi, d.right);
  if (!(lo < hi)) throw std::invalid_argument("fundamental_pair: region outside the state interval");

  const bool constant_coefficients =
      d.closed_form && !std::holds_alternative<OrnsteinUhlenbeck>(*d.closed_form);
  if (constant_coefficients) {
    const double mu = d.mu(0.0);
    const double sigma = std::sqrt(d.sigma2(0.0));
    const auto [tm, tp] = constant_coefficient_roots(mu, sigma, beta);
    const double scale_slope = -2.0 * mu / (sigma * sigma);
    std::shared_ptr<const FundamentalPair::Branch> psi, phi;
    if (d.left_kind == BoundaryKind::absorbing && std::isfinite(d.left))
      psi = std::make_shared<TwoExpBranch>(tp, tm, d.left, scale_slope);
    else
      psi = std::make_shared<ExpBranch>(tp, 0.0, scale_slope);
    if (d.right_kind == BoundaryKind::absorbing && std::isfinite(d.right))
      phi = std::make_shared<TwoExpBranch>(tm, tp, d.right, scale_slope);
    else
      phi = std::make_shared<ExpBranch>(tm, 0.0, scale_slope);
    return FundamentalPair(psi, phi, d, beta, true, lo, hi);
  }

  auto start_slopes = [&](double x) {
    const double s2 = d.sigma2(x);
    const double b = 2.0 * d.mu(x) / s2;
    const double c = 2.0 * beta / s2;
    const double disc = std::sqrt(b * b + 4.0 * c);
    return std::pair{(-b - disc) / 2.0, (-b + disc) / 2.0};
  };

  double psi_start, psi_u, psi_v;
  if (std::isfinite(d.left) && d.left_kind == BoundaryKind::absorbing) {
    psi_start = d.left;
    psi_u = 0.0;
    psi_v = 1.0;
  } else {
    psi_start = lo - options.burn_in_scales * d.local_scale(beta, lo);
    if (std::isfinite(d.left)) psi_start = std::max(psi_start, d.left + 1e-6 * (lo - d.left));
    psi_u = 1.0;
    psi_v = start_slopes(psi_start).second;
  }
  double phi_start, phi_u, phi_v;
  if (std::isfinite(d.right) && d.right_kind == BoundaryKind::absorbing) {
    phi_start = d.right;
    phi_u = 0.0;
    phi_v = -1.0;
  } else {
    phi_start = hi + options.burn_in_scales * d.local_scale(beta, hi);
    if (std::isfinite(d.right)) phi_start = std::min(phi_start, d.right - 1e-6 * (d.right - hi));
    phi_u = 1.0;
    phi_v = start_slopes(phi_start).first;
  }
  const double psi_end = std::min(phi_start, d.right);
  const double phi_end = std::max(psi_start, d.left);

  auto psi = std::make_shared<NumericBranch>(d, beta, psi_start, psi_end, psi_u, psi_v, options.step_fraction);
  auto phi = std::make_shared<NumericBranch>(d, beta, phi_start, phi_end, phi_u, phi_v, options.step_fraction);
  return FundamentalPair(psi, std::make_shared<PhiWithScale>(phi, psi), d, beta, false, lo, hi);
}

double hitting_transform(const FundamentalPair& fp, double x, double y) {
  if (x == y) return 1.0;
  const auto a = x < y ? fp.psi_state(x) : fp.phi_state(x);
  const auto b = x < y ? fp.psi_state(y) : fp.phi_state(y);
  return std::exp(a.log_scale - b.log_scale) * a.value / b.value;
}

double resolvent_kernel(const FundamentalPair& fp, const LinearDiffusion&, double x, double y) {
  const auto p = fp.psi_state(std::min(x, y));
  const auto f = fp.phi_state(std::max(x, y));
  return std::exp(p.log_scale + f.log_scale - fp.log_wronskian()) * p.value * f.value;
}

double resolvent_density(const FundamentalPair& fp, double x, double y) {
  const auto p = fp.psi_state(std::min(x, y));
  const auto f = fp.phi_state(std::max(x, y));
  return std::exp(p.log_scale + f.log_scale - fp.log_wronskian() + fp.log_speed_density(y)) * p.value * f.value;
}

// ---------------------------------------------------------------------------
// Lévy models
// ---------------------------------------------------------------------------

LevyModel LevyModel::brownian_with_drift(double mu, double sigma) {
  LevyModel l;
  l.kind = Kind::brownian_with_drift;
  l.mu = mu;
  l.sigma = sigma;
  l.validate();
  return l;
}

LevyModel LevyModel::jump_diffusion(double mu, double sigma, JumpSide side, double jump_rate, double jump_decay) {
  LevyModel l;
  l.kind = Kind::one_sided_jump_diffusion;
  l.mu = mu;
  l.sigma = sigma;
  l.jump_side = side;
  l.jump_rate = jump_rate;
  l.jump_decay = jump_decay;
  l.validate();
  return l;
}

void LevyModel::validate() const {
  if (!std::isfinite(mu)) throw std::invalid_argument("levy: mu must be finite");
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw std::invalid_argument("levy: sigma must be > 0");
  if (kind == Kind::one_sided_jump_diffusion) {
    if (!(jump_rate >= 0.0) || !std::isfinite(jump_rate)) throw std::invalid_argument("levy: jump rate must be >= 0");
    if (!(jump_decay > 0.0) || !std::isfinite(jump_decay))
      throw std::invalid_argument("levy: jump decay (1/mean jump size) must be > 0");
  }
}

std::pair<double, double> LevyModel::strip() const {
  if (!has_jumps()) return {-kInf, kInf};
  if (jump_side == JumpSide::positive) return {-kInf, jump_decay};
  return {-jump_decay, kInf};
}

double LevyModel::laplace_exponent(double theta) const { return laplace_exponent_derivative(theta, 0); }

double LevyModel::laplace_exponent_derivative(double theta, int order) const {
  if (order < 0) throw std::invalid_argument("laplace exponent: negative derivative order");
  const auto [a, b] = strip();
  if (!(theta > a && theta < b))
    throw std::domain_error("laplace exponent: theta = " + fmt(theta) + " outside the strip of finiteness");
  return rational_exponent(theta, order);
}

double LevyModel::rational_exponent(double theta, int order) const {
  double r = 0.0;
  if (order == 0) r = mu * theta + 0.5 * sigma * sigma * theta * theta;
  if (order == 1) r = mu + sigma * sigma * theta;
  if (order == 2) r = sigma * sigma;
  if (has_jumps()) {
    const double s = jump_side == JumpSide::positive ? 1.0 : -1.0;
    const double eta = jump_decay;
    const double gap = eta - s * theta;
    if (order == 0) {
      r += jump_rate * (eta / gap - 1.0);
    } else {
      double f = 1.0;
      for (int k = 2; k <= order; ++k) f *= k;
      r += jump_rate * eta * f * std::pow(s, order) / std::pow(gap, order + 1);
    }
  }
  return r;
}

namespace {

// Sign-change scan over sorted points followed by bracketed refinement.
std::vector<double> roots_on(const LevyModel& l, double beta, std::vector<double> pts) {
  std::sort(pts.begin(), pts.end());
  std::vector<double> roots;
  auto f = [&](double t) { return l.rational_exponent(t, 0) - beta; };
  auto df = [&](double t) { return l.rational_exponent(t, 1); };
  double prev_t = pts.front(), prev_f = f(prev_t);
  for (std::size_t i = 1; i < pts.size(); ++i) {
    const double t = pts[i], ft = f(t);
    if (ft == 0.0) {
      roots.push_back(t);
    } else if (prev_f != 0.0 && (prev_f < 0.0) != (ft < 0.0)) {
      roots.push_back(bracketed_root(f, df, prev_t, t, 1e-12 * std::max(1.0, std::abs(t))));
    }
    prev_t = t;
    prev_f = ft;
  }
  return roots;
}

std::vector<double> log_grid(double from_exp, double to_exp, double step) {
  std::vector<double> g;
  for (double e = from_exp; e <= to_exp + 1e-12; e += step) g.push_back(std::pow(10.0, e));
  return g;
}

}  // namespace

std::vector<double> LevyModel::cramer_lundberg_roots(double beta) const {
  if (!(beta > 0.0)) throw std::invalid_argument("cramer_lundberg_roots: beta must be > 0");
  validate();
  if (has_negative_jumps()) {
    auto r = mirrored().cramer_lundberg_roots(beta);
    for (double& t : r) t = -t;
    std::reverse(r.begin(), r.end());
    return r;
  }
  if (!has_jumps()) {
    const auto [tm, tp] = constant_coefficient_roots(mu, sigma, beta);
    return {tm, tp};
  }
  const double eta = jump_decay;
  const auto g = log_grid(-10.0, 10.0, 0.05);
  std::vector<double> neg, low, high;
  for (double t : g) {
    neg.push_back(-t);
    if (t < 1.0) {
      low.push_back(eta * t);
      low.push_back(eta * (1.0 - t));
      high.push_back(eta * (1.0 + t));
    } else {
      high.push_back(eta * (1.0 + t));
    }
  }
  neg.push_back(0.0);
  low.push_back(0.0);
  auto r = roots_on(*this, beta, neg);
  for (double t : roots_on(*this, beta, low)) r.push_back(t);
  for (double t : roots_on(*this, beta, high)) r.push_back(t);
  std::sort(r.begin(), r.end());
  r.erase(std::unique(r.begin(), r.end(), [](double a, double b) { return std::abs(a - b) < 1e-10; }), r.end());
  const auto npos = std::count_if(r.begin(), r.end(), [](double t) { return t > 0.0; });
  const auto nneg = std::count_if(r.begin(), r.end(), [](double t) { return t < 0.0; });
  if (npos != 2 || nneg != 1 || !(r[1] < eta && r[2] > eta))
    throw std::runtime_error("cramer_lundberg_roots: root structure does not match the jump-diffusion kind (" +
                             std::to_string(npos) + " positive, " + std::to_string(nneg) + " negative)");
  return r;
}

LevyModel LevyModel::mirrored() const {
  LevyModel m = *this;
  m.mu = -mu;
  m.jump_side = jump_side == JumpSide::positive ? JumpSide::negative : JumpSide::positive;
  return m;
}

std::string LevyModel::describe() const {
  if (!has_jumps()) return "Levy BrownianWithDrift(mu=" + fmt(mu) + ", sigma=" + fmt(sigma) + ")";
  return "Levy JumpDiffusion(mu=" + fmt(mu) + ", sigma=" + fmt(sigma) + ", jumps=" +
         (jump_side == JumpSide::positive ? "positive" : "negative") + ", rate=" + fmt(jump_rate) +
         ", eta=" + fmt(jump_decay) + ")";
}

// ---------------------------------------------------------------------------
// ExtremeLaw
// ---------------------------------------------------------------------------

double ExtremeLaw::cdf(double y) const {
  if (which == Which::max_at_T) {
    if (y < 0.0) return 0.0;
    double s = atom;
    for (std::size_t i = 0; i < rates.size(); ++i) s += weights[i] * -std::expm1(-rates[i] * y);
    return s;
  }
  if (y >= 0.0) return 1.0;
  double s = 0.0;
  for (std::size_t i = 0; i < rates.size(); ++i) s += weights[i] * std::exp(rates[i] * y);
  return s;
}

double ExtremeLaw::pdf(double y) const {
  const double z = sign() * y;
  if (z < 0.0) return 0.0;
  double s = 0.0;
  for (std::size_t i = 0; i < rates.size(); ++i) s += weights[i] * rates[i] * std::exp(-rates[i] * z);
  return s;
}

double ExtremeLaw::moment(int k) const {
  if (k == 0) return 1.0;
  double s = 0.0;
  for (std::size_t i = 0; i < rates.size(); ++i) {
    double m = 1.0;
    for (int j = 1; j <= k; ++j) m *= j / rates[i];
    s += weights[i] * m;
  }
  return (k % 2 == 1) ? sign() * s : s;
}

double ExtremeLaw::mgf(double a) const {
  double s = atom;
  for (std::size_t i = 0; i < rates.size(); ++i) {
    const double gap = rates[i] - sign() * a;
    if (!(gap > 0.0)) throw std::domain_error("extreme law: exponential moment of order " + fmt(a) + " diverges");
    s += weights[i] * rates[i] / gap;
  }
  return s;
}

double ExtremeLaw::sample(std::mt19937_64& rng) const {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  double u = unif(rng);
  if (u < atom) return 0.0;
  u -= atom;
  std::size_t i = 0;
  while (i + 1 < weights.size() && u >= weights[i]) u -= weights[i++];
  std::exponential_distribution<double> e(rates[i]);
  return sign() * e(rng);
}

ExtremeLaw ExtremeLaw::negated() const {
  ExtremeLaw n = *this;
  n.which = which == Which::max_at_T ? Which::min_at_T : Which::max_at_T;
  return n;
}

void ExtremeLaw::validate() const {
  if (weights.size() != rates.size() || rates.empty()) throw std::logic_error("extreme law: malformed mixture");
  double total = atom;
  for (std::size_t i = 0; i < rates.size(); ++i) {
    if (!(rates[i] > 0.0)) throw std::logic_error("extreme law: non-positive rate");
    if (!(weights[i] >= 0.0)) throw std::logic_error("extreme law: negative weight");
    total += weights[i];
  }
  if (atom < 0.0 || std::abs(total - 1.0) > 1e-12) throw std::logic_error("extreme law: weights do not sum to 1");
}

std::pair<ExtremeLaw, ExtremeLaw> wh_factor_laws(const LevyModel& l, double beta) {
  if (l.has_negative_jumps()) {
    auto [m, i] = wh_factor_laws(l.mirrored(), beta);
    return {i.negated(), m.negated()};
  }
  const auto r = l.cramer_lundberg_roots(beta);
  ExtremeLaw max_law, min_law;
  max_law.which = ExtremeLaw::Which::max_at_T;
  min_law.which = ExtremeLaw::Which::min_at_T;
  if (!l.has_jumps()) {
    max_law.weights = {1.0};
    max_law.rates = {r[1]};
    min_law.weights = {1.0};
    min_law.rates = {-r[0]};
  } else {
    const double t3 = r[0], t1 = r[1], t2 = r[2], eta = l.jump_decay;
    const double a = t2 * (eta - t1) / (eta * (t2 - t1));
    max_law.weights = {a, 1.0 - a};
    max_law.rates = {t1, t2};
    min_law.weights = {1.0};
    min_law.rates = {-t3};
  }
  max_law.validate();
  min_law.validate();
  return {max_law, min_law};
}

// ---------------------------------------------------------------------------
// FiniteCTMC
// ---------------------------------------------------------------------------

FiniteCTMC FiniteCTMC::from_transitions(int n_states, const std::vector<std::tuple<int, int, double>>& transitions,
                                        std::vector<std::string> labels) {
  if (n_states <= 0) throw std::invalid_argument("ctmc: need at least one state");
  FiniteCTMC c;
  c.rates = Eigen::MatrixXd::Zero(n_states, n_states);
  for (const auto& [from, to, rate] : transitions) {
    if (from < 0 || from >= n_states || to < 0 || to >= n_states)
      throw std::invalid_argument("ctmc: transition references unknown state");
    if (from == to) throw std::invalid_argument("ctmc: self-transition");
    if (!(rate >= 0.0) || !std::isfinite(rate)) throw std::invalid_argument("ctmc: rates must be >= 0");
    c.rates(from, to) += rate;
  }
  for (int i = 0; i < n_states; ++i) c.rates(i, i) = -(c.rates.row(i).sum() - c.rates(i, i));
  if (labels.empty())
    for (int i = 0; i < n_states; ++i) labels.push_back(std::to_string(i + 1));
  if (static_cast<int>(labels.size()) != n_states) throw std::invalid_argument("ctmc: label count mismatch");
  c.labels = std::move(labels);
  c.validate();
  return c;
}

bool FiniteCTMC::is_absorbing(int i) const { return rates.row(i).cwiseAbs().maxCoeff() == 0.0; }

int FiniteCTMC::index_of(const std::string& label) const {
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] == label) return static_cast<int>(i);
  throw std::invalid_argument("ctmc: unknown state '" + label + "'");
}

void FiniteCTMC::validate() const {
  if (rates.rows() != rates.cols() || rates.rows() == 0) throw std::invalid_argument("ctmc: rate matrix not square");
  for (int i = 0; i < n_states(); ++i) {
    if (rates(i, i) > 0.0) throw std::invalid_argument("ctmc: positive diagonal");
    for (int j = 0; j < n_states(); ++j)
      if (i != j && rates(i, j) < 0.0) throw std::invalid_argument("ctmc: negative off-diagonal rate");
    if (std::abs(rates.row(i).sum()) > 1e-12) throw std::invalid_argument("ctmc: row does not sum to 0");
  }
}

std::string describe(const ProcessModel& p) {
  return std::visit(Overloaded{[](const LinearDiffusion& d) { return d.describe(); },
                               [](const LevyModel& l) { return l.describe(); },
                               [](const FiniteCTMC& c) { return "FiniteCTMC(" + std::to_string(c.n_states()) + " states)"; }},
                    p);
}

}  // namespace osp
