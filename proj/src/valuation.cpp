#include "osp/valuation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "osp/numerics.hpp"

namespace osp {

std::string to_string(Route r) {
  switch (r) {
    case Route::max_law:
      return "max_law";
    case Route::hitting:
      return "hitting";
    case Route::representing_measure:
      return "representing_measure";
  }
  return "max_law";
}

double ContinuousSetup::domain_left() const {
  if (const auto* d = std::get_if<LinearDiffusion>(&process)) return d->left;
  return -kInf;
}

double relative_spread(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-12});
}

namespace {

std::vector<double> breakpoints_with(const std::vector<double>& kinks, double extra) {
  std::vector<double> b = kinks;
  b.push_back(extra);
  return b;
}

double tail_step(const ExtremeLaw& law) {
  double r = kInf;
  for (double x : law.rates) r = std::min(r, x);
  return 1.0 / r;
}

// Density of M_T + I_T (independent), continuous part.
double sum_density(const ExtremeLaw& m, const ExtremeLaw& i, double u) {
  double p = 0.0;
  for (std::size_t a = 0; a < m.rates.size(); ++a) {
    for (std::size_t b = 0; b < i.rates.size(); ++b) {
      const double ra = m.rates[a], rb = i.rates[b];
      const double c = m.weights[a] * i.weights[b] * ra * rb / (ra + rb);
      p += c * (u >= 0.0 ? std::exp(-ra * u) : std::exp(rb * u));
    }
  }
  if (m.atom > 0.0 && u < 0.0) p += m.atom * i.pdf(u);
  if (i.atom > 0.0 && u > 0.0) p += i.atom * m.pdf(u);
  return p;
}

}  // namespace

double value_max_law(const ContinuousSetup& s, const ThresholdSolution& sol, double x) {
  if (sol.side != Side::right) throw std::invalid_argument("value_max_law: expects a right-sided solution");
  const double xs = sol.x_star;
  if (s.is_diffusion()) {
    const auto& fp = *s.pair;
    const auto& d = std::get<LinearDiffusion>(s.process);
    if (d.left_kind == BoundaryKind::absorbing && x <= d.left) return 0.0;
    const auto px = fp.psi_state(x);
    const double log_psi_x = px.log_scale + std::log(px.value);
    const double start = std::max(x, xs);
    auto density = [&](double z) {
      const auto pz = fp.psi_state(z);
      return std::exp(log_psi_x + pz.log_scale + std::log(pz.slope) - 2.0 * (pz.log_scale + std::log(pz.value)));
    };
    auto integrand = [&](double z) { return sol.f_hat(z) * density(z); };
    return integrate_tail(integrand, start, s.scale, s.right_limit, s.kinks, s.rel_tol, s.tail_rel).value;
  }
  const auto& law = *s.max_law;
  double v = 0.0;
  if (law.atom > 0.0 && x >= xs) v += law.atom * sol.f_hat(x);
  const double start = std::max(0.0, xs - x);
  const double step = tail_step(law);
  auto integrand = [&](double m) { return sol.f_hat(x + m) * law.pdf(m); };
  v += integrate_tail(integrand, start, step, start + 2000.0 * step, {}, s.rel_tol, s.tail_rel).value;
  return v;
}

std::optional<double> value_hitting(const ContinuousSetup& s, const ThresholdSolution& sol, double x) {
  if (sol.side != Side::right) throw std::invalid_argument("value_hitting: expects a right-sided solution");
  const double xs = sol.x_star;
  if (s.is_diffusion()) {
    if (x >= xs) return s.reward(x);
    return hitting_transform(*s.pair, x, xs) * s.reward(xs);
  }
  const auto& l = std::get<LevyModel>(s.process);
  if (l.has_positive_jumps()) return std::nullopt;
  if (x >= xs) return s.reward(x);
  return (1.0 - s.max_law->cdf(xs - x)) * s.reward(xs);
}

RepresentingMeasure representing_measure(const ContinuousSetup& s, const ThresholdSolution& sol) {
  RepresentingMeasure r;
  const double xs = sol.x_star;
  const int probe = 200;
  double min_density = kInf;
  for (int i = 1; i <= probe; ++i) {
    const double y = xs + 5.0 * s.scale * i / probe;
    min_density = std::min(min_density, s.ftilde(y));
  }
  r.min_density = min_density;
  r.nonnegative = min_density >= -1e-12;
  if (!s.is_diffusion()) return r;

  const auto& fp = *s.pair;
  const auto& d = std::get<LinearDiffusion>(s.process);
  if (d.left_kind == BoundaryKind::absorbing && xs <= d.left) return r;
  const double left = std::max(s.left_limit, d.left);
  const double uxx = resolvent_kernel(fp, d, xs, xs);
  auto integrand = [&](double y) { return resolvent_density(fp, xs, y) / uxx * s.ftilde(y); };
  r.atom = integrate_tail(integrand, xs, s.scale, left, s.kinks, s.rel_tol, s.tail_rel).value;
  // The atom is proportional to Q(x*), which vanishes at an interior root.
  if (r.atom * uxx < -1e-9 * std::max(1.0, std::abs(s.reward(xs)))) r.nonnegative = false;
  return r;
}

std::optional<double> value_representing_measure(const ContinuousSetup& s, const ThresholdSolution& sol, double x) {
  if (sol.side != Side::right)
    throw std::invalid_argument("value_representing_measure: expects a right-sided solution");
  const double xs = sol.x_star;
  if (s.is_diffusion()) {
    const auto& fp = *s.pair;
    const auto& d = std::get<LinearDiffusion>(s.process);
    if (d.left_kind == BoundaryKind::absorbing && x <= d.left) return 0.0;
    const auto rm = representing_measure(s, sol);
    auto integrand = [&](double y) { return resolvent_density(fp, x, y) * s.ftilde(y); };
    const double body =
        integrate_tail(integrand, xs, s.scale, s.right_limit, breakpoints_with(s.kinks, x), s.rel_tol, s.tail_rel)
            .value;
    return body + resolvent_kernel(fp, d, x, xs) * rm.atom;
  }
  const auto& l = std::get<LevyModel>(s.process);
  if (l.has_negative_jumps()) return std::nullopt;
  const auto& m = *s.max_law;
  const auto& i = *s.min_law;
  const double lower = xs - x;
  const double step = std::max(tail_step(m), tail_step(i));
  auto integrand = [&](double u) { return s.ftilde(x + u) * sum_density(m, i, u); };
  const auto body = integrate_tail(integrand, lower, step, lower + 2000.0 * step, std::vector<double>{0.0}, s.rel_tol,
                                   s.tail_rel);
  return body.value / s.beta;
}

ValueFunction::ValueFunction(std::shared_ptr<const ContinuousSetup> setup, ThresholdSolution working, bool mirrored)
    : setup_(std::move(setup)), working_(std::move(working)), mirrored_(mirrored) {}

ValueRow ValueFunction::row(double x) const {
  const double y = mirrored_ ? -x : x;
  ValueRow r;
  r.x = x;
  r.reward = setup_->reward(y);
  r.max_law = value_max_law(*setup_, working_, y);
  r.hitting = value_hitting(*setup_, working_, y);
  r.measure = value_representing_measure(*setup_, working_, y);
  if (r.hitting) r.spread = std::max(r.spread, relative_spread(*r.hitting, r.max_law));
  if (r.measure) r.spread = std::max(r.spread, relative_spread(*r.measure, r.max_law));
  return r;
}

std::vector<ValueRow> ValueFunction::table(const std::vector<double>& xs) const {
  std::vector<ValueRow> rows;
  rows.reserve(xs.size());
  for (double x : xs) rows.push_back(row(x));
  return rows;
}

double ValueFunction::operator()(double x) const { return value_max_law(*setup_, working_, mirrored_ ? -x : x); }

double ValueFunction::fast(double x) const {
  const double y = mirrored_ ? -x : x;
  if (y >= working_.x_star) return setup_->reward(y);
  if (auto h = value_hitting(*setup_, working_, y)) return *h;
  return value_max_law(*setup_, working_, y);
}

}  // namespace osp
