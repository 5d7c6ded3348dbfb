#include "osp/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace osp {

Integral integrate(const RealFn& f, double a, double b, double rel_tol) {
  if (a == b) return {};
  if (a > b) {
    auto r = integrate(f, b, a, rel_tol);
    return {-r.value, r.error};
  }
  double error = 0.0;
  // On intervals this narrow one Kronrod rule is exact to rounding, and the
  // rounding-level error estimate would otherwise drive full recursion.
  const unsigned depth = (b - a) <= 1e-6 * std::max({1.0, std::abs(a), std::abs(b)}) ? 0 : 15;
  double value = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, a, b, depth, rel_tol, &error);
  if (!std::isfinite(value)) throw std::runtime_error("quadrature produced a non-finite value");
  return {value, error};
}

Integral integrate(const RealFn& f, double a, double b, std::span<const double> breakpoints, double rel_tol) {
  std::vector<double> cuts{a};
  for (double k : breakpoints)
    if (k > a && k < b) cuts.push_back(k);
  cuts.push_back(b);
  std::sort(cuts.begin() + 1, cuts.end() - 1);
  Integral total;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    auto part = integrate(f, cuts[i], cuts[i + 1], rel_tol);
    total.value += part.value;
    total.error += part.error;
  }
  return total;
}

Integral integrate_tail(const RealFn& f, double a, double step, double limit, std::span<const double> breakpoints,
                        double rel_tol, double tail_rel, int min_chunks) {
  if (step == 0.0) throw std::invalid_argument("integrate_tail: zero step");
  const double dir = limit >= a ? 1.0 : -1.0;
  const double h = std::abs(step);
  Integral total;
  double x = a;
  for (int k = 0; dir * (limit - x) > 0.0; ++k) {
    const double next = dir > 0 ? std::min(x + h, limit) : std::max(x - h, limit);
    const auto part = integrate(f, std::min(x, next), std::max(x, next), breakpoints, rel_tol);
    total.value += part.value;
    total.error += part.error;
    x = next;
    if (k + 1 >= min_chunks && std::abs(part.value) <= tail_rel * std::abs(total.value)) {
      total.error += std::abs(part.value);
      break;
    }
  }
  return total;
}

double bisect_transition(const std::function<bool(double)>& is_positive, double lo, double hi, double tol) {
  for (int it = 0; it < 400 && hi - lo > tol; ++it) {
    double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (is_positive(mid)) hi = mid;
    else lo = mid;
  }
  return 0.5 * (lo + hi);
}

double bracketed_root(const RealFn& f, const RealFn& df, double lo, double hi, double tol) {
  double flo = f(lo), fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if (std::signbit(flo) == std::signbit(fhi)) throw std::runtime_error("bracketed_root: no sign change");
  const bool lo_negative = flo < 0.0;
  // Coarse bisection first, so Newton starts in its basin.
  for (int it = 0; it < 400 && hi - lo > 1e-6 * std::max(1.0, std::fabs(lo)); ++it) {
    double mid = 0.5 * (lo + hi);
    double fm = f(mid);
    if (fm == 0.0) return mid;
    if ((fm < 0.0) == lo_negative) lo = mid;
    else hi = mid;
  }
  double x = 0.5 * (lo + hi);
  for (int it = 0; it < 100; ++it) {
    double fx = f(x);
    if (fx == 0.0) return x;
    if ((fx < 0.0) == lo_negative) lo = x;
    else hi = x;
    double d = df(x);
    double next = (d != 0.0 && std::isfinite(d)) ? x - fx / d : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::fabs(next - x) <= tol * std::max(1.0, std::fabs(x))) return next;
    x = next;
  }
  return x;
}

std::vector<double> linspace(double a, double b, std::size_t n) {
  std::vector<double> v(n);
  if (n == 1) {
    v[0] = a;
    return v;
  }
  for (std::size_t i = 0; i < n; ++i) v[i] = (i + 1 == n) ? b : a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
  return v;
}

double pairwise_sum(std::span<const double> values) {
  if (values.size() <= 8) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  auto half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

}  // namespace osp
