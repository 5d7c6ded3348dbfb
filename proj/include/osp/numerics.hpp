#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace osp {

using RealFn = std::function<double(double)>;

struct Integral {
  double value = 0.0;
  double error = 0.0;  // estimated absolute error
};

/// Adaptive 15-point Gauss-Kronrod quadrature on [a, b]; infinite limits
/// are allowed. `rel_tol` is relative to the L1 norm of f on the interval.
Integral integrate(const RealFn& f, double a, double b, double rel_tol = 1e-10);

/// Same, with [a, b] split at the given interior breakpoints (kinks).
Integral integrate(const RealFn& f, double a, double b, std::span<const double> breakpoints,
                   double rel_tol = 1e-10);

/// Integral of f over the region swept from a towards `limit` (either
/// direction, always with the orientation of increasing x), in chunks of
/// width |step|. Stops after a chunk contributes at most tail_rel times the
/// running total (at least `min_chunks` chunks) or at `limit`. The last
/// chunk is added to the error as the truncation bound.
Integral integrate_tail(const RealFn& f, double a, double step, double limit, std::span<const double> breakpoints,
                        double rel_tol = 1e-10, double tail_rel = 1e-15, int min_chunks = 3);

/// Locates the point where `is_positive` switches from false (at lo) to
/// true (at hi) by bisection, to an absolute width of `tol`.
double bisect_transition(const std::function<bool(double)>& is_positive, double lo, double hi,
                         double tol = 1e-12);

/// Bracketed root of a continuous f with f(lo), f(hi) of opposite signs:
/// bisection down to a narrow bracket, then Newton steps kept inside it.
double bracketed_root(const RealFn& f, const RealFn& df, double lo, double hi, double tol = 1e-12);

std::vector<double> linspace(double a, double b, std::size_t n);

/// Pairwise (cascade) summation; the result depends only on the order of
/// the input, not on how the caller produced it.
double pairwise_sum(std::span<const double> values);

}  // namespace osp
