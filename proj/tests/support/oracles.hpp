#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <random>
#include <utility>
#include <vector>

#include "osp/processes.hpp"

namespace oracle {

/// E_i sup_{t <= T} f(X_t) by conditioning on the embedded jump chain:
/// a forward recursion over (state, running max) for at most `jumps` jumps.
/// Mass still moving after the last jump is credited with its running max.
inline std::vector<double> running_max_by_jumps(const osp::FiniteCTMC& c, const std::vector<double>& f, double beta,
                                                int jumps) {
  const int n = c.n_states();
  std::vector<double> out(n, 0.0);
  for (int start = 0; start < n; ++start) {
    std::map<std::pair<int, double>, double> mass{{{start, f[start]}, 1.0}};
    double total = 0.0;
    for (int k = 0; k <= jumps && !mass.empty(); ++k) {
      std::map<std::pair<int, double>, double> next;
      for (const auto& [key, w] : mass) {
        const auto [i, m] = key;
        const double q = c.exit_rate(i);
        const double move = q / (q + beta);
        if (k == jumps) {
          total += w * m;
          continue;
        }
        total += w * (1.0 - move) * m;
        if (q <= 0.0) continue;
        for (int j = 0; j < n; ++j) {
          if (j == i || c.rates(i, j) <= 0.0) continue;
          next[{j, std::max(m, f[j])}] += w * move * c.rates(i, j) / q;
        }
      }
      mass = std::move(next);
    }
    out[start] = total;
  }
  return out;
}

/// Random chain with off-diagonal rates U(0, max_rate).
inline osp::FiniteCTMC random_chain(int n, double max_rate, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, max_rate);
  std::vector<std::tuple<int, int, double>> t;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j) t.emplace_back(i, j, u(rng));
  return osp::FiniteCTMC::from_transitions(n, t);
}

/// Root of a continuous function with a sign change on [lo, hi], by bisection.
inline double bisect(const std::function<double(double)>& f, double lo, double hi) {
  const bool lo_negative = f(lo) < 0.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if ((f(mid) < 0.0) == lo_negative) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

/// Composite Simpson rule with n (even) panels.
inline double simpson(const std::function<double(double)>& f, double a, double b, int n) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int k = 1; k < n; ++k) s += (k % 2 ? 4.0 : 2.0) * f(a + k * h);
  return s * h / 3.0;
}

/// Maximizer of g on [lo, hi]: grid search, then repeated zoom around the
/// best node.
inline double grid_argmax(const std::function<double(double)>& g, double lo, double hi, double tol) {
  while (hi - lo > tol) {
    const int n = 200;
    double best = lo, best_v = -INFINITY;
    for (int k = 0; k <= n; ++k) {
      const double x = lo + (hi - lo) * k / n;
      const double v = g(x);
      if (v > best_v) {
        best_v = v;
        best = x;
      }
    }
    const double h = (hi - lo) / n;
    lo = best - h;
    hi = best + h;
  }
  return 0.5 * (lo + hi);
}

}  // namespace oracle
