#include "osp/ctmc_solver.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <Eigen/LU>

namespace osp {

namespace {

// Distinct levels of f (ties merged), ascending.
std::vector<double> levels_of(std::span<const double> f) {
  std::vector<double> v(f.begin(), f.end());
  std::sort(v.begin(), v.end());
  std::vector<double> out;
  for (double x : v)
    if (out.empty() || x - out.back() > kLevelTieTolerance) out.push_back(x);
  return out;
}

double sup_norm_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

std::vector<double> hitting_probability(const FiniteCTMC& c, const std::vector<bool>& in_set, double beta) {
  const int n = c.n_states();
  std::vector<int> outside;
  for (int i = 0; i < n; ++i)
    if (!in_set[i]) outside.push_back(i);
  std::vector<double> h(n, 1.0);
  if (outside.empty()) return h;
  const int m = static_cast<int>(outside.size());
  Eigen::MatrixXd a(m, m);
  Eigen::VectorXd rhs(m);
  for (int r = 0; r < m; ++r) {
    const int i = outside[r];
    double s = 0.0;
    for (int j = 0; j < n; ++j)
      if (in_set[j]) s += c.rates(i, j);
    rhs(r) = s;
    for (int k = 0; k < m; ++k) a(r, k) = (r == k ? beta : 0.0) - c.rates(i, outside[k]);
  }
  const Eigen::VectorXd x = a.partialPivLu().solve(rhs);
  if (!x.allFinite()) throw std::runtime_error("hitting system is singular");
  for (int r = 0; r < m; ++r) h[outside[r]] = x(r);
  return h;
}

std::vector<double> running_max_expectation(const FiniteCTMC& c, std::span<const double> f, double beta) {
  if (!(beta > 0.0)) throw std::invalid_argument("running_max_expectation: beta must be > 0");
  if (static_cast<int>(f.size()) != c.n_states())
    throw std::invalid_argument("running_max_expectation: vector length does not match the state count");
  const auto lv = levels_of(f);
  std::vector<double> u(f.size(), lv.front());
  for (std::size_t k = 1; k < lv.size(); ++k) {
    std::vector<bool> in(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) in[i] = f[i] >= lv[k] - kLevelTieTolerance;
    const auto h = hitting_probability(c, in, beta);
    for (std::size_t i = 0; i < f.size(); ++i) u[i] += (lv[k] - lv[k - 1]) * h[i];
  }
  return u;
}

namespace {

// With the level order of f fixed, U is linear: U(f) = M f. Solves M f = G
// and accepts the result if it keeps that order.
std::optional<std::vector<double>> polish(const FiniteCTMC& c, const std::vector<double>& f,
                                          const std::vector<double>& G, double beta) {
  const int n = c.n_states();
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) { return f[a] < f[b]; });
  for (int k = 0; k + 1 < n; ++k)
    if (f[order[k + 1]] - f[order[k]] <= 1e-9) return std::nullopt;
  // h[k] = P(hit {order[k..]} before T); h[0] = 1.
  std::vector<std::vector<double>> h(n + 1, std::vector<double>(n, 0.0));
  h[0].assign(n, 1.0);
  for (int k = 1; k < n; ++k) {
    std::vector<bool> in(n, false);
    for (int j = k; j < n; ++j) in[order[j]] = true;
    h[k] = hitting_probability(c, in, beta);
  }
  Eigen::MatrixXd m(n, n);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) m(i, order[k]) = h[k][i] - h[k + 1][i];
  Eigen::VectorXd g(n);
  for (int i = 0; i < n; ++i) g(i) = G[i];
  const Eigen::VectorXd x = m.fullPivLu().solve(g);
  if (!x.allFinite()) return std::nullopt;
  std::vector<double> out(x.data(), x.data() + n);
  for (int k = 0; k + 1 < n; ++k)
    if (!(out[order[k]] < out[order[k + 1]])) return std::nullopt;
  return out;
}

}  // namespace

ChainSolution invert_representation(const FiniteCTMC& c, const std::vector<double>& G, double beta,
                                    const ChainOptions& o) {
  const int n = c.n_states();
  if (static_cast<int>(G.size()) != n) throw std::invalid_argument("invert_representation: dimension mismatch");
  if (!(o.damping > 0.0 && o.damping <= 1.0)) throw std::invalid_argument("invert_representation: damping in (0, 1]");
  const double gmax = *std::max_element(G.begin(), G.end());
  std::vector<bool> pinned(n);
  for (int i = 0; i < n; ++i) pinned[i] = G[i] == gmax;

  ChainSolution s;
  std::vector<double> f = G;
  auto u = running_max_expectation(c, f, beta);
  s.residual = sup_norm_diff(u, G);
  s.residual_history.push_back(s.residual);
  while (s.residual > o.residual_tol && s.iterations < o.max_iterations) {
    for (int i = 0; i < n; ++i)
      if (!pinned[i]) f[i] += o.damping * (G[i] - u[i]);
    u = running_max_expectation(c, f, beta);
    s.residual = sup_norm_diff(u, G);
    ++s.iterations;
    if (s.iterations % 100 == 0) s.residual_history.push_back(s.residual);
    // Once the level order has settled, finish with the exact linear solve.
    if (s.residual < 1e-6) {
      if (auto p = polish(c, f, G, beta)) {
        const auto up = running_max_expectation(c, *p, beta);
        const double rp = sup_norm_diff(up, G);
        if (rp < s.residual) {
          f = *p;
          u = up;
          s.residual = rp;
          s.polished = true;
        }
      }
    }
  }
  if (s.residual_history.back() != s.residual) s.residual_history.push_back(s.residual);
  if (s.residual > o.residual_tol) {
    std::string hist;
    for (double r : s.residual_history) hist += " " + std::to_string(r);
    throw std::runtime_error("invert_representation: no convergence after " + std::to_string(s.iterations) +
                             " iterations; residual history:" + hist);
  }
  s.f_hat = f;
  s.u_check = u;
  for (int i = 0; i < n; ++i)
    if (f[i] > 0.0) s.stopping_region.push_back(i);
  return s;
}

TwoSidedReport check_two_sided(ChainSolution& sol, const std::vector<double>& G, const std::vector<int>& order,
                               double tol) {
  const int n = static_cast<int>(order.size());
  TwoSidedReport r;
  const auto& f = sol.f_hat;
  std::vector<int> cont;  // positions in `order` with f_hat <= 0
  for (int p = 0; p < n; ++p)
    if (!(f[order[p]] > 0.0)) cont.push_back(p);

  ConditionCheck ai{"a_i", true, 0.0, "f_hat <= 0 strictly between x_* and x^*"};
  ConditionCheck aii{"a_ii", true, 0.0, "f_hat non-increasing below x_*, non-decreasing above x^*"};
  ConditionCheck bi{"b_i", true, 0.0, "U(f_hat) = G outside [x_*, x^*]"};
  ConditionCheck bii{"b_ii", true, 0.0, "U(f_hat) >= G on [x_*, x^*]"};

  int lo_pos = -1, hi_pos = n;  // positions of x_* and x^*
  if (cont.empty()) {
    r.stop_everywhere = true;
  } else {
    const int first = cont.front(), last = cont.back();
    if (last - first + 1 != static_cast<int>(cont.size())) {
      ai.passed = false;
      ai.detail += "; continuation set is not an interval of the order";
    }
    lo_pos = first - 1;
    hi_pos = last + 1;
    if (lo_pos >= 0) r.lower = order[lo_pos];
    if (hi_pos < n) r.upper = order[hi_pos];
    for (int p = lo_pos + 1; p < hi_pos; ++p) {
      ai.worst = std::max(ai.worst, f[order[p]]);
      if (f[order[p]] > 0.0) ai.passed = false;
    }
  }
  for (int p = 1; p <= lo_pos; ++p) {
    const double rise = f[order[p]] - f[order[p - 1]];
    aii.worst = std::max(aii.worst, rise);
    if (rise > tol) aii.passed = false;
  }
  for (int p = std::max(hi_pos, 0) + 1; p < n; ++p) {
    const double drop = f[order[p - 1]] - f[order[p]];
    aii.worst = std::max(aii.worst, drop);
    if (drop > tol) aii.passed = false;
  }
  for (int p = 0; p < n; ++p) {
    const int i = order[p];
    const bool inside = !r.stop_everywhere && p >= lo_pos && p <= hi_pos;
    const double u = sol.u_check[i];
    if (inside) {
      bii.worst = std::max(bii.worst, G[i] - u);
      if (u < G[i] - tol) bii.passed = false;
    } else {
      bi.worst = std::max(bi.worst, std::abs(u - G[i]));
      if (std::abs(u - G[i]) > tol) bi.passed = false;
    }
  }
  r.conditions.checks = {ai, aii, bi, bii};
  r.conditions.assumptions.push_back(
      "stopping region taken as {f_hat > 0}, which may include x_* and x^* themselves");
  if (r.lower && r.upper) sol.two_sided_bounds = std::pair{*r.lower, *r.upper};
  return r;
}

std::vector<double> value_ctmc(const ChainSolution& sol, const FiniteCTMC& c, double beta) {
  std::vector<double> g(sol.f_hat.size());
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = sol.f_hat[i] > 0.0 ? sol.f_hat[i] : 0.0;
  return running_max_expectation(c, g, beta);
}

}  // namespace osp
