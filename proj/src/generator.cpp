#include "osp/generator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace osp {

namespace {

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

double factorial(int n) {
  double r = 1.0;
  for (int i = 2; i <= n; ++i) r *= i;
  return r;
}

}  // namespace

double FTilde::operator()(double x) const { return evaluate(x).value; }

RewardExpr::Evaluation FTilde::evaluate(double x) const {
  if (family == Family::ctmc) {
    const auto i = static_cast<std::size_t>(x);
    if (x < 0.0 || i >= values.size() || static_cast<double>(i) != x)
      throw std::out_of_range("f~: chain state index out of range");
    return {values[i], false};
  }
  if (closed) return {(*closed)(x), false};
  return expr.evaluate(x);
}

FTilde apply_generator_diffusion(const LinearDiffusion& d, const RewardExpr& G, double beta) {
  if (!(beta > 0.0)) throw std::invalid_argument("apply_generator: beta must be > 0");
  FTilde f;
  f.family = Family::diffusion;
  const auto half = RewardExpr::constant(0.5);
  f.expr = RewardExpr::constant(beta) * G - half * d.variance * G.derivative(2) - d.drift * G.derivative(1);
  if (d.drift.depends_on_x() || d.variance.depends_on_x()) {
    if (auto p = to_exp_poly(f.expr)) f.closed = *p;
  } else if (auto g = to_exp_poly(G)) {
    f.closed = *g * beta - g->derivative().derivative() * (0.5 * d.sigma2(0.0)) - g->derivative() * d.mu(0.0);
  }
  return f;
}

FTilde apply_generator_levy(const LevyModel& l, const RewardExpr& G, double beta) {
  if (!(beta > 0.0)) throw std::invalid_argument("apply_generator: beta must be > 0");
  auto g = to_exp_poly(G, false);
  bool extended = false;
  if (!g) {
    g = to_exp_poly(G, true);
    extended = true;
  }
  if (!g)
    throw std::invalid_argument(
        "apply_generator: reward '" + G.str() +
        "' is not a combination of polynomials and exponentials; the jump integral has no closed form");
  const auto [lo, hi] = l.strip();
  ExpPoly ag;
  for (const auto& t : g->terms()) {
    if (!(t.rate > lo && t.rate < hi))
      throw std::invalid_argument("apply_generator: exponential rate " + std::to_string(t.rate) +
                                  " outside the strip where the Laplace exponent is finite");
    for (int j = 0; j <= t.power; ++j)
      ag += ExpPoly::monomial(t.coeff * binomial(t.power, j) * l.laplace_exponent_derivative(t.rate, j), t.power - j,
                              t.rate);
  }
  FTilde f;
  f.family = Family::levy;
  f.closed = *g * beta - ag;
  f.expr = f.closed->to_expr();
  f.smooth_extension = extended;
  return f;
}

FTilde apply_generator_ctmc(const FiniteCTMC& c, const std::vector<double>& G, double beta) {
  if (!(beta > 0.0)) throw std::invalid_argument("apply_generator: beta must be > 0");
  if (static_cast<int>(G.size()) != c.n_states())
    throw std::invalid_argument("apply_generator: reward has " + std::to_string(G.size()) + " entries, chain has " +
                                std::to_string(c.n_states()) + " states");
  FTilde f;
  f.family = Family::ctmc;
  f.values.resize(G.size());
  for (int i = 0; i < c.n_states(); ++i) {
    double s = 0.0;
    for (int j = 0; j < c.n_states(); ++j)
      if (j != i) s += c.rates(i, j) * (G[j] - G[i]);
    f.values[i] = beta * G[i] - s;
  }
  return f;
}

namespace {

// E[Y^j e^{aY}] with Y = s E, E an exponential mixture plus an atom at 0.
double shifted_moment(const ExtremeLaw& law, int j, double a) {
  const double s = law.sign();
  double m = (j == 0) ? law.atom : 0.0;
  for (std::size_t i = 0; i < law.rates.size(); ++i) {
    const double r = law.rates[i];
    const double gap = r - s * a;
    if (!(gap > 0.0))
      throw std::domain_error("expectation diverges: exponential rate " + std::to_string(a) +
                              " against an exponential tail of rate " + std::to_string(r));
    m += law.weights[i] * std::pow(s, j) * r * factorial(j) / std::pow(gap, j + 1);
  }
  return m;
}

}  // namespace

ExpPoly expect_shifted(const ExpPoly& f, const ExtremeLaw& law) {
  ExpPoly out;
  for (const auto& t : f.terms())
    for (int j = 0; j <= t.power; ++j)
      out += ExpPoly::monomial(t.coeff * binomial(t.power, j) * shifted_moment(law, j, t.rate), t.power - j, t.rate);
  return out;
}

ExpPoly invert_shifted(const ExpPoly& g, const ExtremeLaw& law) {
  std::vector<double> rates;
  for (const auto& t : g.terms())
    if (std::find(rates.begin(), rates.end(), t.rate) == rates.end()) rates.push_back(t.rate);
  ExpPoly out;
  for (double a : rates) {
    int top = 0;
    for (const auto& t : g.terms())
      if (t.rate == a) top = std::max(top, t.power);
    std::vector<double> mom(static_cast<std::size_t>(top) + 1);
    for (int j = 0; j <= top; ++j) mom[j] = shifted_moment(law, j, a);
    if (mom[0] == 0.0) throw std::domain_error("invert_shifted: E e^{aY} vanishes");
    // Coefficient of z^p: sum_{k>=p} q_k C(k, p) E[Y^{k-p} e^{aY}] = g_p.
    std::vector<double> q(static_cast<std::size_t>(top) + 1, 0.0);
    for (int p = top; p >= 0; --p) {
      double rhs = g.coefficient(p, a);
      for (int k = p + 1; k <= top; ++k) rhs -= q[k] * binomial(k, p) * mom[k - p];
      q[p] = rhs / mom[0];
    }
    for (int p = 0; p <= top; ++p) out += ExpPoly::monomial(q[p], p, a);
  }
  return out;
}

double evaluate(const Polynomial& p, double x) {
  double s = 0.0;
  for (auto it = p.rbegin(); it != p.rend(); ++it) s = s * x + *it;
  return s;
}

Polynomial derivative(const Polynomial& p) {
  if (p.size() <= 1) return {0.0};
  Polynomial d(p.size() - 1);
  for (std::size_t k = 1; k < p.size(); ++k) d[k - 1] = static_cast<double>(k) * p[k];
  return d;
}

std::vector<Polynomial> appell_polynomials(std::span<const double> moments, int n_max) {
  if (n_max < 0) throw std::invalid_argument("appell_polynomials: negative order");
  if (static_cast<int>(moments.size()) < n_max + 1) throw std::invalid_argument("appell_polynomials: too few moments");
  std::vector<Polynomial> q;
  for (int n = 0; n <= n_max; ++n) {
    Polynomial p(n + 1, 0.0);
    p[n] = 1.0;
    for (int k = 0; k < n; ++k) {
      const double c = binomial(n, k) * moments[n - k];
      for (std::size_t i = 0; i < q[k].size(); ++i) p[i] -= c * q[k][i];
    }
    q.push_back(std::move(p));
  }
  return q;
}

std::vector<Polynomial> appell_polynomials(const ExtremeLaw& law, int n_max) {
  std::vector<double> m(n_max + 1);
  for (int k = 0; k <= n_max; ++k) m[k] = law.moment(k);
  return appell_polynomials(m, n_max);
}

std::vector<double> sum_moments(const ExtremeLaw& a, const ExtremeLaw& b, int n) {
  std::vector<double> m(n + 1, 0.0);
  for (int k = 0; k <= n; ++k)
    for (int j = 0; j <= k; ++j) m[k] += binomial(k, j) * a.moment(j) * b.moment(k - j);
  return m;
}

AppellCheck appell_convolution_check(const LevyModel& l, double beta, int n) {
  if (n < 0) throw std::invalid_argument("appell_convolution_check: negative order");
  const auto [max_law, min_law] = wh_factor_laws(l, beta);
  const auto qm = appell_polynomials(max_law, n);
  const auto qi = appell_polynomials(min_law, n);
  const auto mx = sum_moments(max_law, min_law, n);
  const auto qx = appell_polynomials(mx, n);

  AppellCheck r;
  r.n = n;
  r.max_family = qm;
  // Coefficient of x^a y^b on both sides.
  for (int a = 0; a <= n; ++a) {
    for (int b = 0; a + b <= n; ++b) {
      const double lhs = qx[n][a + b] * binomial(a + b, a);
      double rhs = 0.0;
      for (int k = a; k <= n; ++k) {
        const int rest = n - k;
        if (b > rest) continue;
        rhs += binomial(n, k) * qm[k][a] * qi[rest][b];
      }
      r.convolution_deviation = std::max(r.convolution_deviation, std::abs(lhs - rhs));
    }
  }

  const auto f = apply_generator_levy(l, RewardExpr::pow(RewardExpr::variable(), RewardExpr::constant(n)), beta);
  const ExpPoly q = expect_shifted(*f.closed, min_law) * (1.0 / beta);
  for (int k = 0; k <= n; ++k)
    r.representing_deviation = std::max(r.representing_deviation, std::abs(q.coefficient(k) - qm[n][k]));
  for (const auto& t : q.terms())
    if (t.rate != 0.0 || t.power > n) r.representing_deviation = std::max(r.representing_deviation, std::abs(t.coeff));

  for (const auto* fam : {&qm, &qi, &qx}) {
    for (int k = 1; k <= n; ++k) {
      const auto d = derivative((*fam)[k]);
      for (std::size_t i = 0; i < d.size(); ++i) {
        const double expect = i < (*fam)[k - 1].size() ? k * (*fam)[k - 1][i] : 0.0;
        r.derivative_deviation = std::max(r.derivative_deviation, std::abs(d[i] - expect));
      }
    }
  }
  return r;
}

}  // namespace osp
