#include <cmath>

#include <doctest.h>

#include "osp/numerics.hpp"
#include "osp/processes.hpp"

using namespace osp;

TEST_CASE("Brownian hitting transform is exp(-sqrt(2 beta) |x - y|)") {
  const double beta = 0.7;
  const auto fp = fundamental_pair(LinearDiffusion::brownian(1.0), beta);
  for (auto [x, y] : {std::pair{0.0, 1.0}, {2.0, -1.0}, {-3.0, -2.5}})
    CHECK(hitting_transform(fp, x, y) == doctest::Approx(std::exp(-std::sqrt(2 * beta) * std::abs(x - y))).epsilon(1e-13));
}

TEST_CASE("numeric fundamental solutions reproduce the closed form") {
  const double beta = 0.5;
  const auto d = LinearDiffusion::general(parse("0.3"), parse("2"), -kInf, BoundaryKind::natural, kInf,
                                          BoundaryKind::natural);
  PairOptions po;
  po.lo = -4.0;
  po.hi = 4.0;
  const auto numeric = fundamental_pair(d, beta, po);
  const auto closed = fundamental_pair(LinearDiffusion::brownian_with_drift(0.3, std::sqrt(2.0)), beta, po);
  CHECK(numeric.ratios_only());
  for (auto [x, y] : {std::pair{0.0, 1.0}, {2.0, -1.0}, {-3.0, -2.5}, {1.0, 3.5}})
    CHECK(hitting_transform(numeric, x, y) == doctest::Approx(hitting_transform(closed, x, y)).epsilon(1e-7));
  CHECK(numeric.wronskian_spread() < 1e-6);
}

TEST_CASE("absorbed Brownian motion has psi proportional to sinh") {
  const double beta = 0.5;
  const auto fp = fundamental_pair(LinearDiffusion::absorbed_brownian(1.0, 0.0), beta);
  for (auto [x, y] : {std::pair{0.5, 1.9}, {1.0, 3.0}})
    CHECK(hitting_transform(fp, x, y) == doctest::Approx(std::sinh(x) / std::sinh(y)).epsilon(1e-12));
}

TEST_CASE("resolvent density integrates to 1/beta") {
  const double beta = 1.0;
  PairOptions po;
  po.lo = -30.0;
  po.hi = 30.0;
  for (const auto& d : {LinearDiffusion::brownian(1.3), LinearDiffusion::ornstein_uhlenbeck(1.0)}) {
    const auto fp = fundamental_pair(d, beta, po);
    for (double x : {-0.5, 0.0, 1.2}) {
      const double kinks[] = {x};
      const auto I = integrate([&](double y) { return resolvent_density(fp, x, y); }, -28.0, 28.0, kinks, 1e-10);
      CHECK(I.value == doctest::Approx(1.0 / beta).epsilon(1e-6));
    }
  }
}

TEST_CASE("Ornstein-Uhlenbeck solutions satisfy the ODE") {
  PairOptions po;
  po.lo = -3.0;
  po.hi = 3.0;
  const auto fp = fundamental_pair(LinearDiffusion::ornstein_uhlenbeck(1.0), 1.0, po);
  const auto grid = linspace(-3.0, 3.0, 61);
  CHECK(fp.max_ode_residual(grid, true) < 1e-5);
  CHECK(fp.max_ode_residual(grid, false) < 1e-5);
  CHECK(fp.wronskian_spread() < 1e-6);
}

TEST_CASE("Cramer-Lundberg roots solve psi(theta) = beta") {
  const double beta = 0.8;
  for (const auto& l : {LevyModel::brownian_with_drift(0.2, 1.1),
                        LevyModel::jump_diffusion(-0.1, 0.9, JumpSide::positive, 1.5, 2.0),
                        LevyModel::jump_diffusion(0.4, 0.6, JumpSide::negative, 0.7, 3.0)}) {
    const double s = l.jump_side == JumpSide::positive ? 1.0 : -1.0;
    const double rate = l.has_jumps() ? l.jump_rate : 0.0;
    const auto exponent = [&](double t) {
      return l.mu * t + 0.5 * l.sigma * l.sigma * t * t + rate * (l.jump_decay / (l.jump_decay - s * t) - 1.0);
    };
    const auto roots = l.cramer_lundberg_roots(beta);
    CHECK(roots.size() == (l.has_jumps() ? 3u : 2u));
    for (double r : roots) CHECK(exponent(r) == doctest::Approx(beta).epsilon(1e-12));
  }
}

TEST_CASE("Wiener-Hopf factors multiply to the law of X_T") {
  const double beta = 0.8;
  for (const auto& l : {LevyModel::brownian_with_drift(0.2, 1.1),
                        LevyModel::jump_diffusion(-0.1, 0.9, JumpSide::positive, 1.5, 2.0),
                        LevyModel::jump_diffusion(0.4, 0.6, JumpSide::negative, 0.7, 3.0)}) {
    const auto [m, i] = wh_factor_laws(l, beta);
    CHECK(m.mean() + i.mean() == doctest::Approx(l.mean() / beta).epsilon(1e-10));
    const auto [a, b] = l.strip();
    for (double theta : {-0.3, 0.1, 0.25}) {
      if (!(theta > a && theta < b) || l.laplace_exponent(theta) >= beta) continue;
      const double lhs = m.mgf(theta) * i.mgf(theta);
      CHECK(lhs == doctest::Approx(beta / (beta - l.laplace_exponent(theta))).epsilon(1e-10));
    }
    CHECK(m.cdf(0.0) == doctest::Approx(m.atom));
    CHECK(m.cdf(1e6) == doctest::Approx(1.0));
  }
}

TEST_CASE("chain generator from transitions") {
  const auto c = FiniteCTMC::from_transitions(3, {{0, 1, 1.0}, {1, 2, 2.0}, {1, 0, 0.5}});
  CHECK(c.exit_rate(1) == 2.5);
  CHECK(c.is_absorbing(2));
  CHECK(c.rates.row(1).sum() == doctest::Approx(0.0));
  CHECK_THROWS(FiniteCTMC::from_transitions(2, {{0, 0, 1.0}}));
  CHECK_THROWS(FiniteCTMC::from_transitions(2, {{0, 1, -1.0}}));
}
