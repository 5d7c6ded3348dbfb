#include <cmath>
#include <cstdlib>

#include <doctest.h>

#include "osp/simulation.hpp"
#include "osp/verify.hpp"

using namespace osp;

TEST_CASE("simulated values do not depend on the worker count") {
  const auto draw = [](std::mt19937_64& rng) { return std::normal_distribution<double>(0.0, 1.0)(rng); };
  setenv("OSP_WORKERS", "1", 1);
  const auto a = simulate_values(10000, 7, draw);
  setenv("OSP_WORKERS", "3", 1);
  const auto b = simulate_values(10000, 7, draw);
  unsetenv("OSP_WORKERS");
  CHECK(a == b);
  CHECK(simulate_values(10000, 8, draw) != a);
}

TEST_CASE("summary statistics") {
  const std::vector<double> v{1.0, 2.0, 3.0, 4.0};
  const auto e = summarize(v);
  CHECK(e.mean == 2.5);
  CHECK(e.se == doctest::Approx(std::sqrt((2.25 + 0.25 + 0.25 + 2.25) / 3.0 / 4.0)));
  std::vector<double> many(1001, 0.1);
  CHECK(pairwise_sum(many) == doctest::Approx(100.1).epsilon(1e-14));
}

TEST_CASE("one Euler step of Brownian motion with drift has the right moments") {
  const Stepper st(LinearDiffusion::brownian_with_drift(0.3, 1.5), 1e-3);
  const auto v = simulate_values(200000, 3, [&](std::mt19937_64& rng) { return st.advance(1.0, 2.0, rng); });
  const auto e = summarize(v);
  CHECK(std::abs(e.mean - 1.6) <= 5.0 * e.se);
  const double var = e.se * e.se * static_cast<double>(e.n);
  CHECK(var == doctest::Approx(4.5).epsilon(0.02));
}

TEST_CASE("exact Ornstein-Uhlenbeck transition") {
  const Stepper st(LinearDiffusion::ornstein_uhlenbeck(2.0), 1e-3);
  const auto v = simulate_values(200000, 4, [&](std::mt19937_64& rng) { return st.advance(1.0, 0.5, rng); });
  const auto e = summarize(v);
  CHECK(std::abs(e.mean - std::exp(-1.0)) <= 5.0 * e.se);
}

TEST_CASE("Brownian extremes before an exponential time follow the Wiener-Hopf laws") {
  const auto l = LevyModel::jump_diffusion(0.1, 0.8, JumpSide::positive, 1.0, 2.5);
  const auto [max_law, min_law] = wh_factor_laws(l, 0.5);
  const auto hi = simulate_values(200000, 5, [&](std::mt19937_64& rng) { return sample_levy_extremes(l, 0.5, rng).first; });
  const auto lo = simulate_values(200000, 5, [&](std::mt19937_64& rng) { return sample_levy_extremes(l, 0.5, rng).second; });
  const auto eh = summarize(hi), el = summarize(lo);
  CHECK(std::abs(eh.mean - max_law.mean()) <= 5.0 * eh.se);
  CHECK(std::abs(el.mean - min_law.mean()) <= 5.0 * el.se);
}

TEST_CASE("chain policy value against the single-jump oracle") {
  const auto c = FiniteCTMC::from_transitions(4, {{0, 1, 1.0}, {0, 3, 1.0}, {1, 2, 2.0}, {2, 3, 2.0}});
  const std::vector<double> G{3.0, 1.0, 1.0, 2.0};
  const RealFn g = [&](double x) { return G[static_cast<std::size_t>(std::lround(x))]; };
  SimulationOptions o;
  o.n_paths = 100000;
  const auto e = evaluate_policy(c, Policy::state_set({0, 1, 3}), g, 1.0, 2.0, o);
  CHECK(std::abs(e.mean - 4.0 / 3.0) <= 4.0 * e.se);
}

TEST_CASE("threshold policy with bridge crossings matches the hitting transform") {
  const auto d = LinearDiffusion::brownian(1.0);
  const RealFn g = [](double x) { return x * x; };
  SimulationOptions o;
  o.n_paths = 40000;
  o.dt = 1e-2;
  o.bridge = true;
  const auto e = evaluate_policy(d, Policy::threshold_right(1.0), g, 0.5, 0.2, o);
  CHECK(std::abs(e.mean - std::exp(-0.8)) <= 4.0 * e.se);
}

TEST_CASE("policies validate their levels") {
  CHECK(Policy::threshold_right(1.0).stops(1.0));
  CHECK_FALSE(Policy::threshold_right(1.0).stops(0.99));
  CHECK(Policy::threshold_left(-1.0).stops(-1.5));
  CHECK_THROWS(Policy::two_sided(1.0, 0.0).validate());
}
