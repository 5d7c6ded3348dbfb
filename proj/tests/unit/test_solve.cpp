#include <cmath>

#include <doctest.h>

#include "../support/oracles.hpp"
#include "osp/solve.hpp"

using namespace osp;

namespace {

Problem absorbing(int n) {
  Problem p;
  p.process = LinearDiffusion::absorbed_brownian(1.0, 0.0);
  p.reward = parse("x^" + std::to_string(n));
  p.beta = 0.5;
  p.side = SideChoice::right;
  return p;
}

Problem levy_bm(const std::string& reward, double beta, SideChoice side) {
  Problem p;
  p.process = LevyModel::brownian_with_drift(0.0, 1.0);
  p.reward = parse(reward);
  p.beta = beta;
  p.side = side;
  return p;
}

}  // namespace

TEST_CASE("absorbed Brownian motion, x^2: threshold solves tanh z = z/2") {
  const auto s = solve(absorbing(2));
  REQUIRE(s.certified());
  const double z = oracle::bisect([](double z) { return std::tanh(z) - z / 2.0; }, 1.0, 3.0);
  CHECK(std::abs(s.threshold->x_star - z) <= 1e-9);

  // The same point as the sign change of int_0^z (beta y^2 - 1) sinh(y) dy.
  const auto integral = [](double z) {
    return oracle::simpson([](double y) { return (0.5 * y * y - 1.0) * std::sinh(y); }, 0.0, z, 4000);
  };
  const double z1 = oracle::bisect(integral, 1.0, 3.0);
  CHECK(std::abs(z1 - z) <= 1e-9);
  CHECK(s.value_at(z) == doctest::Approx(z * z).epsilon(1e-9));
}

TEST_CASE("absorbed Brownian motion, x: stop immediately") {
  const auto s = solve(absorbing(1));
  REQUIRE(s.certified());
  CHECK(s.threshold->immediate_stop);
  CHECK(s.headline.find("immediate stopping") == 0);
  for (double x : {0.1, 1.0, 3.0}) CHECK(s.value_at(x) == doctest::Approx(x).epsilon(1e-9));
}

TEST_CASE("absorbed Brownian motion, x^3: threshold solves z cosh z = 3 sinh z") {
  const auto s = solve(absorbing(3));
  REQUIRE(s.certified());
  const double z = oracle::bisect([](double z) { return z * std::cosh(z) - 3.0 * std::sinh(z); }, 1.0, 5.0);
  CHECK(std::abs(s.threshold->x_star - z) <= 1e-9);
}

TEST_CASE("put on exp(X): threshold matches grid maximization of the hitting payoff") {
  const auto s = solve(levy_bm("2 - exp(x)", 0.5, SideChoice::left));
  REQUIRE(s.certified());
  CHECK(s.problem.side == SideChoice::left);
  // From x above b: E_x e^{-beta H_b} = e^{-(x - b)} for sqrt(2 beta) = 1.
  const double x0 = 1.0;
  const double b = oracle::grid_argmax([&](double b) { return std::exp(-(x0 - b)) * (2.0 - std::exp(b)); }, -3.0,
                                       0.6, 1e-11);
  CHECK(std::abs(s.threshold->x_star - b) <= 1e-8);

  // Value is nonincreasing and dominates G.
  double prev = INFINITY;
  for (double x = -2.0; x <= 3.0; x += 0.25) {
    const auto r = s.value->row(x);
    CHECK(r.max_law <= prev + 1e-12);
    CHECK(r.max_law >= r.reward - 1e-9);
    CHECK(r.spread <= 1e-6);
    prev = r.max_law;
  }
}

TEST_CASE("power rewards for Brownian motion: threshold n / sqrt(2 beta)") {
  for (double beta : {0.5, 1.0}) {
    for (int n = 1; n <= 4; ++n) {
      const auto s = solve(levy_bm("pos(x)^" + std::to_string(n), beta, SideChoice::automatic));
      REQUIRE(s.certified());
      CHECK(s.threshold->x_star == doctest::Approx(n / std::sqrt(2.0 * beta)).epsilon(1e-9));
    }
  }
}

TEST_CASE("Ornstein-Uhlenbeck, (x+)^2: one positive sign change of Q") {
  Problem p;
  p.process = LinearDiffusion::ornstein_uhlenbeck(1.0);
  p.reward = parse("pos(x)^2");
  p.beta = 1.0;
  p.side = SideChoice::right;
  const auto s = solve(p);
  REQUIRE(s.certified());
  const auto& th = *s.threshold;
  CHECK(th.x_star > 0.0);
  int changes = 0;
  double prev = th.q(th.search_lo + 1e-9);
  for (double z : linspace(th.search_lo + 1e-9, th.search_hi, 201)) {
    const double q = th.q(z);
    if ((q > 0.0) != (prev > 0.0)) ++changes;
    prev = q;
  }
  CHECK(changes == 1);
  const auto r = s.value->row(th.x_star);
  CHECK(r.max_law == doctest::Approx(r.reward).epsilon(1e-6));
  CHECK(s.max_route_spread <= 1e-6);
}

TEST_CASE("side detection follows the monotonicity of G") {
  CHECK(detect_side(levy_bm("pos(x)^2", 0.5, SideChoice::automatic)) == Side::right);
  CHECK(detect_side(levy_bm("2 - exp(x)", 0.5, SideChoice::automatic)) == Side::left);
  CHECK_THROWS(detect_side(levy_bm("x^2", 0.5, SideChoice::automatic)));
}

TEST_CASE("chain problems solve through the same entry point") {
  Problem p;
  p.process = FiniteCTMC::from_transitions(4, {{0, 1, 1.0}, {0, 3, 1.0}, {1, 2, 2.0}, {2, 3, 2.0}}, {"1", "2", "3", "4"});
  p.chain_reward = {3.0, 1.0, 1.0, 2.0};
  p.beta = 1.0;
  p.side = SideChoice::two_sided;
  const auto s = solve(p);
  REQUIRE(s.certified());
  CHECK(s.headline == "stop on the state set {1,2,4}");
  CHECK(s.value_at(2) == doctest::Approx(4.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("jump diffusions with jumps on either side certify") {
  for (auto side : {JumpSide::positive, JumpSide::negative}) {
    Problem p;
    p.process = LevyModel::jump_diffusion(-0.1, 0.8, side, 1.0, 2.5);
    p.reward = parse("pos(x)^2");
    p.beta = 0.5;
    const auto s = solve(p);
    REQUIRE(s.certified());
    CHECK(s.max_route_spread <= 1e-6);
    const auto r = s.value->row(s.threshold->x_star + 0.5);
    CHECK(r.max_law == doctest::Approx(r.reward).epsilon(1e-9));
    CHECK(s.conditions.find("q_routes") != nullptr);
  }
}
