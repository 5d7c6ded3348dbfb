#include <random>

#include <doctest.h>

#include "../support/oracles.hpp"
#include "osp/ctmc_solver.hpp"
#include "osp/generator.hpp"

using namespace osp;

namespace {

FiniteCTMC example_chain() {
  return FiniteCTMC::from_transitions(4, {{0, 1, 1.0}, {0, 3, 1.0}, {1, 2, 2.0}, {2, 3, 2.0}}, {"1", "2", "3", "4"});
}

}  // namespace

TEST_CASE("level decomposition matches jump-chain conditioning on random chains") {
  std::mt19937_64 rng(20240611);
  std::uniform_real_distribution<double> val(0.0, 1.0);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const auto c = oracle::random_chain(5, 0.2, rng);
    std::vector<double> f(5);
    for (auto& v : f) v = val(rng);
    const auto exact = running_max_expectation(c, f, 1.0);
    const auto brute = oracle::running_max_by_jumps(c, f, 1.0, 25);
    for (int i = 0; i < 5; ++i) worst = std::max(worst, std::abs(exact[i] - brute[i]));
  }
  CHECK(worst <= 1e-8);
}

TEST_CASE("hitting probabilities of an absorbing state") {
  // 0 -> 1 at rate a, killing at beta: P_0(H_1 < T) = a / (a + beta).
  const auto c = FiniteCTMC::from_transitions(2, {{0, 1, 3.0}});
  const auto p = hitting_probability(c, {false, true}, 0.5);
  CHECK(p[0] == doctest::Approx(3.0 / 3.5).epsilon(1e-14));
  CHECK(p[1] == 1.0);
}

TEST_CASE("example chain: representing function and stopping set") {
  const auto c = example_chain();
  const std::vector<double> G{3.0, 1.0, 1.0, 2.0};
  auto sol = invert_representation(c, G, 1.0);
  const std::vector<double> expected{3.0, 0.2, -1.0, 2.0};
  for (int i = 0; i < 4; ++i) CHECK(std::abs(sol.f_hat[i] - expected[i]) <= 1e-12);
  CHECK(sol.stopping_region == std::vector<int>{0, 1, 3});
  const auto u = running_max_expectation(c, sol.f_hat, 1.0);
  for (int i = 0; i < 4; ++i) CHECK(std::abs(u[i] - G[i]) <= 1e-12);

  const auto report = check_two_sided(sol, G, {0, 1, 2, 3});
  CHECK(report.certified());
  const auto V = value_ctmc(sol, c, 1.0);
  // From state 3 the chain jumps to 4 before T with probability 2 / (2 + 1).
  CHECK(V[2] == doctest::Approx(2.0 / 3.0 * 2.0).epsilon(1e-12));
  for (int i : {0, 1, 3}) CHECK(V[i] == doctest::Approx(G[i]).epsilon(1e-12));
}

TEST_CASE("chain generator applied to the reward") {
  const auto c = example_chain();
  const auto ft = apply_generator_ctmc(c, {3.0, 1.0, 1.0, 2.0}, 1.0);
  // (beta - A) G at state 3: 1 - 2 (2 - 1) = -1.
  CHECK(ft.values[2] == doctest::Approx(-1.0));
  CHECK(ft.values[3] == doctest::Approx(2.0));
}
