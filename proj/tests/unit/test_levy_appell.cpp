#include <cmath>

#include <doctest.h>

#include "osp/generator.hpp"
#include "osp/qsolver.hpp"

using namespace osp;

TEST_CASE("Appell polynomials of an exponential law") {
  // Y ~ Exp(l): E e^{uY} = l / (l - u), so the Appell generating function
  // e^{ux} (1 - u/l) gives Q_n(x) = x^n - (n/l) x^{n-1}.
  const double beta = 0.5, l = std::sqrt(2.0 * beta);
  const auto [max_law, min_law] = wh_factor_laws(LevyModel::brownian_with_drift(0.0, 1.0), beta);
  const auto q = appell_polynomials(max_law, 5);
  for (int n = 0; n <= 5; ++n) {
    Polynomial expected(n + 1, 0.0);
    expected[n] = 1.0;
    if (n > 0) expected[n - 1] = -n / l;
    REQUIRE(q[n].size() >= expected.size());
    for (std::size_t k = 0; k < q[n].size(); ++k)
      CHECK(std::abs(q[n][k] - (k < expected.size() ? expected[k] : 0.0)) <= 1e-10);
  }
}

TEST_CASE("Appell families: derivative recursion and convolution identity") {
  for (const auto& l : {LevyModel::brownian_with_drift(0.0, 1.0), LevyModel::brownian_with_drift(-0.3, 1.2),
                        LevyModel::jump_diffusion(0.1, 0.8, JumpSide::positive, 1.0, 2.5)}) {
    const auto chk = appell_convolution_check(l, 0.5, 5);
    CHECK(chk.derivative_deviation <= 1e-10);
    CHECK(chk.convolution_deviation <= 1e-10);
    CHECK(chk.representing_deviation <= 1e-10);
  }
}

TEST_CASE("expect_shifted and invert_shifted are inverse") {
  const auto [max_law, min_law] = wh_factor_laws(LevyModel::jump_diffusion(0.1, 0.8, JumpSide::positive, 1.0, 2.5), 0.5);
  const auto g = *to_exp_poly(parse("x^3 - 2*x + 0.5*exp(0.3*x)"));
  const auto q = invert_shifted(g, max_law);
  const auto back = expect_shifted(q, max_law);
  for (double x : {-2.0, 0.0, 1.5}) CHECK(back(x) == doctest::Approx(g(x)).epsilon(1e-11));
}

TEST_CASE("Q from the reward matches the resolvent route when both apply") {
  const auto l = LevyModel::brownian_with_drift(0.0, 1.0);
  const double beta = 0.5;
  const auto G = *to_exp_poly(parse("x^2"));
  REQUIRE(resolvent_route_applicable(l, G, beta));
  const auto a = q_levy_from_reward(l, G, beta);
  const auto b = q_levy(l, apply_generator_levy(l, parse("x^2"), beta), beta);
  for (double x : {-1.0, 0.5, 2.0, 3.0}) CHECK(a(x) == doctest::Approx(b(x)).epsilon(1e-12));
  // Exp(1) Appell polynomial of degree 2: x^2 - 2x, root at 2.
  CHECK(a(2.0) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("a beta-harmonic exponential is kept by the reward route") {
  // Put on exp(X) in mirrored coordinates y = -x: G(y) = 2 - e^{-y}, psi(-1) = beta.
  const auto l = LevyModel::brownian_with_drift(0.0, 1.0);
  const double beta = 0.5;
  const auto G = *to_exp_poly(parse("2 - exp(-x)"));
  CHECK_FALSE(resolvent_route_applicable(l, G, beta));
  const auto q = q_levy_from_reward(l, G, beta);
  // M_T ~ Exp(1), E e^{-M_T} = 1/2, so Q = 2 - 2 e^{-y}.
  for (double y : {-1.0, 0.0, 0.7}) CHECK(q(y) == doctest::Approx(2.0 - 2.0 * std::exp(-y)).epsilon(1e-12));
}
