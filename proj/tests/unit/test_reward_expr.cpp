#include <cmath>

#include <doctest.h>

#include "osp/reward_expr.hpp"

using osp::parse;

TEST_CASE("expressions evaluate with usual precedence") {
  CHECK(parse("1 + 2 * 3")(0.0) == 7.0);
  CHECK(parse("(2 ^ 3) ^ 2")(0.0) == 64.0);
  CHECK(parse("-x^2")(3.0) == -9.0);
  CHECK(parse("2 - exp(x)")(0.0) == doctest::Approx(1.0));
  CHECK(parse("pos(x)^2")(-1.5) == 0.0);
  CHECK(parse("pos(x)^2")(1.5) == 2.25);
  CHECK(parse("max(x, 1) + min(x, -1)")(0.0) == 0.0);
  CHECK(parse("log(exp(x))")(0.7) == doctest::Approx(0.7).epsilon(1e-15));
}

TEST_CASE("malformed input reports a position") {
  CHECK_THROWS_AS(parse("1 +"), osp::ParseError);
  CHECK_THROWS_AS(parse("foo(x)"), osp::ParseError);
  CHECK_THROWS_AS(parse("(x"), osp::ParseError);
  CHECK_THROWS_AS(parse("2 ^ 3 ^ 2"), osp::ParseError);
  try {
    parse("x + * 2");
    FAIL("no throw");
  } catch (const osp::ParseError& e) {
    CHECK(e.position() >= 3);
  }
}

TEST_CASE("domain errors are raised, not silently NaN") {
  CHECK_THROWS_AS(parse("log(x)")(0.0), osp::DomainError);
  CHECK_THROWS_AS(parse("1 / x")(0.0), osp::DomainError);
}

TEST_CASE("printing round-trips through the parser") {
  for (const char* text : {"pos(x)^2", "2 - exp(x)", "max(x - 1, 0) * exp(-0.5 * x)", "x^3 / (1 + x^2)"}) {
    const auto e = parse(text);
    const auto back = parse(e.str());
    CHECK(back.str() == e.str());
    for (double x : {-2.0, -0.3, 0.4, 1.7}) CHECK(back(x) == e(x));
  }
}

TEST_CASE("symbolic derivatives match central differences") {
  for (const char* text : {"x^3 - 2*x", "exp(0.5*x) * x^2", "log(1 + x^2)", "2 - exp(x)"}) {
    const auto e = parse(text);
    const auto d1 = e.derivative(1);
    const auto d2 = e.derivative(2);
    for (double x : {-1.3, 0.2, 0.9, 2.4}) {
      const double h = 1e-4;
      const double fd1 = (e(x + h) - e(x - h)) / (2 * h);
      const double fd2 = (e(x + h) - 2 * e(x) + e(x - h)) / (h * h);
      CHECK(d1(x) == doctest::Approx(fd1).epsilon(1e-7));
      CHECK(d2(x) == doctest::Approx(fd2).epsilon(1e-5));
    }
  }
}

TEST_CASE("derivatives at a kink are right derivatives") {
  const auto d = parse("pos(x)^2").derivative(1);
  CHECK(d(0.0) == 0.0);
  const auto g = parse("pos(x)").derivative(1);
  CHECK(g(0.0) == 1.0);
  CHECK(g(-1e-9) == 0.0);
}

TEST_CASE("kinks are located") {
  const auto k = parse("pos(x - 1) + max(x, -2)").kinks(-5.0, 5.0);
  REQUIRE(k.size() == 2);
  CHECK(k[0] == doctest::Approx(-2.0).epsilon(1e-12));
  CHECK(k[1] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(parse("pos(x)")(0.0) == 0.0);
  CHECK(parse("pos(x)").evaluate(0.0).kink);
}
