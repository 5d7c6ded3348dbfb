#pragma once

#include <optional>
#include <string>
#include <vector>

#include "osp/reward_expr.hpp"

namespace osp {

/**
 * Finite sum of terms c * x^k * e^{a x} with k >= 0.
 *
 * This is the closed class on which Lévy generators with exponential jumps
 * and integrals against exponential mixtures can be written down exactly.
 * Terms with equal (k, a) are merged; zero coefficients are dropped.
 */
class ExpPoly {
 public:
  struct Term {
    double coeff = 0.0;
    int power = 0;
    double rate = 0.0;
  };

  ExpPoly() = default;
  static ExpPoly constant(double c);
  static ExpPoly monomial(double coeff, int power, double rate = 0.0);

  double operator()(double x) const;
  ExpPoly derivative() const;

  const std::vector<Term>& terms() const { return terms_; }
  bool is_polynomial() const;
  int degree() const;  // highest power over all terms, -1 when empty
  double max_rate() const;
  double min_rate() const;

  /// Coefficient of x^k e^{a x}.
  double coefficient(int power, double rate = 0.0) const;

  RewardExpr to_expr() const;
  std::string str() const;

  ExpPoly& operator+=(const ExpPoly& o);
  friend ExpPoly operator+(ExpPoly a, const ExpPoly& b) { return a += b; }
  friend ExpPoly operator-(ExpPoly a, const ExpPoly& b) { return a += b * -1.0; }
  friend ExpPoly operator*(const ExpPoly& a, const ExpPoly& b);
  friend ExpPoly operator*(const ExpPoly& a, double s);
  friend ExpPoly operator*(double s, const ExpPoly& a) { return a * s; }

 private:
  void add_term(const Term& t);
  void normalize();
  std::vector<Term> terms_;
};

/// Converts an expression built from constants, x, + - *, division by
/// constants, non-negative integer powers and exp(affine) into an ExpPoly.
/// With `smooth_extension` set, pos(u) is replaced by u. Returns nullopt
/// when the expression falls outside that class.
std::optional<ExpPoly> to_exp_poly(const RewardExpr& e, bool smooth_extension = false);

}  // namespace osp
