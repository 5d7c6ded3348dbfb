#include "osp/exp_poly.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>

namespace osp {

ExpPoly ExpPoly::constant(double c) { return monomial(c, 0, 0.0); }

ExpPoly ExpPoly::monomial(double coeff, int power, double rate) {
  ExpPoly p;
  p.add_term({coeff, power, rate});
  p.normalize();
  return p;
}

void ExpPoly::add_term(const Term& t) {
  for (auto& s : terms_) {
    if (s.power == t.power && s.rate == t.rate) {
      s.coeff += t.coeff;
      return;
    }
  }
  terms_.push_back(t);
}

void ExpPoly::normalize() {
  std::erase_if(terms_, [](const Term& t) { return t.coeff == 0.0; });
  std::sort(terms_.begin(), terms_.end(), [](const Term& a, const Term& b) {
    return a.rate != b.rate ? a.rate < b.rate : a.power < b.power;
  });
}

double ExpPoly::operator()(double x) const {
  double s = 0.0;
  for (const auto& t : terms_) {
    double v = t.coeff;
    if (t.power > 0) v *= std::pow(x, t.power);
    if (t.rate != 0.0) v *= std::exp(t.rate * x);
    s += v;
  }
  return s;
}

ExpPoly ExpPoly::derivative() const {
  ExpPoly d;
  for (const auto& t : terms_) {
    if (t.power > 0) d.add_term({t.coeff * t.power, t.power - 1, t.rate});
    if (t.rate != 0.0) d.add_term({t.coeff * t.rate, t.power, t.rate});
  }
  d.normalize();
  return d;
}

bool ExpPoly::is_polynomial() const {
  return std::all_of(terms_.begin(), terms_.end(), [](const Term& t) { return t.rate == 0.0; });
}

int ExpPoly::degree() const {
  int d = -1;
  for (const auto& t : terms_) d = std::max(d, t.power);
  return d;
}

double ExpPoly::max_rate() const {
  double r = -std::numeric_limits<double>::infinity();
  for (const auto& t : terms_) r = std::max(r, t.rate);
  return r;
}

double ExpPoly::min_rate() const {
  double r = std::numeric_limits<double>::infinity();
  for (const auto& t : terms_) r = std::min(r, t.rate);
  return r;
}

double ExpPoly::coefficient(int power, double rate) const {
  for (const auto& t : terms_)
    if (t.power == power && t.rate == rate) return t.coeff;
  return 0.0;
}

RewardExpr ExpPoly::to_expr() const {
  const auto x = RewardExpr::variable();
  RewardExpr sum = RewardExpr::constant(0.0);
  for (const auto& t : terms_) {
    RewardExpr term = RewardExpr::constant(t.coeff);
    if (t.power > 0) term = term * RewardExpr::pow(x, RewardExpr::constant(t.power));
    if (t.rate != 0.0) term = term * RewardExpr::exp(RewardExpr::constant(t.rate) * x);
    sum = sum + term;
  }
  return sum;
}

std::string ExpPoly::str() const { return to_expr().str(); }

ExpPoly& ExpPoly::operator+=(const ExpPoly& o) {
  for (const auto& t : o.terms_) add_term(t);
  normalize();
  return *this;
}

ExpPoly operator*(const ExpPoly& a, const ExpPoly& b) {
  ExpPoly p;
  for (const auto& s : a.terms_)
    for (const auto& t : b.terms_) p.add_term({s.coeff * t.coeff, s.power + t.power, s.rate + t.rate});
  p.normalize();
  return p;
}

ExpPoly operator*(const ExpPoly& a, double s) {
  ExpPoly p = a;
  for (auto& t : p.terms_) t.coeff *= s;
  p.normalize();
  return p;
}

std::optional<ExpPoly> to_exp_poly(const RewardExpr& e, bool smooth_extension) {
  using Op = RewardExpr::Op;
  auto rec = [&](const RewardExpr& f) { return to_exp_poly(f, smooth_extension); };
  switch (e.op()) {
    case Op::Const:
      return ExpPoly::constant(*e.constant_value());
    case Op::Var:
      return ExpPoly::monomial(1.0, 1);
    case Op::Neg: {
      auto a = rec(e.child(0));
      if (!a) return std::nullopt;
      return *a * -1.0;
    }
    case Op::Add:
    case Op::Sub:
    case Op::Mul: {
      auto a = rec(e.child(0));
      auto b = rec(e.child(1));
      if (!a || !b) return std::nullopt;
      if (e.op() == Op::Add) return *a + *b;
      if (e.op() == Op::Sub) return *a - *b;
      return *a * *b;
    }
    case Op::Div: {
      auto c = e.child(1).constant_value();
      if (!c || *c == 0.0) return std::nullopt;
      auto a = rec(e.child(0));
      if (!a) return std::nullopt;
      return *a * (1.0 / *c);
    }
    case Op::Pow: {
      auto c = e.child(1).constant_value();
      if (!c || *c < 0.0 || *c != std::floor(*c) || *c > 64.0) return std::nullopt;
      auto a = rec(e.child(0));
      if (!a) return std::nullopt;
      ExpPoly p = ExpPoly::constant(1.0);
      for (int i = 0; i < static_cast<int>(*c); ++i) p = p * *a;
      return p;
    }
    case Op::Exp: {
      auto a = rec(e.child(0));
      if (!a || !a->is_polynomial() || a->degree() > 1) return std::nullopt;
      double slope = a->coefficient(1), offset = a->coefficient(0);
      return ExpPoly::monomial(std::exp(offset), 0, slope);
    }
    case Op::Pos:
      if (smooth_extension) return rec(e.child(0));
      return std::nullopt;
    default:
      return std::nullopt;
  }
}

}  // namespace osp
