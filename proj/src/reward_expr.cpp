#include "osp/reward_expr.hpp"

#include <algorithm>
#include <charconv>
#include <cctype>
#include <cmath>
#include <functional>
#include <limits>
#include <unordered_set>

namespace osp {

namespace {

using NodePtr = std::shared_ptr<const RewardExpr::Node>;
using Op = RewardExpr::Op;

bool is_integer_value(double c) {
  return std::isfinite(c) && c == std::floor(c) && std::fabs(c) < 1e15;
}

double power(double base, double exponent, bool integer_exponent) {
  if (integer_exponent) {
    if (base == 0.0 && exponent < 0.0) throw DomainError("division by zero in negative power");
    return std::pow(base, exponent);
  }
  if (base > 0.0) return std::pow(base, exponent);
  if (base == 0.0 && exponent > 0.0) return 0.0;
  throw DomainError("real power of a non-positive base");
}

double gate_value(double u, double du, double v) {
  if (u > 0.0) return v;
  if (u < 0.0) return 0.0;
  return du > 0.0 ? v : 0.0;
}

RewardExpr::Evaluation eval_node(const RewardExpr::Node& n, double x) {
  auto sub = [x](const NodePtr& p) { return eval_node(*p, x); };
  switch (n.op) {
    case Op::Const:
      return {n.value, false};
    case Op::Var:
      return {x, false};
    case Op::Neg: {
      auto a = sub(n.kids[0]);
      return {-a.value, a.kink};
    }
    case Op::Add:
    case Op::Sub:
    case Op::Mul:
    case Op::Div: {
      auto a = sub(n.kids[0]);
      auto b = sub(n.kids[1]);
      bool kink = a.kink || b.kink;
      switch (n.op) {
        case Op::Add: return {a.value + b.value, kink};
        case Op::Sub: return {a.value - b.value, kink};
        case Op::Mul: return {a.value * b.value, kink};
        default:
          if (b.value == 0.0) throw DomainError("division by zero");
          return {a.value / b.value, kink};
      }
    }
    case Op::Pow: {
      auto a = sub(n.kids[0]);
      const auto& ex = *n.kids[1];
      if (ex.op == Op::Const) return {power(a.value, ex.value, is_integer_value(ex.value)), a.kink};
      auto b = sub(n.kids[1]);
      return {power(a.value, b.value, false), a.kink || b.kink};
    }
    case Op::Exp: {
      auto a = sub(n.kids[0]);
      return {std::exp(a.value), a.kink};
    }
    case Op::Log: {
      auto a = sub(n.kids[0]);
      if (!(a.value > 0.0)) throw DomainError("log of a non-positive number");
      return {std::log(a.value), a.kink};
    }
    case Op::Pos: {
      auto a = sub(n.kids[0]);
      return {std::max(a.value, 0.0), a.kink || std::fabs(a.value) <= kKinkTolerance};
    }
    case Op::Max:
    case Op::Min: {
      auto a = sub(n.kids[0]);
      auto b = sub(n.kids[1]);
      bool kink = a.kink || b.kink || std::fabs(a.value - b.value) <= kKinkTolerance;
      return {n.op == Op::Max ? std::max(a.value, b.value) : std::min(a.value, b.value), kink};
    }
    case Op::Gate: {
      auto u = sub(n.kids[0]);
      auto du = sub(n.kids[1]);
      auto v = sub(n.kids[2]);
      bool kink = u.kink || du.kink || v.kink || std::fabs(u.value) <= kKinkTolerance;
      return {gate_value(u.value, du.value, v.value), kink};
    }
  }
  return {0.0, false};
}

std::string format_number(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  std::string s(buf, res.ptr);
  if (v < 0.0) return "(" + s + ")";
  return s;
}

std::string print_node(const RewardExpr::Node& n) {
  auto k = [&](int i) { return print_node(*n.kids[i]); };
  switch (n.op) {
    case Op::Const: return format_number(n.value);
    case Op::Var: return "x";
    case Op::Neg: return "(-" + k(0) + ")";
    case Op::Add: return "(" + k(0) + " + " + k(1) + ")";
    case Op::Sub: return "(" + k(0) + " - " + k(1) + ")";
    case Op::Mul: return "(" + k(0) + " * " + k(1) + ")";
    case Op::Div: return "(" + k(0) + " / " + k(1) + ")";
    case Op::Pow: return "(" + k(0) + "^" + k(1) + ")";
    case Op::Exp: return "exp(" + k(0) + ")";
    case Op::Log: return "log(" + k(0) + ")";
    case Op::Pos: return "pos(" + k(0) + ")";
    case Op::Max: return "max(" + k(0) + ", " + k(1) + ")";
    case Op::Min: return "min(" + k(0) + ", " + k(1) + ")";
    case Op::Gate: return "gate(" + k(0) + ", " + k(1) + ", " + k(2) + ")";
  }
  return "";
}

bool has_var(const RewardExpr::Node& n) {
  if (n.op == Op::Var) return true;
  for (const auto& c : n.kids)
    if (c && has_var(*c)) return true;
  return false;
}

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  RewardExpr parse_all() {
    RewardExpr e = expr();
    skip_ws();
    if (pos_ != text_.size()) throw ParseError("unexpected character '" + std::string(1, text_[pos_]) + "'", pos_);
    return e;
  }

 private:
  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) {
      if (pos_ >= text_.size()) throw ParseError(std::string("expected '") + c + "' but input ended", pos_);
      throw ParseError(std::string("expected '") + c + "'", pos_);
    }
  }

  RewardExpr expr() {
    RewardExpr e = term();
    for (;;) {
      if (accept('+')) e = e + term();
      else if (accept('-')) e = e - term();
      else return e;
    }
  }

  RewardExpr term() {
    RewardExpr e = factor();
    for (;;) {
      if (accept('*')) e = e * factor();
      else if (accept('/')) e = e / factor();
      else return e;
    }
  }

  RewardExpr factor() {
    if (accept('-')) return -factor();
    RewardExpr base = atom();
    if (accept('^')) {
      bool negate = accept('-');
      RewardExpr ex = atom();
      return RewardExpr::pow(base, negate ? -ex : ex);
    }
    return base;
  }

  RewardExpr atom() {
    skip_ws();
    if (pos_ >= text_.size()) throw ParseError("unexpected end of input", pos_);
    char c = text_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (c == '(') {
      ++pos_;
      RewardExpr e = expr();
      expect(')');
      return e;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = pos_;
      while (pos_ < text_.size() &&
             (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
        ++pos_;
      std::string_view id = text_.substr(start, pos_ - start);
      if (id == "x") return RewardExpr::variable();
      if (id == "exp" || id == "log" || id == "pos") {
        expect('(');
        RewardExpr a = expr();
        expect(')');
        if (id == "exp") return RewardExpr::exp(a);
        if (id == "log") return RewardExpr::log(a);
        return RewardExpr::pos(a);
      }
      if (id == "max" || id == "min") {
        expect('(');
        RewardExpr a = expr();
        expect(',');
        RewardExpr b = expr();
        expect(')');
        return id == "max" ? RewardExpr::max(a, b) : RewardExpr::min(a, b);
      }
      if (id == "gate") {
        expect('(');
        RewardExpr u = expr();
        expect(',');
        RewardExpr du = expr();
        expect(',');
        RewardExpr v = expr();
        expect(')');
        return RewardExpr::gate(u, du, v);
      }
      throw ParseError("unknown identifier '" + std::string(id) + "'", start);
    }
    throw ParseError("unexpected character '" + std::string(1, c) + "'", pos_);
  }

  RewardExpr number() {
    std::size_t start = pos_;
    double v = 0.0;
    auto res = std::from_chars(text_.data() + pos_, text_.data() + text_.size(), v);
    if (res.ec != std::errc()) throw ParseError("malformed number", start);
    pos_ = static_cast<std::size_t>(res.ptr - text_.data());
    return RewardExpr::constant(v);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

void collect_switches(const NodePtr& n, std::unordered_set<const RewardExpr::Node*>& seen,
                      std::vector<RewardExpr>& out, const std::function<RewardExpr(const NodePtr&)>& wrap) {
  if (!n || !seen.insert(n.get()).second) return;
  switch (n->op) {
    case Op::Pos:
    case Op::Gate:
      out.push_back(wrap(n->kids[0]));
      break;
    case Op::Max:
    case Op::Min:
      out.push_back(wrap(n->kids[0]) - wrap(n->kids[1]));
      break;
    default:
      break;
  }
  for (const auto& c : n->kids) collect_switches(c, seen, out, wrap);
}

}  // namespace

RewardExpr::RewardExpr() : RewardExpr(constant(0.0)) {}

RewardExpr RewardExpr::make(Op op, double value, NodePtr a, NodePtr b, NodePtr c) {
  auto n = std::make_shared<Node>();
  n->op = op;
  n->value = value;
  n->kids = {std::move(a), std::move(b), std::move(c)};
  return RewardExpr(std::move(n));
}

RewardExpr RewardExpr::constant(double c) { return make(Op::Const, c); }
RewardExpr RewardExpr::variable() { return make(Op::Var, 0.0); }

std::optional<double> RewardExpr::constant_value() const {
  if (root_->op == Op::Const) return root_->value;
  return std::nullopt;
}

std::size_t RewardExpr::arity() const {
  std::size_t k = 0;
  for (const auto& c : root_->kids)
    if (c) ++k;
  return k;
}

RewardExpr RewardExpr::child(std::size_t i) const {
  if (i >= arity()) throw std::out_of_range("RewardExpr::child");
  return RewardExpr(root_->kids[i]);
}

bool RewardExpr::depends_on_x() const { return has_var(*root_); }

RewardExpr operator+(const RewardExpr& a, const RewardExpr& b) {
  auto ca = a.constant_value(), cb = b.constant_value();
  if (ca && cb) return RewardExpr::constant(*ca + *cb);
  if (ca && *ca == 0.0) return b;
  if (cb && *cb == 0.0) return a;
  return RewardExpr::make(Op::Add, 0.0, a.root_, b.root_);
}

RewardExpr operator-(const RewardExpr& a, const RewardExpr& b) {
  auto ca = a.constant_value(), cb = b.constant_value();
  if (ca && cb) return RewardExpr::constant(*ca - *cb);
  if (cb && *cb == 0.0) return a;
  if (ca && *ca == 0.0) return -b;
  return RewardExpr::make(Op::Sub, 0.0, a.root_, b.root_);
}

RewardExpr operator*(const RewardExpr& a, const RewardExpr& b) {
  auto ca = a.constant_value(), cb = b.constant_value();
  if (ca && cb) return RewardExpr::constant(*ca * *cb);
  if ((ca && *ca == 0.0) || (cb && *cb == 0.0)) return RewardExpr::constant(0.0);
  if (ca && *ca == 1.0) return b;
  if (cb && *cb == 1.0) return a;
  return RewardExpr::make(Op::Mul, 0.0, a.root_, b.root_);
}

RewardExpr operator/(const RewardExpr& a, const RewardExpr& b) {
  auto ca = a.constant_value(), cb = b.constant_value();
  if (ca && cb && *cb != 0.0) return RewardExpr::constant(*ca / *cb);
  if (ca && *ca == 0.0 && !(cb && *cb == 0.0)) return RewardExpr::constant(0.0);
  if (cb && *cb == 1.0) return a;
  return RewardExpr::make(Op::Div, 0.0, a.root_, b.root_);
}

RewardExpr operator-(const RewardExpr& a) {
  if (auto c = a.constant_value()) return RewardExpr::constant(-*c);
  if (a.op() == Op::Neg) return a.child(0);
  return RewardExpr::make(Op::Neg, 0.0, a.root_);
}

RewardExpr RewardExpr::exp(const RewardExpr& a) {
  if (auto c = a.constant_value()) return constant(std::exp(*c));
  return make(Op::Exp, 0.0, a.root_);
}

RewardExpr RewardExpr::log(const RewardExpr& a) {
  if (auto c = a.constant_value(); c && *c > 0.0) return constant(std::log(*c));
  return make(Op::Log, 0.0, a.root_);
}

RewardExpr RewardExpr::pos(const RewardExpr& a) {
  if (auto c = a.constant_value()) return constant(std::max(*c, 0.0));
  return make(Op::Pos, 0.0, a.root_);
}

RewardExpr RewardExpr::max(const RewardExpr& a, const RewardExpr& b) {
  auto ca = a.constant_value(), cb = b.constant_value();
  if (ca && cb) return constant(std::max(*ca, *cb));
  return make(Op::Max, 0.0, a.root_, b.root_);
}

RewardExpr RewardExpr::min(const RewardExpr& a, const RewardExpr& b) {
  auto ca = a.constant_value(), cb = b.constant_value();
  if (ca && cb) return constant(std::min(*ca, *cb));
  return make(Op::Min, 0.0, a.root_, b.root_);
}

RewardExpr RewardExpr::pow(const RewardExpr& base, const RewardExpr& exponent) {
  auto cb = base.constant_value(), ce = exponent.constant_value();
  if (ce && *ce == 1.0) return base;
  if (ce && *ce == 0.0) return constant(1.0);
  if (cb && ce) {
    try {
      return constant(power(*cb, *ce, is_integer_value(*ce)));
    } catch (const DomainError&) {
      // left unfolded; evaluation reports the error
    }
  }
  return make(Op::Pow, 0.0, base.root_, exponent.root_);
}

RewardExpr RewardExpr::gate(const RewardExpr& u, const RewardExpr& du, const RewardExpr& v) {
  if (auto cv = v.constant_value(); cv && *cv == 0.0) return constant(0.0);
  auto cu = u.constant_value();
  if (cu && *cu > 0.0) return v;
  if (cu && *cu < 0.0) return constant(0.0);
  if (cu && du.constant_value()) return *du.constant_value() > 0.0 ? v : constant(0.0);
  return make(Op::Gate, 0.0, u.root_, du.root_, v.root_);
}

double RewardExpr::operator()(double x) const { return eval_node(*root_, x).value; }

RewardExpr::Evaluation RewardExpr::evaluate(double x) const { return eval_node(*root_, x); }

RewardExpr RewardExpr::derivative(int order) const {
  if (order < 0) throw std::invalid_argument("derivative order must be non-negative");
  RewardExpr e = *this;
  for (int k = 0; k < order; ++k) {
    std::function<RewardExpr(const RewardExpr&)> d = [&d](const RewardExpr& f) -> RewardExpr {
      switch (f.op()) {
        case Op::Const: return constant(0.0);
        case Op::Var: return constant(1.0);
        case Op::Neg: return -d(f.child(0));
        case Op::Add: return d(f.child(0)) + d(f.child(1));
        case Op::Sub: return d(f.child(0)) - d(f.child(1));
        case Op::Mul: {
          auto a = f.child(0), b = f.child(1);
          return d(a) * b + a * d(b);
        }
        case Op::Div: {
          auto a = f.child(0), b = f.child(1);
          return d(a) / b - a * d(b) / (b * b);
        }
        case Op::Pow: {
          auto b = f.child(0), ex = f.child(1);
          if (auto c = ex.constant_value()) return constant(*c) * pow(b, constant(*c - 1.0)) * d(b);
          return f * (d(ex) * log(b) + ex * d(b) / b);
        }
        case Op::Exp: return f * d(f.child(0));
        case Op::Log: return d(f.child(0)) / f.child(0);
        case Op::Pos: {
          auto u = f.child(0);
          auto du = d(u);
          return gate(u, du, du);
        }
        case Op::Max: {
          auto a = f.child(0), b = f.child(1);
          auto diff = d(b) - d(a);
          return d(a) + gate(b - a, diff, diff);
        }
        case Op::Min: {
          auto a = f.child(0), b = f.child(1);
          auto diff = d(a) - d(b);
          return d(a) - gate(a - b, diff, diff);
        }
        case Op::Gate: return gate(f.child(0), f.child(1), d(f.child(2)));
      }
      return constant(0.0);
    };
    e = d(e);
  }
  return e;
}

RewardExpr RewardExpr::compose(const RewardExpr& inner) const {
  std::function<RewardExpr(const RewardExpr&)> sub = [&](const RewardExpr& f) -> RewardExpr {
    switch (f.op()) {
      case Op::Const: return f;
      case Op::Var: return inner;
      case Op::Neg: return -sub(f.child(0));
      case Op::Add: return sub(f.child(0)) + sub(f.child(1));
      case Op::Sub: return sub(f.child(0)) - sub(f.child(1));
      case Op::Mul: return sub(f.child(0)) * sub(f.child(1));
      case Op::Div: return sub(f.child(0)) / sub(f.child(1));
      case Op::Pow: return pow(sub(f.child(0)), sub(f.child(1)));
      case Op::Exp: return exp(sub(f.child(0)));
      case Op::Log: return log(sub(f.child(0)));
      case Op::Pos: return pos(sub(f.child(0)));
      case Op::Max: return max(sub(f.child(0)), sub(f.child(1)));
      case Op::Min: return min(sub(f.child(0)), sub(f.child(1)));
      case Op::Gate: return gate(sub(f.child(0)), sub(f.child(1)), sub(f.child(2)));
    }
    return f;
  };
  return sub(*this);
}

std::string RewardExpr::str() const { return print_node(*root_); }

std::vector<double> RewardExpr::kinks(double lo, double hi, int scan_points) const {
  std::vector<RewardExpr> switches;
  std::unordered_set<const Node*> seen;
  collect_switches(root_, seen, switches, [](const NodePtr& p) { return RewardExpr(p); });

  std::vector<double> out;
  if (!(hi > lo) || scan_points < 2) return out;
  const double h = (hi - lo) / (scan_points - 1);
  for (const auto& s : switches) {
    auto value = [&s](double x) -> std::optional<double> {
      try {
        double v = s(x);
        if (std::isfinite(v)) return v;
      } catch (const DomainError&) {
      }
      return std::nullopt;
    };
    std::optional<double> prev;
    double prev_x = lo;
    for (int i = 0; i < scan_points; ++i) {
      double x = (i == scan_points - 1) ? hi : lo + i * h;
      auto v = value(x);
      if (v && *v == 0.0) {
        out.push_back(x);
      } else if (v && prev && *prev != 0.0 && std::signbit(*v) != std::signbit(*prev)) {
        double a = prev_x, b = x;
        bool a_neg = *prev < 0.0;
        for (int it = 0; it < 200 && b - a > 1e-15 * std::max(1.0, std::fabs(a)); ++it) {
          double m = 0.5 * (a + b);
          auto vm = value(m);
          if (!vm) break;
          if (*vm == 0.0) {
            a = b = m;
            break;
          }
          if ((*vm < 0.0) == a_neg) a = m;
          else b = m;
        }
        out.push_back(0.5 * (a + b));
      }
      prev = v;
      prev_x = x;
    }
  }
  std::sort(out.begin(), out.end());
  std::vector<double> unique;
  for (double k : out)
    if (unique.empty() || k - unique.back() > 1e-10) unique.push_back(k);
  return unique;
}

RewardExpr parse(std::string_view text) { return Parser(text).parse_all(); }

double eval(const RewardExpr& e, double x) { return e(x); }

RewardExpr differentiate(const RewardExpr& e, int order) {
  if (order < 1 || order > 2) throw std::invalid_argument("differentiate: order must be 1 or 2");
  return e.derivative(order);
}

}  // namespace osp
