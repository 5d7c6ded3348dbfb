#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace osp {

/// Raised when an expression is evaluated outside its domain
/// (log of a non-positive number, division by zero, real power of a
/// non-positive base).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Raised by parse() on malformed input. `position()` is the byte offset
/// of the offending token.
class ParseError : public std::invalid_argument {
 public:
  ParseError(const std::string& what, std::size_t position)
      : std::invalid_argument(what + " at position " + std::to_string(position)),
        position_(position) {}
  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

/// Distance to a kink (pos/max/min/gate switch point) below which an
/// evaluation is flagged.
inline constexpr double kKinkTolerance = 1e-12;

/**
 * Immutable expression tree in one real variable `x`.
 *
 * Node set: constants, `x`, + - * /, unary minus, ^, exp, log, pos, max,
 * min. `gate(u, du, v)` is an internal node produced by differentiation of
 * pos/max/min: it evaluates to v where u > 0, to 0 where u < 0, and at
 * u == 0 to v if du > 0 else 0, which makes derivatives right-derivatives
 * at kinks. It prints and parses like any other function.
 *
 * Copies share the tree; all operations are const and thread-safe.
 */
class RewardExpr {
 public:
  enum class Op { Const, Var, Add, Sub, Mul, Div, Pow, Neg, Exp, Log, Pos, Max, Min, Gate };

  struct Node {
    Op op = Op::Const;
    double value = 0.0;
    std::array<std::shared_ptr<const Node>, 3> kids{};
  };

  struct Evaluation {
    double value = 0.0;
    bool kink = false;
  };

  /// The constant 0.
  RewardExpr();

  static RewardExpr constant(double c);
  static RewardExpr variable();

  static RewardExpr exp(const RewardExpr& a);
  static RewardExpr log(const RewardExpr& a);
  static RewardExpr pos(const RewardExpr& a);
  static RewardExpr max(const RewardExpr& a, const RewardExpr& b);
  static RewardExpr min(const RewardExpr& a, const RewardExpr& b);
  static RewardExpr pow(const RewardExpr& base, const RewardExpr& exponent);
  static RewardExpr gate(const RewardExpr& u, const RewardExpr& du, const RewardExpr& v);

  double operator()(double x) const;
  Evaluation evaluate(double x) const;

  /// Exact symbolic derivative of the given order (>= 0).
  RewardExpr derivative(int order = 1) const;

  /// Composition: this(inner(x)).
  RewardExpr compose(const RewardExpr& inner) const;

  /// Fully parenthesized text that parse() maps back to an equal tree.
  std::string str() const;

  bool is_constant() const { return root_->op == Op::Const; }
  std::optional<double> constant_value() const;
  Op op() const { return root_->op; }
  std::size_t arity() const;
  RewardExpr child(std::size_t i) const;
  bool depends_on_x() const;

  /// Points in [lo, hi] where a pos/max/min/gate switch occurs, sorted.
  /// Located by a sign scan on `scan_points` nodes followed by bisection.
  std::vector<double> kinks(double lo, double hi, int scan_points = 2048) const;

  friend RewardExpr operator+(const RewardExpr& a, const RewardExpr& b);
  friend RewardExpr operator-(const RewardExpr& a, const RewardExpr& b);
  friend RewardExpr operator*(const RewardExpr& a, const RewardExpr& b);
  friend RewardExpr operator/(const RewardExpr& a, const RewardExpr& b);
  friend RewardExpr operator-(const RewardExpr& a);

  const std::shared_ptr<const Node>& node() const { return root_; }

 private:
  explicit RewardExpr(std::shared_ptr<const Node> root) : root_(std::move(root)) {}
  static RewardExpr make(Op op, double value, std::shared_ptr<const Node> a = nullptr,
                         std::shared_ptr<const Node> b = nullptr,
                         std::shared_ptr<const Node> c = nullptr);

  std::shared_ptr<const Node> root_;
};

RewardExpr parse(std::string_view text);
double eval(const RewardExpr& e, double x);
RewardExpr differentiate(const RewardExpr& e, int order);

}  // namespace osp
