#pragma once

#include <optional>
#include <span>
#include <vector>

#include "osp/exp_poly.hpp"
#include "osp/processes.hpp"
#include "osp/reward_expr.hpp"

namespace osp {

enum class Family { diffusion, levy, ctmc };

/// f~ = (beta - A) G for one process family.
struct FTilde {
  Family family = Family::diffusion;
  /// Symbolic form (diffusions and Lévy models).
  RewardExpr expr;
  /// Closed form on the exponential-polynomial class (Lévy models; also
  /// set for diffusions when the reward falls in that class).
  std::optional<ExpPoly> closed;
  /// pos() was replaced by its argument to reach the closed form.
  bool smooth_extension = false;
  /// Chains: f~ per state.
  std::vector<double> values;

  double operator()(double x) const;
  RewardExpr::Evaluation evaluate(double x) const;
};

/// f~ = beta G - 1/2 sigma2 G'' - mu G', assembled symbolically.
FTilde apply_generator_diffusion(const LinearDiffusion& d, const RewardExpr& G, double beta);

/// Closed-form (beta - A) G for G in the exponential-polynomial class,
/// using A[x^k e^{ax}] = sum_j C(k,j) psi^{(j)}(a) x^{k-j} e^{ax}.
/// Throws std::invalid_argument for other shapes or when some rate a lies
/// outside the strip of the Laplace exponent.
FTilde apply_generator_levy(const LevyModel& l, const RewardExpr& G, double beta);

/// f~(i) = beta G(i) - sum_j rate(i,j) (G(j) - G(i)).
FTilde apply_generator_ctmc(const FiniteCTMC& c, const std::vector<double>& G, double beta);

/// z -> E f(z + Y) for Y with the given law, in closed form.
/// Throws std::domain_error when an exponential moment diverges.
ExpPoly expect_shifted(const ExpPoly& f, const ExtremeLaw& law);

/// The q with E q(z + Y) = g(z) for all z, solved rate by rate as a
/// triangular system in the powers of z.
ExpPoly invert_shifted(const ExpPoly& g, const ExtremeLaw& law);

// ---------------------------------------------------------------------------
// Appell polynomials
// ---------------------------------------------------------------------------

/// Coefficients in increasing powers of x.
using Polynomial = std::vector<double>;

double evaluate(const Polynomial& p, double x);
Polynomial derivative(const Polynomial& p);

/// Q_0..Q_n with E Q_k(x + Y) = x^k, from the moments m_0 = 1, m_1.. m_n of Y:
/// Q_k = x^k - sum_{j<k} C(k,j) m_{k-j} Q_j.
std::vector<Polynomial> appell_polynomials(std::span<const double> moments, int n_max);
std::vector<Polynomial> appell_polynomials(const ExtremeLaw& law, int n_max);

/// Moments E (M + I)^k, k = 0..n, of the independent sum.
std::vector<double> sum_moments(const ExtremeLaw& a, const ExtremeLaw& b, int n);

struct AppellCheck {
  int n = 0;
  /// max over coefficients of Q^X_n(x+y) - sum_k C(n,k) Q^M_k(x) Q^I_{n-k}(y)
  double convolution_deviation = 0.0;
  /// max over coefficients of E[f~_n(z + I_T)] / beta - Q^M_n(z), with
  /// f~_n = (beta - A) x^n from the generator
  double representing_deviation = 0.0;
  /// max over k <= n and coefficients of Q_k' - k Q_{k-1}, for M_T, I_T, X_T
  double derivative_deviation = 0.0;
  std::vector<Polynomial> max_family;
};

AppellCheck appell_convolution_check(const LevyModel& l, double beta, int n);

}  // namespace osp
