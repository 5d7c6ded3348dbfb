#pragma once

#include <limits>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <tuple>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "osp/reward_expr.hpp"

namespace osp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// ---------------------------------------------------------------------------
// One-dimensional diffusions
// ---------------------------------------------------------------------------

enum class BoundaryKind { natural, absorbing };

struct BrownianMotion {
  double sigma = 1.0;
};
struct BrownianWithDrift {
  double mu = 0.0;
  double sigma = 1.0;
};
/// dX = -gamma X dt + dW
struct OrnsteinUhlenbeck {
  double gamma = 1.0;
};
using DiffusionClosedForm = std::variant<BrownianMotion, BrownianWithDrift, OrnsteinUhlenbeck>;

/// Regular diffusion with generator 1/2 sigma2(x) u'' + mu(x) u' on (left, right).
struct LinearDiffusion {
  RewardExpr drift;     // mu(x)
  RewardExpr variance;  // sigma2(x), units x^2/time
  double left = -kInf;
  double right = kInf;
  BoundaryKind left_kind = BoundaryKind::natural;
  BoundaryKind right_kind = BoundaryKind::natural;
  std::optional<DiffusionClosedForm> closed_form;

  static LinearDiffusion brownian(double sigma = 1.0);
  static LinearDiffusion brownian_with_drift(double mu, double sigma);
  static LinearDiffusion ornstein_uhlenbeck(double gamma);
  /// Brownian motion on (level, inf) absorbed at `level`.
  static LinearDiffusion absorbed_brownian(double sigma = 1.0, double level = 0.0);
  static LinearDiffusion general(RewardExpr drift, RewardExpr variance, double left, BoundaryKind left_kind,
                                 double right, BoundaryKind right_kind);

  double mu(double x) const;
  double sigma2(double x) const;

  /// Typical displacement before an independent Exp(beta) time, at x.
  double local_scale(double beta, double x) const;

  /// log s'(x) for closed forms (normalized to 0 at x = 0); nullopt otherwise.
  std::optional<double> closed_log_scale_density(double x) const;

  /// Process x -> -x.
  LinearDiffusion mirrored() const;

  /// Throws std::invalid_argument if sigma2 <= 0 somewhere on a scan of
  /// the (finite part of the) interior.
  void validate() const;

  std::string describe() const;
};

struct PairOptions {
  double lo = -10.0;            // region where psi/phi are needed
  double hi = 10.0;
  double step_fraction = 0.01;  // RK4 step times the local exponential rate
  double burn_in_scales = 12.0; // far-start distance in units of local_scale
};

/**
 * Fundamental increasing/decreasing solutions psi, phi of
 * 1/2 sigma2 u'' + mu u' = beta u, together with the speed and scale
 * densities and the scale-normalized Wronskian.
 *
 * Values are carried in log-scaled form so that ratios over long distances
 * do not overflow. Numeric solutions are only determined up to a positive
 * factor (`ratios_only()`); every quantity derived here (hitting transforms,
 * resolvent kernel, conditional laws) is invariant under that factor.
 */
class FundamentalPair {
 public:
  /// u(x) = exp(log_scale) * value, u'(x) = exp(log_scale) * slope
  struct State {
    double log_scale = 0.0;
    double value = 1.0;
    double slope = 0.0;
    double log_scale_density = 0.0;  // log s'(x); filled for psi only
  };

  class Branch {
   public:
    virtual ~Branch() = default;
    virtual State at(double x) const = 0;
    /// Same as at(x), but numeric branches continue from the stored node
    /// nearest `anchor`, so nearby evaluations share one smooth local piece.
    virtual State at_near(double x, double anchor) const {
      (void)anchor;
      return at(x);
    }
  };

  FundamentalPair(std::shared_ptr<const Branch> psi, std::shared_ptr<const Branch> phi, const LinearDiffusion& d,
                  double beta, bool closed_form, double lo, double hi);

  State psi_state(double x) const;
  State phi_state(double x) const;

  double psi(double x) const;
  double phi(double x) const;
  double psi_prime(double x) const;
  double phi_prime(double x) const;
  double log_psi(double x) const;
  double log_phi(double x) const;

  double log_scale_density(double x) const;
  double log_speed_density(double x) const;
  double speed_density(double x) const;

  /// log of (psi' phi - psi phi') / s', constant in x.
  double log_wronskian() const { return log_wronskian_; }
  /// Relative spread of the Wronskian over the validation grid.
  double wronskian_spread() const { return wronskian_spread_; }

  bool closed_form() const { return closed_form_; }
  bool ratios_only() const { return !closed_form_; }
  double beta() const { return beta_; }
  double lo() const { return lo_; }
  double hi() const { return hi_; }
  const LinearDiffusion& diffusion() const { return diffusion_; }

  /// max over the grid of |1/2 sigma2 u'' + mu u' - beta u| / (1 + |u|) with
  /// u normalized to 1 at the grid midpoint; u'' by a 4-point stencil on u'.
  double max_ode_residual(const std::vector<double>& grid, bool use_psi) const;

 private:
  std::shared_ptr<const Branch> psi_;
  std::shared_ptr<const Branch> phi_;
  LinearDiffusion diffusion_;
  double beta_;
  bool closed_form_;
  double lo_, hi_;
  double log_wronskian_ = 0.0;
  double wronskian_spread_ = 0.0;
  double scale_offset_ = 0.0;
  double psi_offset_ = 0.0;
  double phi_offset_ = 0.0;
};

/// Closed forms for tagged constant-coefficient diffusions, numeric RK4
/// integration with per-step renormalization otherwise.
FundamentalPair fundamental_pair(const LinearDiffusion& d, double beta, const PairOptions& options = {});

/// E_x exp(-beta H_y) = psi(x)/psi(y) for x <= y, phi(x)/phi(y) otherwise.
double hitting_transform(const FundamentalPair& fp, double x, double y);

/// u_beta(x, y) = psi(min) phi(max) / w_beta with respect to the speed measure.
double resolvent_kernel(const FundamentalPair& fp, const LinearDiffusion& d, double x, double y);

/// u_beta(x, y) m(y), assembled in logs so that the arbitrary normalization
/// of the scale density cannot overflow.
double resolvent_density(const FundamentalPair& fp, double x, double y);

// ---------------------------------------------------------------------------
// Lévy models with rational Wiener-Hopf factors
// ---------------------------------------------------------------------------

enum class JumpSide { positive, negative };

/// Laplace exponent psi(theta) = log E exp(theta X_1)
///   = mu theta + sigma^2 theta^2 / 2 + rate (eta / (eta -+ theta) - 1),
/// with exponentially distributed jumps of mean 1/eta on one side.
struct LevyModel {
  enum class Kind { brownian_with_drift, one_sided_jump_diffusion };

  Kind kind = Kind::brownian_with_drift;
  double mu = 0.0;
  double sigma = 1.0;
  JumpSide jump_side = JumpSide::positive;
  double jump_rate = 0.0;
  double jump_decay = 1.0;  // eta

  static LevyModel brownian_with_drift(double mu, double sigma);
  static LevyModel jump_diffusion(double mu, double sigma, JumpSide side, double jump_rate, double jump_decay);

  void validate() const;
  bool has_jumps() const { return kind == Kind::one_sided_jump_diffusion && jump_rate > 0.0; }
  bool has_positive_jumps() const { return has_jumps() && jump_side == JumpSide::positive; }
  bool has_negative_jumps() const { return has_jumps() && jump_side == JumpSide::negative; }

  /// Open interval of theta on which the exponent is finite.
  std::pair<double, double> strip() const;
  double laplace_exponent(double theta) const;
  /// order-th derivative of the exponent.
  double laplace_exponent_derivative(double theta, int order) const;
  /// Rational continuation of the exponent across the pole at the jump
  /// decay; equals laplace_exponent_derivative inside the strip.
  double rational_exponent(double theta, int order) const;
  /// E X_1
  double mean() const { return laplace_exponent_derivative(0.0, 1); }

  /// Real roots of psi(theta) = beta, ascending. Throws if the root
  /// multiset does not have the structure required by the kind.
  std::vector<double> cramer_lundberg_roots(double beta) const;

  LevyModel mirrored() const;
  std::string describe() const;
};

/**
 * Law of M_T (max_at_T, supported on [0, inf)) or I_T (min_at_T, on
 * (-inf, 0]) as an atom at 0 plus a mixture of exponentials in |Y|.
 */
struct ExtremeLaw {
  enum class Which { max_at_T, min_at_T };

  Which which = Which::max_at_T;
  double atom = 0.0;
  std::vector<double> weights;
  std::vector<double> rates;

  double sign() const { return which == Which::max_at_T ? 1.0 : -1.0; }
  double cdf(double y) const;
  double pdf(double y) const;
  double moment(int k) const;
  double mean() const { return moment(1); }
  /// E exp(a Y); throws std::domain_error when divergent.
  double mgf(double a) const;
  double sample(std::mt19937_64& rng) const;
  ExtremeLaw negated() const;
  void validate() const;
};

/// (law of M_T, law of I_T) for T ~ Exp(beta) independent of X.
std::pair<ExtremeLaw, ExtremeLaw> wh_factor_laws(const LevyModel& l, double beta);

// ---------------------------------------------------------------------------
// Finite continuous-time Markov chains
// ---------------------------------------------------------------------------

struct FiniteCTMC {
  Eigen::MatrixXd rates;  // generator: off-diagonal >= 0, rows sum to 0
  std::vector<std::string> labels;

  /// Builds the generator from (from, to, rate) triples over 0-based states.
  static FiniteCTMC from_transitions(int n_states, const std::vector<std::tuple<int, int, double>>& transitions,
                                     std::vector<std::string> labels = {});

  int n_states() const { return static_cast<int>(rates.rows()); }
  double exit_rate(int i) const { return -rates(i, i); }
  bool is_absorbing(int i) const;
  int index_of(const std::string& label) const;
  void validate() const;
};

using ProcessModel = std::variant<LinearDiffusion, LevyModel, FiniteCTMC>;

std::string describe(const ProcessModel& p);

}  // namespace osp
