#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "osp/exp_poly.hpp"
#include "osp/generator.hpp"
#include "osp/numerics.hpp"
#include "osp/problem.hpp"
#include "osp/processes.hpp"

namespace osp {

struct ConditionCheck {
  std::string name;
  bool passed = true;
  double worst = 0.0;  // largest violation margin seen (<= 0 when passed)
  std::string detail;
};

struct ConditionReport {
  std::vector<ConditionCheck> checks;
  /// Hypotheses that are assumed and not checked numerically.
  std::vector<std::string> assumptions;
  bool certified() const;
  const ConditionCheck* find(const std::string& name) const;
};

/**
 * Representing function and threshold of a one-sided problem.
 *
 * For side == right: f_hat = 0 on (-inf, x*) and max(Q, 0) on [x*, inf);
 * for side == left the same with the inequalities reversed.
 */
struct ThresholdSolution {
  RealFn q;
  std::optional<ExpPoly> q_closed;
  double x_star = 0.0;
  Side side = Side::right;
  bool immediate_stop = false;
  double search_lo = 0.0;
  double search_hi = 0.0;
  double scale = 1.0;  // local length scale used for grids and tolerances
  double q_at_threshold = 0.0;
  double tail_bound = 0.0;  // truncation bound of the left-tail quadrature
  ConditionReport conditions;

  double f_hat(double x) const;
};

/// Q(z) = (1/beta) E f~(z + I_T), closed form on the exponential-polynomial class.
/// Valid when every rate a of G has psi(a) < beta.
ExpPoly q_levy(const LevyModel& l, const FTilde& ftilde, double beta);

/// The Q with E Q(z + M_T) = G(z). Agrees with q_levy whenever that is
/// valid, and stays finite when some rate of G is beta-harmonic
/// (psi(a) = beta), where f~ loses that term.
ExpPoly q_levy_from_reward(const LevyModel& l, const ExpPoly& G, double beta);

/// True when every exponential rate a of G satisfies psi(a) < beta.
bool resolvent_route_applicable(const LevyModel& l, const ExpPoly& G, double beta);

struct QOptions {
  double lo = -10.0;  // table range: Q is evaluable on [lower_limit(), hi]
  double hi = 10.0;
  double rel_tol = 1e-10;
  double tail_rel = 1e-14;
  double cell_scales = 0.25;  // table spacing in local scales
};

/**
 * Q(z) = (1/beta) N(z) / D(z) with N(z) = int_l^z f~ psi m and
 * D(z) = int_l^z psi m (+ psi'(l)/(beta s'(l)) when l is absorbing).
 *
 * N and D are tabulated cumulatively on one grid in a log-scaled form
 * (relative to the exact value of D, psi'(z)/(beta s'(z))) so that Q can be
 * evaluated over ranges where psi spans many orders of magnitude.
 */
class DiffusionQ {
 public:
  DiffusionQ(std::shared_ptr<const FundamentalPair> fp, FTilde ftilde, double beta, const QOptions& options);

  double operator()(double z) const;
  /// N(z) and D(z), both divided by psi'(z)/(beta s'(z)).
  std::pair<double, double> scaled_integrals(double z) const;
  double lower_limit() const { return nodes_.front(); }
  double upper_limit() const { return nodes_.back(); }
  /// Relative bound on the neglected part of the left tail.
  double tail_bound() const { return tail_bound_; }
  /// max |D_quadrature / (psi'/(beta s')) - 1| over the table.
  double normalization_error() const { return normalization_error_; }

 private:
  double log_reference(double z) const;
  double weight(double y, double log_ref) const;
  std::pair<double, double> cell(double a, double b, double log_ref) const;

  std::shared_ptr<const FundamentalPair> fp_;
  FTilde ftilde_;
  double beta_;
  QOptions options_;
  std::vector<double> kinks_;
  std::vector<double> nodes_;
  std::vector<double> log_ref_;
  std::vector<double> n_;  // N(node) * exp(-log_ref)
  std::vector<double> d_;  // D(node) * exp(-log_ref)
  double tail_bound_ = 0.0;
  double normalization_error_ = 0.0;
};

struct ThresholdSearch {
  double lo = 0.0;
  double hi = 1.0;
  int grid_points = 512;
  double tol = 1e-12;
};

/// x* = smallest z after which Q stays positive: the right-most grid point
/// with Q <= 0 followed by bisection on the sign of Q. If Q > 0 on the
/// whole grid (Q(lo) = 0 allowed) the solution stops immediately at lo.
/// Throws std::runtime_error if Q <= 0 at the right end of the interval.
ThresholdSolution find_threshold(const RealFn& q, const ThresholdSearch& search);

/// Maps process, reward and search bounds through x -> -x.
Problem mirror_left(const Problem& p);
/// Maps a solution through x -> -x (and flips its side).
ThresholdSolution mirror_solution(const ThresholdSolution& s);

struct ConditionOptions {
  int probe_points = 200;
  double probe_scales = 5.0;
  int check_points = 21;
  double tol = 1e-6;  // relative, against max(1, |G|)
  double domain_left = -kInf;
};

/// Grid checks of the one-sided verification conditions for a right-sided
/// solution. `expected_sup(x)` is E_x sup_{t<=T} f_hat(X_t).
ConditionReport validate_theorem_conditions(const ThresholdSolution& sol, const RealFn& G,
                                            const RealFn& expected_sup, const ConditionOptions& options);

}  // namespace osp
