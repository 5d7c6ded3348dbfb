#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "osp/ctmc_solver.hpp"
#include "osp/generator.hpp"
#include "osp/processes.hpp"
#include "osp/qsolver.hpp"

namespace osp {

enum class Route { max_law, hitting, representing_measure };
std::string to_string(Route r);

/// Everything the value routes need about a right-sided continuous problem
/// (after mirroring, if the original problem was left-sided).
struct ContinuousSetup {
  ProcessModel process;  // LinearDiffusion or LevyModel
  RewardExpr reward;
  double beta = 1.0;
  FTilde ftilde;
  std::shared_ptr<const FundamentalPair> pair;  // diffusions
  std::optional<ExtremeLaw> max_law;           // Lévy: law of M_T
  std::optional<ExtremeLaw> min_law;           // Lévy: law of I_T
  std::vector<double> kinks;   // of f~, used as quadrature breakpoints
  double left_limit = -kInf;   // where left tails are cut (Q table start)
  double right_limit = kInf;   // where right tails are cut (Q table end)
  double scale = 1.0;
  double rel_tol = 1e-10;
  double tail_rel = 1e-15;

  bool is_diffusion() const { return std::holds_alternative<LinearDiffusion>(process); }
  double domain_left() const;
};

/// E_x f_hat(M_T) 1{M_T >= x*}: quadrature of f_hat against the law of the
/// running maximum (diffusions: P_x(M_T > z) = psi(x)/psi(z)).
double value_max_law(const ContinuousSetup& s, const ThresholdSolution& sol, double x);

/// E_x e^{-beta H_{x*}} G(x*) below the threshold, G above. nullopt when the
/// process can jump over the threshold.
std::optional<double> value_hitting(const ContinuousSetup& s, const ThresholdSolution& sol, double x);

/// sigma(dy) = f~(y) m(y) dy on (x*, inf) plus an atom at x*.
struct RepresentingMeasure {
  double atom = 0.0;
  double min_density = 0.0;  // smallest f~ value on a probe grid right of x* (m > 0)
  bool nonnegative = true;
};

RepresentingMeasure representing_measure(const ContinuousSetup& s, const ThresholdSolution& sol);

/// Diffusions: int_{x*}^inf u(x,y) f~(y) m(y) dy + u(x,x*) atom.
/// Lévy models without negative jumps: (1/beta) E_x f~(X_T) 1{X_T > x*}.
/// nullopt for other Lévy models.
std::optional<double> value_representing_measure(const ContinuousSetup& s, const ThresholdSolution& sol, double x);

struct ValueRow {
  double x = 0.0;
  double max_law = 0.0;
  std::optional<double> hitting;
  std::optional<double> measure;
  double reward = 0.0;
  /// max relative difference between the available routes
  double spread = 0.0;
};

/**
 * Value function with its provenance: every evaluation reports each route
 * separately. Coordinates are those of the original problem; left-sided
 * problems are evaluated through the mirror.
 */
class ValueFunction {
 public:
  ValueFunction(std::shared_ptr<const ContinuousSetup> setup, ThresholdSolution working, bool mirrored);

  ValueRow row(double x) const;
  std::vector<ValueRow> table(const std::vector<double>& xs) const;
  /// Max-law route.
  double operator()(double x) const;
  /// G on the stopping region, the hitting route below it when available,
  /// the max-law route otherwise. Cheapest exact evaluation.
  double fast(double x) const;

  const ContinuousSetup& setup() const { return *setup_; }
  const ThresholdSolution& working_solution() const { return working_; }
  bool mirrored() const { return mirrored_; }

 private:
  std::shared_ptr<const ContinuousSetup> setup_;
  ThresholdSolution working_;
  bool mirrored_;
};

/// Relative difference with a floor for values near 0.
double relative_spread(double a, double b);

}  // namespace osp
