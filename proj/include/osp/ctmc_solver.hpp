#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "osp/processes.hpp"
#include "osp/qsolver.hpp"

namespace osp {

/// Levels closer than this are merged.
inline constexpr double kLevelTieTolerance = 1e-14;

/**
 * U(f)(i) = E_i sup_{t<=T} f(X_t), exactly, by level decomposition:
 * with distinct levels c_1 < ... < c_m and A_k = {f >= c_k},
 * U(f) = c_1 + sum_{k>=2} (c_k - c_{k-1}) P_i(H_{A_k} < T).
 */
std::vector<double> running_max_expectation(const FiniteCTMC& c, std::span<const double> f, double beta);

/// P_i(H_A < T) for every state i, T ~ Exp(beta).
std::vector<double> hitting_probability(const FiniteCTMC& c, const std::vector<bool>& in_set, double beta);

struct ChainOptions {
  double damping = 0.5;
  int max_iterations = 100000;
  double residual_tol = 1e-12;
};

struct ChainSolution {
  std::vector<double> f_hat;
  std::vector<int> stopping_region;  // {i : f_hat(i) > 0}, 0-based
  std::vector<double> u_check;       // U(f_hat)
  std::optional<std::pair<int, int>> two_sided_bounds;  // (x_*, x^*) as 0-based states
  int iterations = 0;
  double residual = 0.0;                // sup |U(f_hat) - G|
  std::vector<double> residual_history;  // every 100th iteration and the last
  bool polished = false;                 // finished by an exact solve on the final level order
};

/// Finds f_hat with U(f_hat) = G by the damped iteration
/// f <- f + damping (G - U(f)), starting at G with the states where G is
/// maximal pinned to G. Throws std::runtime_error on non-convergence.
ChainSolution invert_representation(const FiniteCTMC& c, const std::vector<double>& G, double beta,
                                    const ChainOptions& options = {});

struct TwoSidedReport {
  ConditionReport conditions;
  std::optional<int> lower;  // x_*, 0-based state
  std::optional<int> upper;  // x^*
  bool stop_everywhere = false;
  bool certified() const { return conditions.certified(); }
};

/// Checks the two-sided verification conditions for the states listed in
/// `order` (a total order, 0-based indices), and fills the bounds.
TwoSidedReport check_two_sided(ChainSolution& sol, const std::vector<double>& G, const std::vector<int>& order,
                               double tol = 1e-12);

/// V = U(f_hat clamped to 0 off the stopping region).
std::vector<double> value_ctmc(const ChainSolution& sol, const FiniteCTMC& c, double beta);

}  // namespace osp
