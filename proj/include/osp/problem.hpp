#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "osp/processes.hpp"
#include "osp/reward_expr.hpp"

namespace osp {

enum class Side { right, left };
enum class SideChoice { right, left, two_sided, automatic };

std::string to_string(Side s);
std::string to_string(SideChoice s);

struct SolverOptions {
  // Threshold search; unset bounds get defaults from the reward kink and
  // the local scale.
  std::optional<double> search_lo;
  std::optional<double> search_hi;
  int grid_points = 512;
  double threshold_tol = 1e-12;
  double search_scales = 20.0;
  // Quadrature.
  double quad_rel_tol = 1e-10;
  double tail_rel = 1e-14;
  // Numeric fundamental solutions.
  double step_fraction = 0.01;
  // Condition checks.
  int probe_points = 200;
  double probe_scales = 5.0;
  double condition_tol = 1e-6;
  // Value grid: value_points points over x* +- value_scales local scales.
  int value_points = 41;
  double value_scales = 5.0;
  double route_tol = 1e-6;
  // Chain inversion.
  double damping = 0.5;
  int max_iterations = 100000;
  double residual_tol = 1e-12;
};

/// A discounted optimal stopping problem: sup_tau E_x e^{-beta tau} G(X_tau).
struct Problem {
  ProcessModel process;
  RewardExpr reward;                 // diffusions and Lévy models
  std::vector<double> chain_reward;  // chains: G per state
  double beta = 1.0;
  SideChoice side = SideChoice::automatic;
  SolverOptions options;

  bool is_chain() const { return std::holds_alternative<FiniteCTMC>(process); }
  void validate() const;
};

}  // namespace osp
