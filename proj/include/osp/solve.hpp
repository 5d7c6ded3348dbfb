#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "osp/ctmc_solver.hpp"
#include "osp/problem.hpp"
#include "osp/qsolver.hpp"
#include "osp/valuation.hpp"

namespace osp {

/**
 * Output of the full pipeline for one problem: threshold or stopping set,
 * representing function, value function and the certification checks.
 * Continuous results are in the coordinates of the original problem.
 */
struct Solution {
  Problem problem;         // side resolved (never automatic)
  std::string headline;    // one-line summary for tables
  ConditionReport conditions;
  std::vector<std::string> notes;

  // Diffusions and Lévy models.
  std::optional<ThresholdSolution> threshold;
  std::shared_ptr<const ValueFunction> value;
  std::vector<ValueRow> value_grid;
  double max_route_spread = 0.0;

  // Chains.
  std::optional<ChainSolution> chain;
  std::optional<TwoSidedReport> two_sided;
  std::vector<double> chain_ftilde;
  std::vector<double> chain_value;

  bool is_chain() const { return chain.has_value(); }
  bool certified() const { return conditions.certified(); }
  double reward(double x) const;
  /// V(x); for chains x is a 0-based state index.
  double value_at(double x) const;
  /// Typical length scale of the continuous problem (1 for chains).
  double scale() const;
  /// Lower end of the state space (original coordinates).
  double domain_left() const;
  double domain_right() const;
};

/// Side of the stopping region read off the shape of G: right when G is
/// nondecreasing on a probe grid, left when nonincreasing.
Side detect_side(const Problem& p);

Solution solve(const Problem& p);

}  // namespace osp
