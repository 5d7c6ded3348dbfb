#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "osp/processes.hpp"
#include "osp/simulation.hpp"
#include "osp/solve.hpp"

namespace osp {

/// Stopping rule evaluated by simulation. Chain states are 0-based indices.
struct Policy {
  enum class Kind { threshold_right, threshold_left, two_sided, state_set, immediate };

  Kind kind = Kind::immediate;
  double a = 0.0;  // two_sided: lower level; threshold_left: the level
  double b = 0.0;  // threshold_right and two_sided: upper level
  std::vector<int> states;
  std::string description;

  static Policy threshold_right(double b);
  static Policy threshold_left(double a);
  static Policy two_sided(double a, double b);
  static Policy state_set(std::vector<int> states, const std::string& label = "");
  static Policy immediate();

  bool stops(double x) const;
  void validate() const;
};

struct SimulationOptions {
  std::size_t n_paths = 100000;
  double dt = 1e-3;
  std::uint64_t seed = 1;
  /// Detect crossings between grid points for continuous constant-coefficient
  /// models with the Brownian-bridge crossing probability. Off by default:
  /// crossings are then only seen on the dt skeleton.
  bool bridge = false;
};

/// Payoff G(X_tau) 1{tau < T} per path, T ~ Exp(beta) drawn per path.
std::vector<double> policy_payoffs(const ProcessModel& p, const Policy& pol, const RealFn& G, double beta, double x0,
                                   const SimulationOptions& o);

Estimate evaluate_policy(const ProcessModel& p, const Policy& pol, const RealFn& G, double beta, double x0,
                         const SimulationOptions& o);

struct SweepRow {
  std::string policy;
  double delta = 0.0;
  Estimate estimate;
  double difference = 0.0;   // estimate(reference) - estimate(this)
  double combined_se = 0.0;  // sqrt(se_ref^2 + se^2)
  bool passed = true;        // difference >= -3 combined_se
};

/// Policies whose thresholds are moved by each delta (same random numbers
/// for every policy). Thresholds outside the state interval are skipped.
std::vector<SweepRow> perturbation_sweep(const ProcessModel& p, const Policy& reference, const RealFn& G, double beta,
                                         double x0, const std::vector<double>& deltas, const SimulationOptions& o,
                                         double domain_left = -kInf, double domain_right = kInf);

/// Chains: the reference state set against every set that differs in one state.
std::vector<SweepRow> state_toggle_sweep(const FiniteCTMC& c, const std::vector<int>& reference,
                                         const std::vector<double>& G, double beta, int x0,
                                         const SimulationOptions& o);

struct ExcessivityRow {
  double t = 0.0;
  double x = 0.0;
  Estimate estimate;  // of e^{-beta t} E_x V(X_t)
  double value = 0.0; // V(x)
  bool passed = true; // estimate <= V(x) + 3 SE
};

std::vector<ExcessivityRow> excessivity_test(const RealFn& V, const ProcessModel& p, double beta,
                                             const std::vector<double>& times, const std::vector<double>& xs,
                                             const SimulationOptions& o);

struct VerifyOptions {
  SimulationOptions sim;
  std::vector<double> deltas{-1.0, -0.5, 0.5, 1.0};
  std::vector<double> x0s;          // empty: derived from the solution
  std::optional<double> sweep_x0;   // empty: derived from the solution
  std::vector<double> times{0.0, 0.1, 0.5, 1.0};
  std::vector<double> excessivity_xs;  // empty: derived from the solution
  std::size_t excessivity_paths = 100000;
  /// Added to the computed threshold before the policy checks; nonzero values
  /// exercise the red-flag path.
  double threshold_shift = 0.0;
  bool dt_halving = true;
};

/// One line of the verification report. status is pass, fail or info.
struct VerifyRow {
  std::string check;
  std::string policy;
  double x0 = 0.0;
  double t = 0.0;
  double delta = 0.0;
  double estimate = 0.0;
  double se = 0.0;
  double reference = 0.0;
  std::size_t n_paths = 0;
  double dt = 0.0;
  std::uint64_t seed = 0;
  std::string status;
};

struct VerificationReport {
  std::vector<VerifyRow> rows;
  bool red_flag() const;
};

/// Policy value, perturbation sweep, excessivity and majorant checks for a
/// solved problem. Deterministic in (solution, options).
VerificationReport run_verification(const Solution& sol, const VerifyOptions& o);

}  // namespace osp
