#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "osp/processes.hpp"

namespace osp {

/// Paths per RNG stream. Block b of a run seeded with s always draws from
/// stream (s, b), so results do not depend on the worker count.
inline constexpr std::size_t kPathsPerBlock = 4096;

std::mt19937_64 stream_rng(std::uint64_t seed, std::uint64_t stream);

/// Worker threads for Monte Carlo runs: OSP_WORKERS if set, else the
/// hardware concurrency.
int worker_count();

/// Evaluates fn once per path and returns the values in path order.
std::vector<double> simulate_values(std::size_t n_paths, std::uint64_t seed,
                                    const std::function<double(std::mt19937_64&)>& fn);

struct Estimate {
  double mean = 0.0;
  double se = 0.0;
  std::size_t n = 0;
};

/// Sample mean and standard error with pairwise summation.
Estimate summarize(std::span<const double> values);

struct Path {
  std::vector<double> t;
  std::vector<double> x;  // for chains: state index
};

/// One trajectory on [0, horizon]: Euler skeleton for diffusions without an
/// exact transition, exact increments on the dt grid for closed-form
/// diffusions and Lévy models, the exact jump chain for CTMCs.
Path simulate_path(const ProcessModel& p, double x0, double horizon, double dt, std::uint64_t seed);

/// Target of a jump out of non-absorbing chain state i, u uniform on [0, 1).
int jump_target(const FiniteCTMC& c, int i, double u);

/// Transition sampler. `advance` moves the state by time h: exactly for
/// Brownian motion (with absorption via the bridge minimum), OU, Lévy
/// models and chains; by Euler-Maruyama substeps of at most dt otherwise.
class Stepper {
 public:
  Stepper(const ProcessModel& p, double dt);
  double advance(double x, double h, std::mt19937_64& rng) const;
  /// True when the state can no longer move (absorbing boundary or state).
  bool absorbed(double x) const;
  const ProcessModel& model() const { return model_; }
  double dt() const { return dt_; }

 private:
  double advance_diffusion(double x, double h, std::mt19937_64& rng) const;
  double advance_levy(const LevyModel& l, double x, double h, std::mt19937_64& rng) const;
  double advance_chain(const FiniteCTMC& c, double x, double h, std::mt19937_64& rng) const;
  double advance_constant(double x, double h, std::mt19937_64& rng) const;

  ProcessModel model_;
  double dt_;
  double sqrt_dt_;
  // Constant drift and volatility without jumps, with absorbing levels
  // (infinite when absent).
  bool constant_ = false;
  double mu_ = 0.0;
  double sigma_ = 0.0;
  double lower_ = -kInf;
  double upper_ = kInf;
  // Exact Ornstein-Uhlenbeck transition over one dt.
  double ou_decay_ = 1.0;
  double ou_sd_ = 0.0;
};

/// (sup, inf) of X - X_0 over [0, T], T ~ Exp(beta), sampled exactly with
/// Brownian-bridge extremes between jumps.
std::pair<double, double> sample_levy_extremes(const LevyModel& l, double beta, std::mt19937_64& rng);

}  // namespace osp
