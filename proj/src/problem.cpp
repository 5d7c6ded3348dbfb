#include "osp/problem.hpp"

#include <cmath>
#include <stdexcept>

namespace osp {

std::string to_string(Side s) { return s == Side::right ? "right" : "left"; }

std::string to_string(SideChoice s) {
  switch (s) {
    case SideChoice::right:
      return "right";
    case SideChoice::left:
      return "left";
    case SideChoice::two_sided:
      return "two_sided";
    case SideChoice::automatic:
      return "auto";
  }
  return "auto";
}

void Problem::validate() const {
  if (!(beta > 0.0) || !std::isfinite(beta)) throw std::invalid_argument("beta must be a positive number (1/time)");
  if (is_chain()) {
    const auto& c = std::get<FiniteCTMC>(process);
    c.validate();
    if (static_cast<int>(chain_reward.size()) != c.n_states())
      throw std::invalid_argument("chain reward needs one value per state");
    if (side == SideChoice::left || side == SideChoice::right)
      throw std::invalid_argument("chains support side = two_sided or auto only");
  } else {
    if (side == SideChoice::two_sided)
      throw std::invalid_argument("two-sided rules are supported for chains only");
    if (const auto* d = std::get_if<LinearDiffusion>(&process)) d->validate();
    if (const auto* l = std::get_if<LevyModel>(&process)) l->validate();
  }
  const auto& o = options;
  if (o.grid_points < 2) throw std::invalid_argument("solver.grid_points must be >= 2");
  if (o.search_lo && o.search_hi && !(*o.search_lo < *o.search_hi))
    throw std::invalid_argument("solver.search_lo must be below solver.search_hi");
  if (!(o.damping > 0.0 && o.damping <= 1.0)) throw std::invalid_argument("solver.damping must be in (0, 1]");
  if (o.max_iterations < 1) throw std::invalid_argument("solver.max_iterations must be >= 1");
  if (!(o.step_fraction > 0.0)) throw std::invalid_argument("solver.step_fraction must be > 0");
  if (o.value_points < 2) throw std::invalid_argument("solver.value_points must be >= 2");
}

}  // namespace osp
