#include "osp/cli/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

namespace osp::cli {

namespace pt = boost::property_tree;

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

const std::vector<std::string> kSections{"problem", "process", "solver", "verify", "output"};

std::string unquote(std::string s) {
  boost::algorithm::trim(s);
  if (s.size() >= 2 && ((s.front() == '"' && s.back() == '"') || (s.front() == '\'' && s.back() == '\'')))
    s = s.substr(1, s.size() - 2);
  return s;
}

double parse_number(const std::string& text, const std::string& where) {
  std::string s = boost::algorithm::trim_copy(text);
  if (!s.empty() && s.front() == '+') s.erase(0, 1);
  double v = 0.0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || p != s.data() + s.size() || std::isnan(v))
    throw ConfigError(where + ": expected a number, got '" + text + "'");
  return v;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> parts;
  std::string s = boost::algorithm::trim_copy(text);
  if (s.empty()) return parts;
  boost::algorithm::split(parts, s, boost::is_any_of(","));
  for (auto& p : parts) boost::algorithm::trim(p);
  return parts;
}

std::string join_numbers(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + num(v[i]);
  return out;
}

enum class Bound { any, positive, nonnegative };

/// Reads one section, records every key (defaults included) in canonical
/// form, and rejects keys that were never asked for.
class SectionReader {
 public:
  SectionReader(const pt::ptree* tree, std::string section, std::vector<ResolvedEntry>& out)
      : tree_(tree), section_(std::move(section)), out_(out) {}

  std::optional<std::string> raw(const std::string& key) {
    used_.insert(key);
    if (!tree_) return std::nullopt;
    auto it = tree_->find(key);
    if (it == tree_->not_found()) return std::nullopt;
    if (!it->second.empty()) throw ConfigError(where(key) + ": nested keys are not supported");
    return unquote(it->second.data());
  }

  double number(const std::string& key, double fallback, Bound bound = Bound::any, const std::string& unit = "") {
    const auto r = raw(key);
    const double v = r ? parse_number(*r, where(key)) : fallback;
    check(key, v, bound, unit);
    record(key, num(v));
    return v;
  }

  std::optional<double> optional_number(const std::string& key) {
    const auto r = raw(key);
    if (!r || r->empty()) return std::nullopt;
    const double v = parse_number(*r, where(key));
    if (!std::isfinite(v)) throw ConfigError(where(key) + ": must be finite");
    record(key, num(v));
    return v;
  }

  double required_number(const std::string& key, Bound bound, const std::string& unit) {
    if (!raw(key)) throw ConfigError(where(key) + ": required key is missing");
    return number(key, 0.0, bound, unit);
  }

  long integer(const std::string& key, long fallback, long min_value) {
    const auto r = raw(key);
    long v = fallback;
    if (r) {
      auto [p, ec] = std::from_chars(r->data(), r->data() + r->size(), v);
      if (r->empty() || ec != std::errc() || p != r->data() + r->size())
        throw ConfigError(where(key) + ": expected an integer, got '" + *r + "'");
    }
    if (v < min_value) throw ConfigError(where(key) + ": must be >= " + std::to_string(min_value));
    record(key, std::to_string(v));
    return v;
  }

  bool flag(const std::string& key, bool fallback) {
    const auto r = raw(key);
    bool v = fallback;
    if (r) {
      const std::string s = boost::algorithm::to_lower_copy(*r);
      if (s == "true" || s == "1" || s == "yes" || s == "on") v = true;
      else if (s == "false" || s == "0" || s == "no" || s == "off") v = false;
      else throw ConfigError(where(key) + ": expected true or false, got '" + *r + "'");
    }
    record(key, v ? "true" : "false");
    return v;
  }

  std::string choice(const std::string& key, const std::string& fallback, const std::vector<std::string>& allowed) {
    const auto r = raw(key);
    const std::string v = r ? boost::algorithm::to_lower_copy(*r) : fallback;
    if (v.empty()) throw ConfigError(where(key) + ": required key is missing");
    if (std::find(allowed.begin(), allowed.end(), v) == allowed.end())
      throw ConfigError(where(key) + ": '" + v + "' is not one of " + boost::algorithm::join(allowed, ", "));
    record(key, v);
    return v;
  }

  std::vector<double> numbers(const std::string& key, const std::vector<double>& fallback) {
    const auto r = raw(key);
    std::vector<double> v = fallback;
    if (r) {
      v.clear();
      for (const auto& p : split_list(*r)) v.push_back(parse_number(p, where(key)));
    }
    for (double d : v)
      if (!std::isfinite(d)) throw ConfigError(where(key) + ": entries must be finite");
    record(key, join_numbers(v));
    return v;
  }

  /// Expression text; recorded quoted.
  std::string text(const std::string& key, const std::string& fallback, bool required) {
    const auto r = raw(key);
    if (!r && required) throw ConfigError(where(key) + ": required key is missing");
    const std::string v = r ? *r : fallback;
    record(key, "\"" + v + "\"");
    return v;
  }

  void record(const std::string& key, const std::string& value) { out_.push_back({section_, key, value}); }

  void finish() const {
    if (!tree_) return;
    for (const auto& [key, _] : *tree_)
      if (!used_.count(key)) throw ConfigError(where(key) + ": unknown key");
  }

  std::string where(const std::string& key) const { return section_ + "." + key; }

 private:
  void check(const std::string& key, double v, Bound bound, const std::string& unit) const {
    const std::string u = unit.empty() ? "" : " (" + unit + ")";
    if (bound == Bound::positive && !(v > 0.0 && std::isfinite(v)))
      throw ConfigError(where(key) + ": must be a finite positive number" + u);
    if (bound == Bound::nonnegative && !(v >= 0.0 && std::isfinite(v)))
      throw ConfigError(where(key) + ": must be a finite nonnegative number" + u);
    if (bound == Bound::any && std::isnan(v)) throw ConfigError(where(key) + ": not a number");
  }

  const pt::ptree* tree_;
  std::string section_;
  std::vector<ResolvedEntry>& out_;
  std::set<std::string> used_;
};

RewardExpr parse_expr(const std::string& text, const std::string& where) {
  try {
    return parse(text);
  } catch (const std::exception& e) {
    throw ConfigError(where + ": " + e.what());
  }
}

BoundaryKind boundary_kind(const std::string& s) {
  return s == "absorbing" ? BoundaryKind::absorbing : BoundaryKind::natural;
}

ProcessModel read_diffusion(SectionReader& r) {
  const auto model = r.choice("model", "brownian",
                              {"brownian", "brownian_with_drift", "ornstein_uhlenbeck", "absorbed_brownian", "general"});
  if (model == "brownian") return LinearDiffusion::brownian(r.number("sigma", 1.0, Bound::positive, "x/sqrt(time)"));
  if (model == "brownian_with_drift") {
    const double mu = r.number("mu", 0.0, Bound::any, "x/time");
    const double sigma = r.number("sigma", 1.0, Bound::positive, "x/sqrt(time)");
    return LinearDiffusion::brownian_with_drift(mu, sigma);
  }
  if (model == "ornstein_uhlenbeck")
    return LinearDiffusion::ornstein_uhlenbeck(r.number("gamma", 1.0, Bound::positive, "1/time"));
  if (model == "absorbed_brownian") {
    const double sigma = r.number("sigma", 1.0, Bound::positive, "x/sqrt(time)");
    const double level = r.number("level", 0.0);
    if (!std::isfinite(level)) throw ConfigError("process.level: must be finite");
    return LinearDiffusion::absorbed_brownian(sigma, level);
  }
  const auto drift = r.text("drift", "", true);
  const auto variance = r.text("variance", "", true);
  const double left = r.number("left", -kInf);
  const double right = r.number("right", kInf);
  const auto lk = r.choice("left_kind", "natural", {"natural", "absorbing"});
  const auto rk = r.choice("right_kind", "natural", {"natural", "absorbing"});
  if (!(left < right)) throw ConfigError("process.left must be below process.right");
  if ((lk == "absorbing" && !std::isfinite(left)) || (rk == "absorbing" && !std::isfinite(right)))
    throw ConfigError("process: absorbing boundaries must be finite");
  return LinearDiffusion::general(parse_expr(drift, "process.drift"), parse_expr(variance, "process.variance"), left,
                                  boundary_kind(lk), right, boundary_kind(rk));
}

ProcessModel read_levy(SectionReader& r) {
  const auto model = r.choice("model", "brownian_with_drift", {"brownian_with_drift", "jump_diffusion"});
  const double mu = r.number("mu", 0.0, Bound::any, "x/time");
  if (!std::isfinite(mu)) throw ConfigError("process.mu: must be finite");
  const double sigma = r.number("sigma", 1.0, Bound::positive, "x/sqrt(time)");
  if (model == "brownian_with_drift") return LevyModel::brownian_with_drift(mu, sigma);
  const auto side = r.choice("jump_side", "positive", {"positive", "negative"});
  const double rate = r.number("jump_rate", 1.0, Bound::nonnegative, "1/time");
  const double decay = r.number("jump_decay", 1.0, Bound::positive, "1/x");
  return LevyModel::jump_diffusion(mu, sigma, side == "positive" ? JumpSide::positive : JumpSide::negative, rate,
                                   decay);
}

ProcessModel read_ctmc(SectionReader& r) {
  std::vector<std::string> labels;
  if (const auto raw = r.raw("labels")) labels = split_list(*raw);
  const long n = r.integer("states", static_cast<long>(labels.size()), 1);
  if (labels.empty())
    for (long i = 1; i <= n; ++i) labels.push_back(std::to_string(i));
  if (static_cast<long>(labels.size()) != n) throw ConfigError("process.labels: needs one label per state");
  if (std::set<std::string>(labels.begin(), labels.end()).size() != labels.size())
    throw ConfigError("process.labels: labels must be distinct");
  r.record("labels", boost::algorithm::join(labels, ", "));

  const auto index = [&](const std::string& label) {
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (labels[i] == label) return static_cast<int>(i);
    throw ConfigError("process.transitions: unknown state '" + label + "'");
  };
  std::vector<std::tuple<int, int, double>> transitions;
  std::vector<std::string> canonical;
  const auto raw = r.raw("transitions");
  if (!raw) throw ConfigError("process.transitions: required key is missing");
  for (const auto& item : split_list(*raw)) {
    const auto gt = item.find('>');
    const auto colon = item.find(':');
    if (gt == std::string::npos || colon == std::string::npos || colon < gt)
      throw ConfigError("process.transitions: expected 'from>to:rate', got '" + item + "'");
    const auto from = boost::algorithm::trim_copy(item.substr(0, gt));
    const auto to = boost::algorithm::trim_copy(item.substr(gt + 1, colon - gt - 1));
    const double rate = parse_number(item.substr(colon + 1), "process.transitions");
    if (!(rate >= 0.0 && std::isfinite(rate)))
      throw ConfigError("process.transitions: rates must be finite and nonnegative (1/time)");
    if (from == to) throw ConfigError("process.transitions: self-transition '" + item + "'");
    transitions.emplace_back(index(from), index(to), rate);
    canonical.push_back(from + ">" + to + ":" + num(rate));
  }
  r.record("transitions", boost::algorithm::join(canonical, ", "));
  try {
    return FiniteCTMC::from_transitions(static_cast<int>(n), transitions, labels);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("process: ") + e.what());
  }
}

void read_solver(SectionReader& r, SolverOptions& o) {
  o.search_lo = r.optional_number("search_lo");
  o.search_hi = r.optional_number("search_hi");
  o.grid_points = static_cast<int>(r.integer("grid_points", o.grid_points, 2));
  o.threshold_tol = r.number("threshold_tol", o.threshold_tol, Bound::positive, "x");
  o.search_scales = r.number("search_scales", o.search_scales, Bound::positive, "local scales");
  o.quad_rel_tol = r.number("quad_rel_tol", o.quad_rel_tol, Bound::positive);
  o.tail_rel = r.number("tail_rel", o.tail_rel, Bound::positive);
  o.step_fraction = r.number("step_fraction", o.step_fraction, Bound::positive);
  o.probe_points = static_cast<int>(r.integer("probe_points", o.probe_points, 2));
  o.probe_scales = r.number("probe_scales", o.probe_scales, Bound::positive, "local scales");
  o.condition_tol = r.number("condition_tol", o.condition_tol, Bound::positive);
  o.value_points = static_cast<int>(r.integer("value_points", o.value_points, 2));
  o.value_scales = r.number("value_scales", o.value_scales, Bound::positive, "local scales");
  o.route_tol = r.number("route_tol", o.route_tol, Bound::positive);
  o.damping = r.number("damping", o.damping, Bound::positive);
  o.max_iterations = static_cast<int>(r.integer("max_iterations", o.max_iterations, 1));
  o.residual_tol = r.number("residual_tol", o.residual_tol, Bound::positive);
}

void read_verify(SectionReader& r, VerifyOptions& v) {
  v.sim.n_paths = static_cast<std::size_t>(r.integer("paths", static_cast<long>(v.sim.n_paths), 2));
  v.sim.dt = r.number("dt", v.sim.dt, Bound::positive, "time");
  const long seed = r.integer("seed", static_cast<long>(v.sim.seed), 0);
  v.sim.seed = static_cast<std::uint64_t>(seed);
  v.sim.bridge = r.flag("bridge", v.sim.bridge);
  v.deltas = r.numbers("deltas", v.deltas);
  v.x0s = r.numbers("x0", v.x0s);
  v.sweep_x0 = r.optional_number("sweep_x0");
  v.times = r.numbers("times", v.times);
  for (double t : v.times)
    if (t < 0.0) throw ConfigError("verify.times: times must be >= 0");
  v.excessivity_xs = r.numbers("excessivity_xs", v.excessivity_xs);
  v.excessivity_paths = static_cast<std::size_t>(r.integer("excessivity_paths", static_cast<long>(v.excessivity_paths), 2));
  v.threshold_shift = r.number("threshold_shift", v.threshold_shift, Bound::any, "x");
  if (!std::isfinite(v.threshold_shift)) throw ConfigError("verify.threshold_shift: must be finite");
  v.dt_halving = r.flag("dt_halving", v.dt_halving);
}

}  // namespace

ProblemConfig parse_config(const std::string& text, const std::string& default_output_dir) {
  pt::ptree tree;
  try {
    std::istringstream in(text);
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  for (const auto& [name, sec] : tree) {
    if (std::find(kSections.begin(), kSections.end(), name) == kSections.end())
      throw ConfigError("config: unknown section or top-level key '" + name + "'");
    if (sec.empty() && !sec.data().empty()) throw ConfigError("config: key '" + name + "' outside a section");
  }
  const auto section = [&](const std::string& name) -> const pt::ptree* {
    auto it = tree.find(name);
    return it == tree.not_found() ? nullptr : &it->second;
  };
  if (!section("problem")) throw ConfigError("config: missing [problem] section");
  if (!section("process")) throw ConfigError("config: missing [process] section");

  ProblemConfig c;
  auto& p = c.problem;

  std::vector<ResolvedEntry> process_entries;
  SectionReader proc(section("process"), "process", process_entries);
  const auto family = proc.choice("family", "", {"diffusion", "levy", "ctmc"});
  if (family == "diffusion") p.process = read_diffusion(proc);
  else if (family == "levy") p.process = read_levy(proc);
  else p.process = read_ctmc(proc);
  proc.finish();

  SectionReader prob(section("problem"), "problem", c.resolved);
  p.beta = prob.required_number("beta", Bound::positive, "1/time");
  if (family == "ctmc") {
    const auto raw = prob.raw("reward");
    if (!raw) throw ConfigError("problem.reward: required key is missing");
    for (const auto& part : split_list(*raw)) p.chain_reward.push_back(parse_number(part, "problem.reward"));
    for (double g : p.chain_reward)
      if (!std::isfinite(g)) throw ConfigError("problem.reward: entries must be finite");
    prob.record("reward", "\"" + join_numbers(p.chain_reward) + "\"");
  } else {
    p.reward = parse_expr(prob.text("reward", "", true), "problem.reward");
  }
  const auto side = prob.choice("side", "auto", {"right", "left", "two_sided", "auto"});
  p.side = side == "right" ? SideChoice::right
           : side == "left" ? SideChoice::left
           : side == "two_sided" ? SideChoice::two_sided
                                 : SideChoice::automatic;
  prob.finish();
  c.resolved.insert(c.resolved.end(), process_entries.begin(), process_entries.end());

  SectionReader solver(section("solver"), "solver", c.resolved);
  read_solver(solver, p.options);
  solver.finish();

  SectionReader verify(section("verify"), "verify", c.resolved);
  read_verify(verify, c.verify);
  verify.finish();

  SectionReader output(section("output"), "output", c.resolved);
  c.output_dir = output.text("dir", default_output_dir, false);
  output.finish();

  try {
    p.validate();
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return c;
}

ProblemConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  const auto stem = std::filesystem::path(path).stem().string();
  return parse_config(ss.str(), "out/" + stem);
}

std::string resolved_text(const ProblemConfig& c) {
  std::string out;
  std::string current;
  for (const auto& e : c.resolved) {
    if (e.section != current) {
      out += (current.empty() ? "" : "\n") + std::string("[") + e.section + "]\n";
      current = e.section;
    }
    out += e.key + " = " + e.value + "\n";
  }
  return out;
}

void override_entry(ProblemConfig& c, const std::string& section, const std::string& key, const std::string& value) {
  for (auto& e : c.resolved)
    if (e.section == section && e.key == key) {
      e.value = value;
      return;
    }
  c.resolved.push_back({section, key, value});
}

}  // namespace osp::cli
