#include "osp/cli/commands.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "osp/cli/config.hpp"
#include "osp/numerics.hpp"
#include "osp/solve.hpp"
#include "osp/verify.hpp"

namespace osp::cli {

namespace fs = std::filesystem;

namespace {

std::string opt_num(const std::optional<double>& v) { return v ? num(*v) : ""; }

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
  return q + "\"";
}

/// Left-aligned columns separated by two spaces.
std::string table(const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width;
  for (const auto& r : rows)
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (width.size() <= i) width.push_back(0);
      width[i] = std::max(width[i], r[i].size());
    }
  std::string out;
  for (const auto& r : rows) {
    std::string line;
    for (std::size_t i = 0; i < r.size(); ++i) {
      line += r[i];
      if (i + 1 < r.size()) line += std::string(width[i] - r[i].size() + 2, ' ');
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out += line + "\n";
  }
  return out;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write '" + path.string() + "'");
  f << content;
  if (!f) throw std::runtime_error("write failed for '" + path.string() + "'");
}

std::string label_of(const Solution& s, int i) {
  const auto& c = std::get<FiniteCTMC>(s.problem.process);
  return c.labels.empty() ? std::to_string(i) : c.labels[static_cast<std::size_t>(i)];
}

std::string summary_text(const Solution& s, const ProblemConfig& cfg) {
  std::vector<std::vector<std::string>> head;
  head.push_back({"process", describe(s.problem.process)});
  if (s.is_chain()) {
    std::string g;
    for (std::size_t i = 0; i < s.problem.chain_reward.size(); ++i)
      g += (i ? ", " : "") + num(s.problem.chain_reward[i]);
    head.push_back({"reward", "G = (" + g + ")"});
  } else {
    head.push_back({"reward", "G(x) = " + s.problem.reward.str()});
  }
  head.push_back({"beta", num(s.problem.beta)});
  head.push_back({"side", to_string(s.problem.side)});
  head.push_back({"result", s.headline});
  if (s.threshold) {
    head.push_back({"threshold", num(s.threshold->x_star)});
    head.push_back({"immediate_stop", s.threshold->immediate_stop ? "true" : "false"});
    head.push_back({"max_route_spread", num(s.max_route_spread)});
  }
  head.push_back({"certified", s.certified() ? "true" : "false"});
  head.push_back({"output_dir", cfg.output_dir});
  std::string out = table(head);

  if (s.is_chain()) {
    std::vector<std::vector<std::string>> rows{{"state", "G", "f_hat", "U(f_hat)", "V", "stop"}};
    const auto& ch = *s.chain;
    for (std::size_t i = 0; i < ch.f_hat.size(); ++i) {
      const bool stop = std::find(ch.stopping_region.begin(), ch.stopping_region.end(), static_cast<int>(i)) !=
                        ch.stopping_region.end();
      rows.push_back({label_of(s, static_cast<int>(i)), num(s.problem.chain_reward[i]), num(ch.f_hat[i]),
                      num(ch.u_check[i]), num(s.chain_value[i]), stop ? "yes" : "no"});
    }
    out += "\n" + table(rows);
  }

  std::vector<std::vector<std::string>> rows{{"check", "status", "worst", "detail"}};
  for (const auto& c : s.conditions.checks)
    rows.push_back({c.name, c.passed ? "PASS" : "FAIL", num(c.worst), c.detail});
  out += "\n" + table(rows);
  if (!s.conditions.assumptions.empty()) {
    out += "\nassumed, not checked:\n";
    for (const auto& a : s.conditions.assumptions) out += "  - " + a + "\n";
  }
  if (!s.notes.empty()) {
    out += "\nnotes:\n";
    for (const auto& n : s.notes) out += "  - " + n + "\n";
  }
  return out;
}

std::string fhat_csv(const Solution& s) {
  std::ostringstream o;
  if (s.is_chain()) {
    o << "state,G,f_tilde,f_hat,V,stop\n";
    const auto& ch = *s.chain;
    for (std::size_t i = 0; i < ch.f_hat.size(); ++i) {
      const bool stop = std::find(ch.stopping_region.begin(), ch.stopping_region.end(), static_cast<int>(i)) !=
                        ch.stopping_region.end();
      o << csv_field(label_of(s, static_cast<int>(i))) << ',' << num(s.problem.chain_reward[i]) << ','
        << (i < s.chain_ftilde.size() ? num(s.chain_ftilde[i]) : "") << ',' << num(ch.f_hat[i]) << ','
        << num(s.chain_value[i]) << ',' << (stop ? 1 : 0) << '\n';
    }
    return o.str();
  }
  o << "x,Q,f_hat,G\n";
  const auto& th = *s.threshold;
  for (const auto& r : s.value_grid) {
    std::string q, fh;
    try {
      q = num(th.q(r.x));
      fh = num(th.f_hat(r.x));
    } catch (const std::exception&) {
      // Outside the tabulated range of Q.
    }
    o << num(r.x) << ',' << q << ',' << fh << ',' << num(r.reward) << '\n';
  }
  return o.str();
}

std::string conditions_csv(const Solution& s) {
  std::ostringstream o;
  o << "check,passed,worst,detail\n";
  for (const auto& c : s.conditions.checks)
    o << csv_field(c.name) << ',' << (c.passed ? 1 : 0) << ',' << num(c.worst) << ',' << csv_field(c.detail) << '\n';
  for (const auto& a : s.conditions.assumptions) o << "assumption,,," << csv_field(a) << '\n';
  return o.str();
}

constexpr const char* kValueHeader = "x,V_max_law,V_hitting,V_measure,G,spread\n";

std::string value_line(const ValueRow& r) {
  return num(r.x) + ',' + num(r.max_law) + ',' + opt_num(r.hitting) + ',' + opt_num(r.measure) + ',' +
         num(r.reward) + ',' + num(r.spread) + '\n';
}

std::string chain_value_csv(const Solution& s, const std::optional<int>& only) {
  std::string out = kValueHeader;
  for (std::size_t i = 0; i < s.chain_value.size(); ++i) {
    if (only && *only != static_cast<int>(i)) continue;
    out += csv_field(label_of(s, static_cast<int>(i))) + ',' + num(s.chain_value[i]) + ",,," +
           num(s.problem.chain_reward[i]) + ",0\n";
  }
  return out;
}

std::string value_csv(const std::vector<ValueRow>& rows) {
  std::string out = kValueHeader;
  for (const auto& r : rows) out += value_line(r);
  return out;
}

/// Loads, solves and writes the solve artifacts. Sets `code` on failure.
struct Run {
  ProblemConfig cfg;
  std::optional<Solution> solution;
  int code = kCertified;
};

Run load(const std::string& path, std::ostream& err) {
  Run run;
  try {
    run.cfg = load_config(path);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    run.code = kInvalidConfig;
  }
  return run;
}

void solve_into(Run& run, std::ostream& err) {
  try {
    run.solution = solve(run.cfg.problem);
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    run.code = kInvalidConfig;
    return;
  } catch (const std::exception& e) {
    err << "error: solver failed: " << e.what() << '\n';
    run.code = kUncertified;
    return;
  }
  run.code = run.solution->certified() ? kCertified : kUncertified;
}

fs::path output_dir(const Run& run) {
  fs::path dir(run.cfg.output_dir);
  fs::create_directories(dir);
  return dir;
}

void write_solve_outputs(const Run& run, const std::string& summary) {
  const auto dir = output_dir(run);
  const auto& s = *run.solution;
  write_file(dir / "solution.txt", summary);
  write_file(dir / "fhat.csv", fhat_csv(s));
  write_file(dir / "conditions.csv", conditions_csv(s));
  write_file(dir / "value.csv", s.is_chain() ? chain_value_csv(s, std::nullopt) : value_csv(s.value_grid));
  write_file(dir / "resolved.cfg", resolved_text(run.cfg));
}

template <class F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kInvalidConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kUncertified;
  }
}

std::string verify_csv(const VerificationReport& rep) {
  std::ostringstream o;
  o << "check,policy,x0,t,delta,estimate,se,reference,n_paths,dt,seed,status\n";
  for (const auto& r : rep.rows)
    o << csv_field(r.check) << ',' << csv_field(r.policy) << ',' << num(r.x0) << ',' << num(r.t) << ','
      << num(r.delta) << ',' << num(r.estimate) << ',' << num(r.se) << ',' << num(r.reference) << ',' << r.n_paths
      << ',' << num(r.dt) << ',' << r.seed << ',' << r.status << '\n';
  return o.str();
}

std::string verify_text(const VerificationReport& rep) {
  std::vector<std::vector<std::string>> rows{
      {"check", "policy", "x0", "t", "delta", "estimate", "se", "reference", "status"}};
  const auto g = [](double v) {
    std::ostringstream o;
    o << std::setprecision(8) << v;
    return o.str();
  };
  for (const auto& r : rep.rows)
    rows.push_back({r.check, r.policy, g(r.x0), g(r.t), g(r.delta), g(r.estimate), g(r.se), g(r.reference),
                    r.status == "pass" ? "PASS" : r.status == "fail" ? "FAIL" : "info"});
  return table(rows);
}

}  // namespace

Grid parse_grid(const std::string& text) {
  Grid g;
  char c1 = 0, c2 = 0;
  std::istringstream in(text);
  if (!(in >> g.lo >> c1 >> g.hi >> c2 >> g.n) || c1 != ':' || c2 != ':' || !(in >> std::ws).eof())
    throw ConfigError("--grid: expected lo:hi:n, got '" + text + "'");
  if (g.n < 1) throw ConfigError("--grid: n must be >= 1");
  if (!std::isfinite(g.lo) || !std::isfinite(g.hi) || (g.n > 1 && !(g.lo < g.hi)))
    throw ConfigError("--grid: need finite lo < hi");
  return g;
}

int cmd_solve(const std::string& config_path, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    Run run = load(config_path, err);
    if (run.code != kCertified) return run.code;
    solve_into(run, err);
    if (!run.solution) return run.code;
    const auto summary = summary_text(*run.solution, run.cfg);
    out << summary;
    write_solve_outputs(run, summary);
    return run.code;
  });
}

int cmd_value(const std::string& config_path, const std::optional<Grid>& grid, const std::optional<double>& at,
              std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (grid && at) throw ConfigError("use either --grid or --at, not both");
    Run run = load(config_path, err);
    if (run.code != kCertified) return run.code;
    solve_into(run, err);
    if (!run.solution) return run.code;
    const auto& s = *run.solution;
    std::string csv;
    if (s.is_chain()) {
      if (grid) throw ConfigError("--grid does not apply to chains; use --at <state>");
      std::optional<int> only;
      if (at) {
        for (int i = 0; i < static_cast<int>(s.chain_value.size()); ++i) {
          std::ostringstream o;
          o << *at;
          if (label_of(s, i) == o.str()) only = i;
        }
        if (!only) throw ConfigError("--at: no state with that label");
      }
      csv = chain_value_csv(s, only);
    } else if (grid || at) {
      std::vector<double> xs = at ? std::vector<double>{*at}
                                  : linspace(grid->lo, grid->hi, static_cast<std::size_t>(grid->n));
      for (double x : xs)
        if (x < s.domain_left() || x > s.domain_right())
          throw ConfigError("value point " + num(x) + " lies outside the state space");
      csv = value_csv(s.value->table(xs));
    } else {
      csv = value_csv(s.value_grid);
    }
    out << csv;
    write_file(output_dir(run) / "value.csv", csv);
    return run.code;
  });
}

int cmd_verify(const std::string& config_path, const std::optional<std::size_t>& paths,
               const std::optional<std::uint64_t>& seed, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    Run run = load(config_path, err);
    if (run.code != kCertified) return run.code;
    if (paths) {
      if (*paths < 2) throw ConfigError("--paths must be >= 2");
      run.cfg.verify.sim.n_paths = *paths;
      override_entry(run.cfg, "verify", "paths", std::to_string(*paths));
    }
    if (seed) {
      run.cfg.verify.sim.seed = *seed;
      override_entry(run.cfg, "verify", "seed", std::to_string(*seed));
    }
    solve_into(run, err);
    if (!run.solution) return run.code;
    const auto summary = summary_text(*run.solution, run.cfg);
    out << summary;
    write_solve_outputs(run, summary);
    if (run.code != kCertified) {
      err << "error: solution is not certified; simulation checks skipped\n";
      return run.code;
    }
    const auto report = run_verification(*run.solution, run.cfg.verify);
    out << '\n' << verify_text(report);
    write_file(output_dir(run) / "verify.csv", verify_csv(report));
    if (report.red_flag()) {
      out << "\nRED FLAG: at least one simulation check failed\n";
      return static_cast<int>(kRedFlag);
    }
    out << "\nall simulation checks passed\n";
    return static_cast<int>(kCertified);
  });
}

}  // namespace osp::cli
