#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

namespace osp::cli {

enum ExitCode : int { kCertified = 0, kInvalidConfig = 1, kUncertified = 2, kRedFlag = 3 };

struct Grid {
  double lo = 0.0;
  double hi = 0.0;
  int n = 0;
};

/// "lo:hi:n" with n >= 1 (n == 1 gives lo only).
Grid parse_grid(const std::string& text);

/// Solves, prints the summary table and writes solution.txt, fhat.csv,
/// conditions.csv, value.csv and resolved.cfg to the output directory.
int cmd_solve(const std::string& config_path, std::ostream& out, std::ostream& err);

/// Writes value CSV rows (x,V_max_law,V_hitting,V_measure,G,spread) to `out`
/// and to value.csv. Without a grid or point, the solution's own grid.
int cmd_value(const std::string& config_path, const std::optional<Grid>& grid, const std::optional<double>& at,
              std::ostream& out, std::ostream& err);

/// Solves, then runs the simulation checks; prints the report and writes
/// verify.csv next to the solve outputs.
int cmd_verify(const std::string& config_path, const std::optional<std::size_t>& paths,
               const std::optional<std::uint64_t>& seed, std::ostream& out, std::ostream& err);

}  // namespace osp::cli
