#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "osp/problem.hpp"
#include "osp/verify.hpp"

namespace osp::cli {

/// Invalid or unreadable configuration (exit code 1).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One key of the resolved configuration, value in canonical text form.
struct ResolvedEntry {
  std::string section;
  std::string key;
  std::string value;
};

struct ProblemConfig {
  Problem problem;
  VerifyOptions verify;
  std::string output_dir;
  /// Every key with defaults filled in, in section order.
  std::vector<ResolvedEntry> resolved;
};

/// Parses an INI file with sections [problem], [process], [solver],
/// [verify] and [output]. Unknown sections and keys are rejected.
ProblemConfig load_config(const std::string& path);
ProblemConfig parse_config(const std::string& text, const std::string& default_output_dir);

/// INI text of the resolved configuration; loading it yields the same
/// problem and options.
std::string resolved_text(const ProblemConfig& c);

/// Sets a key in the resolved list (used for command-line overrides).
void override_entry(ProblemConfig& c, const std::string& section, const std::string& key, const std::string& value);

/// Shortest exact text for a double: 17 significant digits.
std::string num(double v);

}  // namespace osp::cli
