#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "entroflow/model.hpp"
#include "entroflow/stepper.hpp"

namespace entroflow::cli {

/// A complete run description: the mathematical setup plus output location.
struct RunConfig {
  std::string name;  // preset name, empty for files
  Setup setup{};
  std::string out_dir = "out";
};

/// Parses flat `key = value` text; `#` starts a comment. Unknown keys,
/// malformed numbers and duplicate keys raise ConfigError naming the line.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::string& path);

/// Inverse of parse_config; values printed with 17 significant digits.
std::string to_text(const RunConfig& cfg);

/// Fail-fast validation of coefficients, data bounds and the step-size
/// guard h <= safety * h0. Throws ConfigError.
void validate(const RunConfig& cfg, const stepper::SolverOptions& opt = {});

std::vector<std::string> preset_names();
/// Throws ConfigError for unknown names.
RunConfig preset(std::string_view name);

/// Presets exercised by `check` and by the inequality acceptance criterion.
std::vector<std::string> check_suite();

}  // namespace entroflow::cli
