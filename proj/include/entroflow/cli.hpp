#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "entroflow/config.hpp"
#include "entroflow/stepper.hpp"

namespace entroflow::cli {

enum ExitCode : int {
  kOk = 0,
  kConfigError = 1,
  kStepFailure = 2,
  kInvariantViolation = 3,
};

/// Output directory: ENTROFLOW_OUT, else the command-line value, else the
/// config's output.dir.
std::string resolve_out_dir(const RunConfig& cfg, const std::optional<std::string>& cli_out);

void write_trajectory_csv(std::ostream& os, const Trajectory& tr);
void write_diagnostics_csv(std::ostream& os, const Trajectory& tr);
std::string summary_json(const RunConfig& cfg, const Trajectory& tr);
void write_sweep_csv(std::ostream& os, const stepper::ConvergenceTable& table);

/// Invariant battery over one trajectory.
struct InvariantCheck {
  std::string name;
  double value = 0.0;
  double limit = 0.0;
  bool passed = true;
};

struct SuiteEntry {
  std::string preset;
  bool ran = true;
  std::string failure;
  std::vector<InvariantCheck> checks;
  bool passed() const;
};

/// Checks conservation, slacks (>= -slack_floor), contraction ratios, exact
/// identities, scheme residuals, u = Ln_eps(theta) and energy telescoping.
std::vector<InvariantCheck> check_trajectory(const Trajectory& tr, const Mesh& m,
                                             const PhysParams& p, double slack_floor = 1e-9);

std::vector<SuiteEntry> run_check_suite(double slack_floor = 1e-9);

int cmd_run(const std::string& config_path, const std::optional<std::string>& out,
            std::ostream& log);
int cmd_sweep(const std::string& config_path, const std::string& param, int levels,
              const std::optional<std::string>& out, std::ostream& log);
int cmd_check(double slack_floor, std::ostream& log);
int cmd_oracle(std::uint64_t seed, int cases, std::ostream& log);
int cmd_preset(const std::string& name, std::ostream& out, std::ostream& log);

}  // namespace entroflow::cli
