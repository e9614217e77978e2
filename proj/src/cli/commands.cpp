#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <random>

#include "entroflow/cli.hpp"
#include "entroflow/errors.hpp"
#include "entroflow/oracle.hpp"

namespace entroflow::cli {

namespace fs = std::filesystem;

namespace {

void open_out(std::ofstream& f, const fs::path& p) {
  f.open(p);
  if (!f) throw ConfigError("cannot write '" + p.string() + "'");
}

InvariantCheck at_most(std::string name, double value, double limit) {
  return {std::move(name), value, limit, value <= limit};
}

InvariantCheck at_least(std::string name, double value, double limit) {
  return {std::move(name), value, limit, value >= limit};
}

}  // namespace

bool SuiteEntry::passed() const {
  if (!ran) return false;
  for (const auto& c : checks) {
    if (!c.passed) return false;
  }
  return true;
}

std::vector<InvariantCheck> check_trajectory(const Trajectory& tr, const Mesh& m,
                                             const PhysParams& p, double slack_floor) {
  const double inf = std::numeric_limits<double>::infinity();
  const double c0 = diagnostics::conserved_total(m, tr.states.front().phi, tr.states.front().mu, tr.h);
  double drift = 0.0, s15 = inf, s2 = inf, s13 = inf, ratio_excess = -inf, a10 = 0.0, b2 = 0.0;
  double scheme = 0.0, min_rho = inf;
  for (const auto& r : tr.reports) {
    drift = std::max(drift, std::abs(r.conserved_total - c0) / std::max(1.0, std::abs(c0)));
    s15 = std::min(s15, r.slack_a15);
    s2 = std::min(s2, r.slack_a2);
    s13 = std::min(s13, r.slack_a13);
    for (double q : r.ratios) ratio_excess = std::max(ratio_excess, q / r.q_theory);
    a10 = std::max(a10, r.identity_a10_residual);
    b2 = std::max(b2, r.identity_b2_residual);
    scheme = std::max(scheme, r.scheme_residual);
    min_rho = std::min(min_rho, r.min_rho);
  }
  double u_err = 0.0;
  for (const State& s : tr.states) {
    for (std::size_t i = 0; i < s.theta.size(); ++i) {
      u_err = std::max(u_err, std::abs(s.u[i] - graphs::Ln_eps(p.eps, s.theta[i])));
    }
  }
  const auto audit = diagnostics::energy_audit(tr, m, p);
  if (tr.reports.empty()) s15 = s2 = s13 = 0.0;
  if (ratio_excess == -inf) ratio_excess = 0.0;

  return {
      at_most("conservation_relative_drift", drift, 1e-10),
      at_least("slack_a15", s15, -slack_floor),
      at_least("slack_a2", s2, -slack_floor),
      at_least("slack_a13", s13, -slack_floor),
      at_most("ratio_over_bound", ratio_excess, 1.0 + 1e-6),
      at_most("identity_a10_residual", a10, 1e-9),
      at_most("identity_b2_residual", b2, 1e-9),
      at_most("scheme_residual", scheme, 1e-10),
      at_most("u_minus_Ln_theta", u_err, 1e-12),
      at_most("energy_telescoping", audit.telescoping_error, 1e-12),
      {"min_rho_positive", min_rho, 0.0, tr.reports.empty() || min_rho > 0.0},
  };
}

std::vector<SuiteEntry> run_check_suite(double slack_floor) {
  std::vector<SuiteEntry> out;
  for (const std::string& name : check_suite()) {
    SuiteEntry e;
    e.preset = name;
    const RunConfig cfg = preset(name);
    try {
      validate(cfg);
      const Trajectory tr = stepper::run(cfg.setup);
      if (!tr.ok) {
        e.ran = false;
        e.failure = tr.failure;
      }
      e.checks = check_trajectory(tr, cfg.setup.mesh(), cfg.setup.phys, slack_floor);
    } catch (const InvariantViolation& ex) {
      e.checks.push_back({"invariant", 0.0, 0.0, false});
      e.failure = ex.what();
    } catch (const std::exception& ex) {
      e.ran = false;
      e.failure = ex.what();
    }
    out.push_back(std::move(e));
  }
  return out;
}

int cmd_run(const std::string& config_path, const std::optional<std::string>& out,
            std::ostream& log) {
  RunConfig cfg;
  try {
    cfg = load_config(config_path);
    validate(cfg);
  } catch (const ConfigError& e) {
    log << "config error: " << e.what() << '\n';
    return kConfigError;
  }
  const fs::path dir = resolve_out_dir(cfg, out);
  Trajectory tr;
  int code = kOk;
  try {
    tr = stepper::run(cfg.setup);
    if (!tr.ok) {
      log << "step failure at step " << tr.failed_step << ": " << tr.failure << '\n';
      code = kStepFailure;
    }
  } catch (const InvariantViolation& e) {
    log << "invariant violation: " << e.what() << '\n';
    return kInvariantViolation;
  }
  try {
    fs::create_directories(dir);
    std::ofstream f;
    open_out(f, dir / "trajectory.csv");
    write_trajectory_csv(f, tr);
    f.close();
    open_out(f, dir / "diagnostics.csv");
    write_diagnostics_csv(f, tr);
    f.close();
    open_out(f, dir / "summary.json");
    f << summary_json(cfg, tr) << '\n';
  } catch (const std::exception& e) {
    log << "output error: " << e.what() << '\n';
    return kConfigError;
  }
  log << "wrote " << tr.reports.size() << " steps to " << dir.string() << '\n';
  return code;
}

int cmd_sweep(const std::string& config_path, const std::string& param, int levels,
              const std::optional<std::string>& out, std::ostream& log) {
  RunConfig cfg;
  stepper::ContinuationParam which{};
  try {
    if (param == "h") {
      which = stepper::ContinuationParam::H;
    } else if (param == "eps") {
      which = stepper::ContinuationParam::Eps;
    } else if (param == "tau") {
      which = stepper::ContinuationParam::Tau;
    } else {
      throw ConfigError("--param must be one of h, eps, tau");
    }
    if (levels < 1) throw ConfigError("--levels must be at least 1");
    cfg = load_config(config_path);
    validate(cfg);
  } catch (const ConfigError& e) {
    log << "config error: " << e.what() << '\n';
    return kConfigError;
  }
  stepper::ConvergenceTable table;
  try {
    table = stepper::continuation(cfg.setup, which, levels);
  } catch (const InvariantViolation& e) {
    log << "invariant violation: " << e.what() << '\n';
    return kInvariantViolation;
  } catch (const PreconditionError& e) {
    log << "config error: " << e.what() << '\n';
    return kConfigError;
  }
  const fs::path dir = resolve_out_dir(cfg, out);
  try {
    fs::create_directories(dir);
    std::ofstream f;
    open_out(f, dir / "sweep.csv");
    write_sweep_csv(f, table);
  } catch (const std::exception& e) {
    log << "output error: " << e.what() << '\n';
    return kConfigError;
  }
  bool all_ok = true;
  for (const auto& l : table.levels) {
    log << std::setprecision(6) << param << " = " << l.value << "  N = " << l.N
        << (l.ok ? "  ok" : "  FAILED: " + l.failure) << '\n';
    all_ok = all_ok && l.ok;
  }
  return all_ok ? kOk : kStepFailure;
}

int cmd_check(double slack_floor, std::ostream& log) {
  const auto suite = run_check_suite(slack_floor);
  bool failed_step = false;
  bool violated = false;
  for (const auto& e : suite) {
    if (!e.ran) {
      log << "[FAIL] " << e.preset << ": run failed: " << e.failure << '\n';
      failed_step = true;
    }
    for (const auto& c : e.checks) {
      log << (c.passed ? "[ok]   " : "[FAIL] ") << e.preset << ' ' << c.name << " = "
          << std::setprecision(6) << c.value << " (limit " << c.limit << ")\n";
      violated = violated || !c.passed;
    }
    if (!e.failure.empty() && e.ran) log << "       " << e.failure << '\n';
  }
  if (violated) return kInvariantViolation;
  return failed_step ? kStepFailure : kOk;
}

int cmd_oracle(std::uint64_t seed, int cases, std::ostream& log) {
  std::mt19937_64 rng(seed);
  bool ok = true;
  for (auto kind : {graphs::GraphKind::Regular, graphs::GraphKind::Logarithmic,
                    graphs::GraphKind::Indicator}) {
    double worst = 0.0;
    int damped = 0;
    try {
      for (int c = 0; c < cases; ++c) {
        const auto oc = oracle::random_case(kind, rng);
        const auto cmp = oracle::compare_step(oc);
        worst = std::max(worst, cmp.max_diff);
        damped += cmp.damped_steps;
      }
    } catch (const std::exception& e) {
      log << graphs::to_string(kind) << ": error: " << e.what() << '\n';
      ok = false;
      continue;
    }
    const bool pass = worst <= 1e-9;
    ok = ok && pass;
    log << std::setprecision(3) << std::scientific << graphs::to_string(kind) << ": " << cases
        << " cases, max |stepper - oracle| = " << worst << ", damped oracle steps = " << damped
        << (pass ? "  ok" : "  FAIL") << '\n'
        << std::defaultfloat;
  }
  return ok ? kOk : kInvariantViolation;
}

int cmd_preset(const std::string& name, std::ostream& out, std::ostream& log) {
  try {
    out << to_text(preset(name));
  } catch (const ConfigError& e) {
    log << "config error: " << e.what() << '\n';
    return kConfigError;
  }
  return kOk;
}

}  // namespace entroflow::cli
