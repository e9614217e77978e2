#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>

#include <json.hpp>

#include "entroflow/cli.hpp"

namespace entroflow::cli {

namespace {

// JSON has no NaN; non-finite values become null.
nlohmann::json number(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

}  // namespace

std::string resolve_out_dir(const RunConfig& cfg, const std::optional<std::string>& cli_out) {
  if (const char* env = std::getenv("ENTROFLOW_OUT"); env && *env) return env;
  if (cli_out) return *cli_out;
  return cfg.out_dir;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& tr) {
  os << std::setprecision(17);
  os << "t,node,theta,phi,mu,u\n";
  for (const State& s : tr.states) {
    for (std::size_t i = 0; i < s.theta.size(); ++i) {
      os << s.t << ',' << i << ',' << s.theta[i] << ',' << s.phi[i] << ',' << s.mu[i] << ','
         << s.u[i] << '\n';
    }
  }
}

void write_diagnostics_csv(std::ostream& os, const Trajectory& tr) {
  os << std::setprecision(17);
  os << "t,conserved_total,energy,min_theta,fp_iters,max_ratio,slack_a15,slack_a2,slack_a13\n";
  for (const StepReport& r : tr.reports) {
    os << r.t << ',' << r.conserved_total << ',' << r.energy << ',' << r.min_theta << ','
       << r.fp_iterations << ',' << r.max_ratio << ',' << r.slack_a15 << ',' << r.slack_a2 << ','
       << r.slack_a13 << '\n';
  }
}

std::string summary_json(const RunConfig& cfg, const Trajectory& tr) {
  using nlohmann::json;
  const Mesh mesh = cfg.setup.mesh();
  const PhysParams& p = cfg.setup.phys;
  json j;
  j["config"] = cfg.name.empty() ? json(nullptr) : json(cfg.name);
  j["T"] = tr.T;
  j["N"] = tr.N;
  j["h"] = tr.h;
  const stepper::StepGuard guard = stepper::step_guard_entries(p);
  j["h0"] = guard.h0;
  json entries = json::object();
  for (const auto& e : guard.entries) entries[e.name] = e.value;
  j["guard_entries"] = entries;
  j["ok"] = tr.ok;
  j["steps_completed"] = tr.reports.size();
  j["failure"] = tr.ok ? json(nullptr) : json{{"step", tr.failed_step}, {"message", tr.failure}};

  json bounds = json::object();
  json weighted = json::array();
  if (tr.states.size() > 1) {
    const auto rep = diagnostics::bound_tracker(tr, mesh, p);
    for (const auto& q : rep.quantities) {
      bounds[q.name] = number(q.value);
      if (q.tau_weighted) weighted.push_back(q.name);
    }
  }
  j["bounds"] = bounds;
  j["tau_weighted_bounds"] = weighted;

  double drift = 0.0, min15 = 0.0, min2 = 0.0, min13 = 0.0, max_ratio = 0.0, q = 0.0;
  int fp_max = 0;
  if (!tr.reports.empty()) {
    const double c0 = diagnostics::conserved_total(mesh, tr.states.front().phi,
                                                   tr.states.front().mu, tr.h);
    min15 = min2 = min13 = std::numeric_limits<double>::infinity();
    for (const auto& r : tr.reports) {
      drift = std::max(drift, std::abs(r.conserved_total - c0) / std::max(1.0, std::abs(c0)));
      min15 = std::min(min15, r.slack_a15);
      min2 = std::min(min2, r.slack_a2);
      min13 = std::min(min13, r.slack_a13);
      max_ratio = std::max(max_ratio, r.max_ratio);
      q = std::max(q, r.q_theory);
      fp_max = std::max(fp_max, r.fp_iterations);
    }
  }
  j["conservation_relative_drift"] = number(drift);
  j["min_slack_a15"] = number(min15);
  j["min_slack_a2"] = number(min2);
  j["min_slack_a13"] = number(min13);
  j["max_fixed_point_ratio"] = number(max_ratio);
  j["contraction_bound"] = number(q);
  j["max_fixed_point_iterations"] = fp_max;
  return j.dump(2);
}

void write_sweep_csv(std::ostream& os, const stepper::ConvergenceTable& table) {
  os << std::setprecision(17);
  std::vector<std::string> names;
  for (const auto& lvl : table.levels) {
    if (!lvl.bounds.quantities.empty()) {
      for (const auto& q : lvl.bounds.quantities) names.push_back(q.name);
      break;
    }
  }
  os << "level,param,value,N,h,ok,diff_phi_L2H,diff_theta_L2H,diff_L2H,diff_phi_CVstar";
  for (const auto& n : names) os << ',' << n;
  os << '\n';
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t k = 0; k < table.levels.size(); ++k) {
    const auto& l = table.levels[k];
    os << k << ',' << stepper::to_string(table.param) << ',' << l.value << ',' << l.N << ',' << l.h
       << ',' << (l.ok ? 1 : 0) << ',' << l.distance.phi_L2H << ',' << l.distance.theta_L2H << ','
       << l.distance.combined_L2H << ',' << l.distance.phi_CVstar;
    for (const auto& n : names) {
      const auto* q = l.bounds.find(n);
      os << ',' << (q ? q->value : nan);
    }
    os << '\n';
  }
}

}  // namespace entroflow::cli
