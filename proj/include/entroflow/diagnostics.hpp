#pragma once

#include <span>
#include <string>
#include <vector>

#include "entroflow/model.hpp"

namespace entroflow::diagnostics {

/// (1/L) sum_i M_i (phi_i + h mu_i).
double conserved_total(const Mesh& m, std::span<const double> phi, std::span<const double> mu,
                       double h);

/// E = (gamma/2)|grad phi|^2 + sum_i M_i betahat_eps(phi_i) + (h/2)|mu|_M^2.
double energy(const Mesh& m, const PhysParams& p, std::span<const double> phi,
              std::span<const double> mu, double h);

/// (M beta_eps(new)) . (new - old) - [sum M betahat_eps(new) - sum M betahat_eps(old)].
double check_subgradient_step(graphs::GraphSpec g, double eps, std::span<const double> phi_new,
                              std::span<const double> phi_old, const Mesh& m);

struct EnergyRecord {
  double dissipation_w = 0.0;    // (h/2)|w|_{V0*}^2, w = delta phi + mu_{n+1} - mu_n
  double dissipation_tau = 0.0;  // tau h |delta phi|_M^2
  double dissipation_mu = 0.0;   // (h/4)|mu_{n+1} - mu_n|_M^2
  double gradient_increment = 0.0;  // (gamma/2)(|grad phi_{n+1}|^2 - |grad phi_n|^2)
  double gradient_jump = 0.0;       // (gamma/2)|grad (phi_{n+1} - phi_n)|^2
  double potential_increment = 0.0;
  double mu_increment = 0.0;     // (h/2)(|mu_{n+1}|^2 - |mu_n|^2)
  double coupling = 0.0;         // (lambda_eps'(phi_n)(phi_{n+1} - phi_n), theta_{n+1})_M
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0;            // rhs - lhs
  /// E_{n+1} - E_n assembled from the increments above.
  double energy_increment() const {
    return gradient_increment + potential_increment + mu_increment;
  }
};

/// The per-step energy inequality with its explicit constants.
EnergyRecord check_energy_step(const Mesh& m, const PhysParams& p, const State& prev,
                               const State& next, double h);

struct TemperatureRecord {
  double rho_total = 0.0;           // c_s sum M rho_eps(theta_{n+1})
  double theta_quadratic = 0.0;     // (c_s eps / 2)|theta_{n+1}|_M^2
  double log_quadratic = 0.0;       // (c_s eps / 2)|ln_eps theta_{n+1}|_M^2
  double slack = 0.0;
};

/// c_s (theta_{n+1}, Ln theta_{n+1} - Ln theta_n)_M minus its convexity lower bound.
TemperatureRecord check_temperature_step(const Mesh& m, const PhysParams& p,
                                         std::span<const double> theta_old,
                                         std::span<const double> theta_new);

/// |lhs - rhs| of the exact discrete energy identity obtained by testing the
/// phase equation with phi_{n+1} - phi_n.
double identity_energy_residual(const Mesh& m, const PhysParams& p, const State& prev,
                                const State& next, double h);

/// |mu^T K mu - |w|_{V0*}^2| for mu = mu_{n+1}.
double identity_dual_residual(const Mesh& m, const State& prev, const State& next, double h);

struct EnergyAudit {
  std::vector<double> energies;  // E_0 .. E_N
  double increment_sum = 0.0;
  double telescoping_error = 0.0;  // |sum increments - (E_N - E_0)| / max(1, |E_0|)
  double cumulative_slack = 0.0;   // sum of per-step slacks
  double min_slack = 0.0;
};

EnergyAudit energy_audit(const Trajectory& tr, const Mesh& m, const PhysParams& p);

/// max_r ((gamma/2) r^2 - betahat_eps(r)/2) sampled on [-R, R]; finite when
/// betahat_eps grows at least quadratically.
double coercivity_probe(const PhysParams& p, double radius = 10.0, int samples = 20001);

struct BoundQuantity {
  std::string name;
  double value = 0.0;
  bool tau_weighted = false;  // allowed to grow like (1 + 1/tau)
};

struct BoundReport {
  double tau = 0.0;
  std::vector<BoundQuantity> quantities;
  const BoundQuantity* find(std::string_view name) const;
};

/// Discrete analogues of the a priori bound list, using piecewise-constant
/// and piecewise-linear time interpolants of the trajectory.
BoundReport bound_tracker(const Trajectory& tr, const Mesh& m, const PhysParams& p);

struct TrajectoryDistance {
  double phi_L2H = 0.0;
  double theta_L2H = 0.0;
  double combined_L2H = 0.0;  // sqrt(phi^2 + theta^2)
  double phi_CVstar = 0.0;
};

/// Distances between trajectories on the same mesh and horizon, possibly with
/// different step counts, evaluated on the merged time grid.
TrajectoryDistance trajectory_distance(const Trajectory& a, const Trajectory& b, const Mesh& m);

}  // namespace entroflow::diagnostics
