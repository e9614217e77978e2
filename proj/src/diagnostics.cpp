#include "entroflow/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "entroflow/errors.hpp"

namespace entroflow::diagnostics {

namespace {

GridFunction difference(std::span<const double> a, std::span<const double> b) {
  GridFunction d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  return d;
}

double potential_total(const Mesh& m, const PhysParams& p, std::span<const double> phi) {
  const auto mass = m.lumped_mass();
  double s = 0.0;
  for (std::size_t i = 0; i < phi.size(); ++i) s += mass[i] * graphs::moreau(p.graph, p.eps, phi[i]);
  return s;
}

// w = (phi_{n+1} - phi_n)/h + mu_{n+1} - mu_n, zero mass by construction.
GridFunction dissipation_vector(const State& prev, const State& next, double h) {
  GridFunction w(prev.phi.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    w[i] = (next.phi[i] - prev.phi[i]) / h + next.mu[i] - prev.mu[i];
  }
  return w;
}

// Zero-mass projection, removing roundoff before the V0* norm.
void project_zero_mass(const Mesh& m, GridFunction& v) {
  const double mean = m.integral(v) / m.length();
  for (double& x : v) x -= mean;
}

double coupling_term(const Mesh& m, const PhysParams& p, const State& prev, const State& next) {
  const auto mass = m.lumped_mass();
  double s = 0.0;
  for (std::size_t i = 0; i < mass.size(); ++i) {
    s += mass[i] * p.lambda_prime(prev.phi[i]) * (next.phi[i] - prev.phi[i]) * next.theta[i];
  }
  return s;
}

}  // namespace

double conserved_total(const Mesh& m, std::span<const double> phi, std::span<const double> mu,
                       double h) {
  const auto mass = m.lumped_mass();
  double s = 0.0;
  for (std::size_t i = 0; i < mass.size(); ++i) s += mass[i] * (phi[i] + h * mu[i]);
  return s / m.length();
}

double energy(const Mesh& m, const PhysParams& p, std::span<const double> phi,
              std::span<const double> mu, double h) {
  return 0.5 * p.gamma * m.grad_norm_sq(phi) + potential_total(m, p, phi) +
         0.5 * h * m.mass_norm_sq(mu);
}

double check_subgradient_step(graphs::GraphSpec g, double eps, std::span<const double> phi_new,
                              std::span<const double> phi_old, const Mesh& m) {
  const auto mass = m.lumped_mass();
  double pairing = 0.0;
  double increment = 0.0;
  for (std::size_t i = 0; i < mass.size(); ++i) {
    pairing += mass[i] * graphs::yosida(g, eps, phi_new[i]) * (phi_new[i] - phi_old[i]);
    increment += mass[i] * (graphs::moreau(g, eps, phi_new[i]) - graphs::moreau(g, eps, phi_old[i]));
  }
  return pairing - increment;
}

EnergyRecord check_energy_step(const Mesh& m, const PhysParams& p, const State& prev,
                               const State& next, double h) {
  EnergyRecord r;
  GridFunction w = dissipation_vector(prev, next, h);
  project_zero_mass(m, w);
  const GridFunction dphi = difference(next.phi, prev.phi);
  const GridFunction dmu = difference(next.mu, prev.mu);

  const double w_norm = disc::dual_norm_V0(m, w);
  r.dissipation_w = 0.5 * h * w_norm * w_norm;
  r.dissipation_tau = p.tau * m.mass_norm_sq(dphi) / h;
  r.dissipation_mu = 0.25 * h * m.mass_norm_sq(dmu);
  r.gradient_increment = 0.5 * p.gamma * (m.grad_norm_sq(next.phi) - m.grad_norm_sq(prev.phi));
  r.gradient_jump = 0.5 * p.gamma * m.grad_norm_sq(dphi);
  r.potential_increment = potential_total(m, p, next.phi) - potential_total(m, p, prev.phi);
  r.mu_increment = 0.5 * h * (m.mass_norm_sq(next.mu) - m.mass_norm_sq(prev.mu));
  r.coupling = coupling_term(m, p, prev, next);

  const double s2 = p.sigma_second_sup();
  const double s0 = p.sigma_prime(0.0);
  r.lhs = r.dissipation_w + r.dissipation_tau + r.gradient_increment + r.gradient_jump +
          r.potential_increment +
          r.mu_increment + r.dissipation_mu;
  r.rhs = 2.0 * s2 * s2 * h * m.v_norm_sq(next.phi) + 2.0 * s0 * s0 * m.length() * h + r.coupling;
  r.slack = r.rhs - r.lhs;
  return r;
}

TemperatureRecord check_temperature_step(const Mesh& m, const PhysParams& p,
                                         std::span<const double> theta_old,
                                         std::span<const double> theta_new) {
  const auto mass = m.lumped_mass();
  const double eps = p.eps;
  TemperatureRecord r;
  double pairing = 0.0;
  double bound = 0.0;
  for (std::size_t i = 0; i < mass.size(); ++i) {
    const double y_new = graphs::ln_eps(eps, theta_new[i]);
    const double y_old = graphs::ln_eps(eps, theta_old[i]);
    const double rho_new = std::exp(y_new);
    const double rho_old = std::exp(y_old);
    const double dt = theta_new[i] - theta_old[i];
    const double dy = y_new - y_old;
    // (theta, Ln theta_new - Ln theta_old) with Ln = eps*theta + ln_eps.
    pairing += mass[i] * theta_new[i] * (eps * dt + dy);
    bound += mass[i] * (0.5 * eps * (theta_new[i] * theta_new[i] - theta_old[i] * theta_old[i] + dt * dt) +
                        0.5 * eps * (y_new * y_new - y_old * y_old + dy * dy) +
                        (rho_new - rho_old));
    r.rho_total += mass[i] * rho_new;
    r.theta_quadratic += mass[i] * theta_new[i] * theta_new[i];
    r.log_quadratic += mass[i] * y_new * y_new;
  }
  r.rho_total *= p.c_s;
  r.theta_quadratic *= 0.5 * p.c_s * eps;
  r.log_quadratic *= 0.5 * p.c_s * eps;
  r.slack = p.c_s * (pairing - bound);
  return r;
}

double identity_energy_residual(const Mesh& m, const PhysParams& p, const State& prev,
                                const State& next, double h) {
  const auto mass = m.lumped_mass();
  GridFunction w = dissipation_vector(prev, next, h);
  project_zero_mass(m, w);
  const double w_norm = disc::dual_norm_V0(m, w);
  const GridFunction dphi = difference(next.phi, prev.phi);
  const GridFunction dmu = difference(next.mu, prev.mu);

  double beta_pair = 0.0;
  double sigma_pair = 0.0;
  for (std::size_t i = 0; i < mass.size(); ++i) {
    beta_pair += mass[i] * graphs::yosida(p.graph, p.eps, next.phi[i]) * dphi[i];
    sigma_pair += mass[i] * p.sigma_prime(next.phi[i]) * dphi[i];
  }
  const double lhs = h * w_norm * w_norm + p.tau * m.mass_norm_sq(dphi) / h +
                     p.gamma * m.stiffness_form(next.phi, dphi) + beta_pair +
                     h * m.mass_inner(dmu, next.mu);
  const double rhs = -sigma_pair + coupling_term(m, p, prev, next);
  return std::abs(lhs - rhs);
}

double identity_dual_residual(const Mesh& m, const State& prev, const State& next, double h) {
  GridFunction w = dissipation_vector(prev, next, h);
  project_zero_mass(m, w);
  const double w_norm = disc::dual_norm_V0(m, w);
  return std::abs(m.grad_norm_sq(next.mu) - w_norm * w_norm);
}

EnergyAudit energy_audit(const Trajectory& tr, const Mesh& m, const PhysParams& p) {
  EnergyAudit a;
  a.min_slack = std::numeric_limits<double>::infinity();
  for (const State& s : tr.states) a.energies.push_back(energy(m, p, s.phi, s.mu, tr.h));
  for (std::size_t n = 0; n + 1 < tr.states.size(); ++n) {
    const EnergyRecord r = check_energy_step(m, p, tr.states[n], tr.states[n + 1], tr.h);
    a.increment_sum += r.energy_increment();
    a.cumulative_slack += r.slack;
    a.min_slack = std::min(a.min_slack, r.slack);
  }
  if (a.energies.empty()) return a;
  if (tr.states.size() < 2) a.min_slack = 0.0;
  const double total = a.energies.back() - a.energies.front();
  a.telescoping_error =
      std::abs(a.increment_sum - total) / std::max(1.0, std::abs(a.energies.front()));
  return a;
}

double coercivity_probe(const PhysParams& p, double radius, int samples) {
  double best = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < samples; ++k) {
    const double r = -radius + 2.0 * radius * k / (samples - 1);
    const double v = 0.5 * p.gamma * r * r - 0.5 * graphs::moreau(p.graph, p.eps, r);
    best = std::max(best, v);
  }
  return best;
}

const BoundQuantity* BoundReport::find(std::string_view name) const {
  for (const auto& q : quantities) {
    if (q.name == name) return &q;
  }
  return nullptr;
}

BoundReport bound_tracker(const Trajectory& tr, const Mesh& m, const PhysParams& p) {
  BoundReport rep;
  rep.tau = p.tau;
  const double h = tr.h;
  const auto mass = m.lumped_mass();
  const std::size_t nn = m.n_nodes();

  double tau_dt_phi = 0.0, phi_linf_v = 0.0, theta_l2v = 0.0, dt_phi_vstar = 0.0;
  double mu_l2v = 0.0, xi_l2h = 0.0, phi_l2w = 0.0;
  double entropy_linf = 0.0, dt_entropy = 0.0, log_theta_linf = 0.0, lambda_linf = 0.0;
  double dt_log_theta = 0.0, dt_lambda = 0.0;

  auto entropy = [&](const State& s) {
    GridFunction e(nn);
    for (std::size_t i = 0; i < nn; ++i) e[i] = p.c_s * s.u[i] + p.lambda(s.phi[i]);
    return e;
  };
  auto lambda_of = [&](const State& s) {
    GridFunction l(nn);
    for (std::size_t i = 0; i < nn; ++i) l[i] = p.lambda(s.phi[i]);
    return l;
  };

  for (std::size_t n = 0; n < tr.states.size(); ++n) {
    const State& s = tr.states[n];
    phi_linf_v = std::max(phi_linf_v, m.v_norm_sq(s.phi));
    entropy_linf = std::max(entropy_linf, m.mass_norm_sq(entropy(s)));
    log_theta_linf = std::max(log_theta_linf, m.mass_norm_sq(s.u));
    lambda_linf = std::max(lambda_linf, m.mass_norm_sq(lambda_of(s)));
    if (n == 0) continue;
    const State& q = tr.states[n - 1];
    GridFunction dphi(nn), de(nn), du(nn), dl(nn), xi(nn);
    const GridFunction e1 = entropy(s), e0 = entropy(q);
    const GridFunction lap = m.apply_stiffness(s.phi);
    double lap_sq = 0.0;
    for (std::size_t i = 0; i < nn; ++i) {
      dphi[i] = (s.phi[i] - q.phi[i]) / h;
      de[i] = (e1[i] - e0[i]) / h;
      du[i] = (s.u[i] - q.u[i]) / h;
      dl[i] = (p.lambda(s.phi[i]) - p.lambda(q.phi[i])) / h;
      xi[i] = graphs::yosida(p.graph, p.eps, s.phi[i]);
      lap_sq += lap[i] * lap[i] / mass[i];
    }
    auto dual_sq = [&](const GridFunction& v) {
      const double d = disc::dual_norm_V(m, v);
      return d * d;
    };
    tau_dt_phi += h * p.tau * m.mass_norm_sq(dphi);
    theta_l2v += h * m.v_norm_sq(s.theta);
    dt_phi_vstar += h * dual_sq(dphi);
    mu_l2v += h * m.v_norm_sq(s.mu);
    xi_l2h += h * m.mass_norm_sq(xi);
    phi_l2w += h * (m.v_norm_sq(s.phi) + lap_sq);
    dt_entropy += h * dual_sq(de);
    dt_log_theta += h * dual_sq(du);
    dt_lambda += h * dual_sq(dl);
  }

  rep.quantities = {
      {"tau_dt_phi_L2H", tau_dt_phi, false},
      {"phi_LinfV", phi_linf_v, false},
      {"theta_L2V", theta_l2v, false},
      {"dt_phi_L2Vstar", dt_phi_vstar, false},
      {"mu_L2V", mu_l2v, false},
      {"xi_L2H", xi_l2h, false},
      {"phi_L2W", phi_l2w, false},
      {"entropy_H1Vstar_LinfH", dt_entropy + entropy_linf, false},
      {"log_theta_LinfH", log_theta_linf, false},
      {"lambda_phi_LinfH", lambda_linf, false},
      {"dt_log_theta_L2Vstar", dt_log_theta, true},
      {"dt_lambda_phi_L2Vstar", dt_lambda, true},
  };
  return rep;
}

namespace {

// Smallest k >= 1 with t_k >= t (within roundoff): the state carried by the
// piecewise-constant interpolant on (t_{k-1}, t_k].
std::size_t step_index(const Trajectory& tr, double t) {
  const double tol = 1e-12 * std::max(1.0, tr.T);
  auto it = std::lower_bound(tr.states.begin() + 1, tr.states.end(), t - tol,
                             [](const State& s, double v) { return s.t < v; });
  if (it == tr.states.end()) return tr.states.size() - 1;
  return static_cast<std::size_t>(it - tr.states.begin());
}

GridFunction linear_at(const Trajectory& tr, double t) {
  const auto& st = tr.states;
  if (t <= st.front().t) return st.front().phi;
  if (t >= st.back().t) return st.back().phi;
  const std::size_t k = step_index(tr, t);
  const double w = std::clamp((t - st[k - 1].t) / (st[k].t - st[k - 1].t), 0.0, 1.0);
  GridFunction out(st[k].phi.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = (1.0 - w) * st[k - 1].phi[i] + w * st[k].phi[i];
  }
  return out;
}

}  // namespace

TrajectoryDistance trajectory_distance(const Trajectory& a, const Trajectory& b, const Mesh& m) {
  if (a.states.size() < 2 || b.states.size() < 2) {
    throw PreconditionError("trajectory_distance needs at least one step in each trajectory");
  }
  std::vector<double> grid;
  for (const State& s : a.states) grid.push_back(s.t);
  for (const State& s : b.states) grid.push_back(s.t);
  std::sort(grid.begin(), grid.end());
  const double tol = 1e-12 * std::max(1.0, std::max(a.T, b.T));
  std::vector<double> merged;
  for (double t : grid) {
    if (merged.empty() || t - merged.back() > tol) merged.push_back(t);
  }
  const double t_end = std::min(a.states.back().t, b.states.back().t);

  TrajectoryDistance d;
  double phi_sq = 0.0, theta_sq = 0.0;
  for (std::size_t j = 0; j < merged.size(); ++j) {
    const double t = merged[j];
    if (t > t_end + tol) break;
    const GridFunction diff = difference(linear_at(a, t), linear_at(b, t));
    d.phi_CVstar = std::max(d.phi_CVstar, disc::dual_norm_V(m, diff));
    if (j == 0) continue;
    const double t0 = merged[j - 1];
    const State& sa = a.states[step_index(a, t)];
    const State& sb = b.states[step_index(b, t)];
    phi_sq += (t - t0) * m.mass_norm_sq(difference(sa.phi, sb.phi));
    theta_sq += (t - t0) * m.mass_norm_sq(difference(sa.theta, sb.theta));
  }
  d.phi_L2H = std::sqrt(phi_sq);
  d.theta_L2H = std::sqrt(theta_sq);
  d.combined_L2H = std::sqrt(phi_sq + theta_sq);
  return d;
}

}  // namespace entroflow::diagnostics
