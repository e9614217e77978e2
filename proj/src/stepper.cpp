#include "entroflow/stepper.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "entroflow/errors.hpp"

namespace entroflow::stepper {

namespace {

constexpr double kSufficientDecrease = 1e-4;
constexpr int kMaxBacktracks = 40;

double max_abs(std::span<const double> v) {
  double r = 0.0;
  for (double x : v) r = std::max(r, std::abs(x));
  return r;
}

// sum_i M_i r_i^2 for mass-scaled residuals r.
double merit(const Mesh& m, std::span<const double> r) { return m.mass_norm_sq(r); }

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void require_step(const PhysParams& p, double h) {
  if (!(h > 0.0)) throw PreconditionError("step size must be positive");
  const double h0 = step_guard(p);
  if (h > h0 * (1.0 + 1e-12)) {
    throw PreconditionError("step size " + std::to_string(h) + " exceeds the guard " +
                            std::to_string(h0));
  }
}

// Right-hand side of the temperature equation without the trial-dependent
// coupling term, in mass-scaled form.
GridFunction temperature_rhs(const StepContext& ctx, std::span<const double> phi_trial) {
  const Mesh& m = ctx.mesh();
  const PhysParams& p = ctx.phys();
  const auto mass = m.lumped_mass();
  const double h = ctx.h();
  const State& prev = ctx.prev();
  const auto lp = ctx.lambda_prime_n();
  const std::size_t n = mass.size();
  GridFunction b(n);
  for (std::size_t i = 0; i < n; ++i) {
    b[i] = h * ctx.forcing().f[i] + p.c_s * prev.u[i] + lp[i] * (prev.phi[i] - phi_trial[i]);
  }
  b.front() += h * m.alpha0() * ctx.forcing().theta_left / mass.front();
  b.back() += h * m.alpha1() * ctx.forcing().theta_right / mass.back();
  return b;
}

GridFunction residual_A_with(const StepContext& ctx, std::span<const double> rhs,
                             std::span<const double> theta) {
  const Mesh& m = ctx.mesh();
  const PhysParams& p = ctx.phys();
  const auto mass = m.lumped_mass();
  const double h = ctx.h();
  GridFunction r = m.apply_stiffness(theta);
  for (std::size_t i = 0; i < r.size(); ++i) {
    r[i] = p.c_s * graphs::Ln_eps(p.eps, theta[i]) + p.eta * h * r[i] / mass[i] - rhs[i];
  }
  r.front() += h * m.alpha0() * theta.front() / mass.front();
  r.back() += h * m.alpha1() * theta.back() / mass.back();
  return r;
}

GridFunction phase_rhs(const StepContext& ctx, std::span<const double> theta_input) {
  const PhysParams& p = ctx.phys();
  const State& prev = ctx.prev();
  const double h = ctx.h();
  const auto lp = ctx.lambda_prime_n();
  const auto gmu = ctx.green_mu_n();
  const auto gphi = ctx.green_phi_n();
  GridFunction b(prev.phi.size());
  for (std::size_t i = 0; i < b.size(); ++i) {
    b[i] = p.tau * prev.phi[i] + h * gmu[i] + gphi[i] + h * lp[i] * theta_input[i];
  }
  return b;
}

GridFunction residual_B_with(const StepContext& ctx, std::span<const double> rhs,
                             std::span<const double> phi) {
  const Mesh& m = ctx.mesh();
  const PhysParams& p = ctx.phys();
  const auto mass = m.lumped_mass();
  const double h = ctx.h();
  const GridFunction g = disc::neumann_green(m, phi);
  GridFunction r = m.apply_stiffness(phi);
  for (std::size_t i = 0; i < r.size(); ++i) {
    r[i] = p.tau * phi[i] + g[i] + p.gamma * h * r[i] / mass[i] +
           h * graphs::yosida(p.graph, p.eps, phi[i]) + h * p.sigma_prime(phi[i]) - rhs[i];
  }
  return r;
}

// Backtracking on the merit function along delta; returns the accepted point
// and its residual, or nothing if no sufficient decrease was found.
template <class Residual>
bool line_search(const Mesh& m, Residual residual, GridFunction& x, GridFunction& r,
                 std::span<const double> delta, NewtonStats& stats) {
  const double f0 = merit(m, r);
  GridFunction trial(x.size());
  double s = 1.0;
  for (int k = 0; k < kMaxBacktracks; ++k) {
    for (std::size_t i = 0; i < x.size(); ++i) trial[i] = x[i] + s * delta[i];
    GridFunction rt = residual(trial);
    const double ft = merit(m, rt);
    if (std::isfinite(ft) && ft <= (1.0 - kSufficientDecrease * s) * f0) {
      x.swap(trial);
      r.swap(rt);
      return true;
    }
    s *= 0.5;
    ++stats.backtracks;
  }
  return false;
}

// Preconditioned CG for J x = b, J applied by `apply`, preconditioner by
// `precond`. Returns the number of iterations.
template <class Apply, class Precond>
int pcg(Apply apply, Precond precond, std::span<const double> b, GridFunction& x, double rel_tol,
        int max_iter) {
  const std::size_t n = b.size();
  x.assign(n, 0.0);
  GridFunction r(b.begin(), b.end());
  const double b_norm = std::sqrt(dot(b, b));
  if (b_norm == 0.0) return 0;
  GridFunction z = precond(r);
  GridFunction d = z;
  GridFunction q(n);
  double rz = dot(r, z);
  for (int it = 1; it <= max_iter; ++it) {
    apply(d, q);
    const double dq = dot(d, q);
    if (!(dq > 0.0)) throw SolverFailure("phase solve: operator lost positive definiteness");
    const double a = rz / dq;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += a * d[i];
      r[i] -= a * q[i];
    }
    if (std::sqrt(dot(r, r)) <= rel_tol * b_norm) return it;
    z = precond(r);
    const double rz_next = dot(r, z);
    const double beta = rz_next / rz;
    rz = rz_next;
    for (std::size_t i = 0; i < n; ++i) d[i] = z[i] + beta * d[i];
  }
  // Roundoff can stall the last digits; the outer Newton tolerates an inexact
  // direction as long as it is a real descent step.
  if (std::sqrt(dot(r, r)) <= 1e-8 * b_norm) return max_iter;
  throw SolverFailure("phase solve: CG exceeded " + std::to_string(max_iter) + " iterations");
}

}  // namespace

const GuardEntry& StepGuard::binding() const {
  return *std::min_element(entries.begin(), entries.end(),
                           [](const GuardEntry& a, const GuardEntry& b) { return a.value < b.value; });
}

StepGuard step_guard_entries(const PhysParams& p) {
  if (!(p.tau > 0.0)) throw PreconditionError("the scheme requires tau > 0");
  if (!(p.eps > 0.0)) throw PreconditionError("the scheme requires eps > 0");
  StepGuard g;
  g.entries.push_back({"1", 1.0});
  const double s2 = p.sigma_second_sup();
  const double l1 = p.latent.truncated_prime_sup(p.eps);
  if (s2 > 0.0) g.entries.push_back({"tau/(2|sigma''|)", p.tau / (2.0 * s2)});
  if (l1 > 0.0) {
    g.entries.push_back({"c_s*eps*tau/(2|lambda_eps'|^2)", p.c_s * p.eps * p.tau / (2.0 * l1 * l1)});
  }
  if (s2 > 0.0) g.entries.push_back({"gamma/(8|sigma''|^2)", p.gamma / (8.0 * s2 * s2)});
  g.h0 = g.binding().value;
  return g;
}

double step_guard(const PhysParams& p) { return step_guard_entries(p).h0; }

double contraction_constant(const PhysParams& p, double h) {
  const double l1 = p.latent.truncated_prime_sup(p.eps);
  return 2.0 * l1 * l1 * h / (p.c_s * p.eps * p.tau);
}

StepContext::StepContext(const PhysParams& p, const BoundaryAndData& data, const Mesh& m,
                         const State& prev, double h)
    : p_(p), m_(m), prev_(prev), h_(h), forcing_(data.forcing(m, prev.t, h)) {
  const std::size_t n = m.n_nodes();
  if (prev.theta.size() != n || prev.phi.size() != n || prev.mu.size() != n || prev.u.size() != n) {
    throw PreconditionError("state size does not match the mesh");
  }
  lambda_prime_n_.resize(n);
  for (std::size_t i = 0; i < n; ++i) lambda_prime_n_[i] = p.lambda_prime(prev.phi[i]);
  green_mu_n_ = disc::neumann_green(m, prev.mu);
  green_phi_n_ = disc::neumann_green(m, prev.phi);
}

GridFunction residual_A(const StepContext& ctx, std::span<const double> phi_trial,
                        std::span<const double> theta) {
  return residual_A_with(ctx, temperature_rhs(ctx, phi_trial), theta);
}

GridFunction residual_B(const StepContext& ctx, std::span<const double> theta_input,
                        std::span<const double> phi) {
  return residual_B_with(ctx, phase_rhs(ctx, theta_input), phi);
}

GridFunction solve_A(const StepContext& ctx, std::span<const double> phi_trial,
                     std::span<const double> guess, const SolverOptions& opt,
                     NewtonStats* stats) {
  const Mesh& m = ctx.mesh();
  const PhysParams& p = ctx.phys();
  const auto mass = m.lumped_mass();
  const double h = ctx.h();
  const std::size_t n = mass.size();
  const GridFunction rhs = temperature_rhs(ctx, phi_trial);
  const double tol = opt.newton_tol * std::max(1.0, max_abs(rhs));
  auto residual = [&](std::span<const double> th) { return residual_A_with(ctx, rhs, th); };

  NewtonStats local;
  GridFunction theta(guess.begin(), guess.end());
  GridFunction r = residual(theta);
  const disc::Tridiagonal& k = m.stiffness();
  for (int it = 0;; ++it) {
    local.residual = max_abs(r);
    local.iterations = it;
    if (local.residual <= tol) break;
    if (it == opt.newton_max_iter) {
      throw SolverFailure("temperature solve: Newton exceeded " +
                          std::to_string(opt.newton_max_iter) + " iterations");
    }
    // Jacobian of the mass-scaled residual, times M to keep it symmetric.
    disc::Tridiagonal jac(n);
    GridFunction neg(n);
    for (std::size_t i = 0; i < n; ++i) {
      jac.diag[i] = p.c_s * mass[i] * graphs::Ln_eps_prime(p.eps, theta[i]) + p.eta * h * k.diag[i];
      jac.lower[i] = p.eta * h * k.lower[i];
      jac.upper[i] = p.eta * h * k.upper[i];
      neg[i] = -mass[i] * r[i];
    }
    jac.diag.front() += h * m.alpha0();
    jac.diag.back() += h * m.alpha1();
    const GridFunction delta = jac.solve(neg);
    if (!line_search(m, residual, theta, r, delta, local)) {
      if (max_abs(r) <= 100.0 * tol) break;
      throw SolverFailure("temperature solve: line search failed at residual " +
                          std::to_string(max_abs(r)));
    }
  }
  if (stats) {
    stats->iterations += local.iterations;
    stats->residual = local.residual;
    stats->backtracks += local.backtracks;
  }
  return theta;
}

GridFunction solve_B(const StepContext& ctx, std::span<const double> theta_input,
                     std::span<const double> guess, const SolverOptions& opt,
                     NewtonStats* stats) {
  const Mesh& m = ctx.mesh();
  const PhysParams& p = ctx.phys();
  const auto mass = m.lumped_mass();
  const double h = ctx.h();
  const std::size_t n = mass.size();
  const GridFunction rhs = phase_rhs(ctx, theta_input);
  const double tol = opt.newton_tol * std::max(1.0, max_abs(rhs));
  const int cg_cap = opt.cg_max_iter > 0 ? opt.cg_max_iter : std::max<int>(200, 4 * static_cast<int>(n));
  auto residual = [&](std::span<const double> ph) { return residual_B_with(ctx, rhs, ph); };

  NewtonStats local;
  GridFunction phi(guess.begin(), guess.end());
  GridFunction r = residual(phi);
  const disc::Tridiagonal& k = m.stiffness();
  GridFunction curvature(n);
  for (int it = 0;; ++it) {
    local.residual = max_abs(r);
    local.iterations = it;
    if (local.residual <= tol) break;
    if (it == opt.newton_max_iter) {
      throw SolverFailure("phase solve: Newton exceeded " + std::to_string(opt.newton_max_iter) +
                          " iterations");
    }
    for (std::size_t i = 0; i < n; ++i) {
      curvature[i] = graphs::yosida_derivative(p.graph, p.eps, phi[i]) + p.sigma_second();
    }
    // Tridiagonal part tau M + gamma h K + h M diag(beta' + sigma''); the
    // Green term M (M + K)^{-1} M is applied matrix-free.
    disc::Tridiagonal local_part(n);
    for (std::size_t i = 0; i < n; ++i) {
      local_part.diag[i] = mass[i] * (p.tau + h * curvature[i]) + p.gamma * h * k.diag[i];
      local_part.lower[i] = p.gamma * h * k.lower[i];
      local_part.upper[i] = p.gamma * h * k.upper[i];
    }
    auto apply = [&](std::span<const double> v, std::span<double> out) {
      local_part.apply(v, out);
      const GridFunction g = disc::neumann_green(m, v);
      for (std::size_t i = 0; i < n; ++i) out[i] += mass[i] * g[i];
    };
    auto precond = [&](std::span<const double> v) { return local_part.solve(v); };
    GridFunction neg(n);
    for (std::size_t i = 0; i < n; ++i) neg[i] = -mass[i] * r[i];
    GridFunction delta;
    local.cg_iterations += pcg(apply, precond, neg, delta, opt.cg_tol, cg_cap);
    if (!line_search(m, residual, phi, r, delta, local)) {
      if (max_abs(r) <= 100.0 * tol) break;
      throw SolverFailure("phase solve: line search failed at residual " +
                          std::to_string(max_abs(r)));
    }
  }
  if (stats) {
    stats->iterations += local.iterations;
    stats->residual = local.residual;
    stats->cg_iterations += local.cg_iterations;
    stats->backtracks += local.backtracks;
  }
  return phi;
}

GridFunction solve_A(const PhysParams& p, const BoundaryAndData& data, const Mesh& m,
                     const State& prev, std::span<const double> phi_trial, double h) {
  require_step(p, h);
  const StepContext ctx(p, data, m, prev, h);
  return solve_A(ctx, phi_trial, prev.theta);
}

GridFunction solve_B(const PhysParams& p, const BoundaryAndData& data, const Mesh& m,
                     const State& prev, std::span<const double> theta_input, double h) {
  require_step(p, h);
  const StepContext ctx(p, data, m, prev, h);
  return solve_B(ctx, theta_input, prev.phi);
}

FixedPointResult fixed_point_step(const StepContext& ctx, const SolverOptions& opt) {
  const Mesh& m = ctx.mesh();
  const State& prev = ctx.prev();
  FixedPointResult out;
  out.q_theory = contraction_constant(ctx.phys(), ctx.h());
  const double bound = out.q_theory * (1.0 + 1e-6);

  GridFunction phi = prev.phi;
  GridFunction theta = prev.theta;
  GridFunction diff(phi.size());
  double last_step = -1.0;
  for (int k = 1;; ++k) {
    if (k > opt.fp_max_iter) {
      throw SolverFailure("fixed point exceeded " + std::to_string(opt.fp_max_iter) +
                          " iterations");
    }
    theta = solve_A(ctx, phi, theta, opt, &out.newton_A);
    GridFunction next = solve_B(ctx, theta, phi, opt, &out.newton_B);
    for (std::size_t i = 0; i < phi.size(); ++i) diff[i] = next[i] - phi[i];
    const double step = std::sqrt(m.mass_norm_sq(diff));
    if (last_step > 0.0) {
      const double ratio = step / last_step;
      out.ratios.push_back(ratio);
      // ratio_{k-1} is produced at iteration k; the first `ratio_burn_in`
      // iterations are not checked.
      const double floor = opt.ratio_noise_floor * std::max(1.0, std::sqrt(m.mass_norm_sq(next)));
      if (k > opt.ratio_burn_in && step >= floor) {
        out.checked_ratios.push_back(ratio);
        if (opt.check_ratio && ratio > bound) {
          throw InvariantViolation("fixed-point ratio " + std::to_string(ratio) +
                                   " exceeds the contraction bound " + std::to_string(out.q_theory));
        }
      }
    }
    phi.swap(next);
    out.iterations = k;
    if (step <= opt.fp_tol) break;
    last_step = step;
  }
  out.theta = solve_A(ctx, phi, theta, opt, &out.newton_A);
  out.phi = std::move(phi);
  return out;
}

FixedPointResult fixed_point_step(const PhysParams& p, const BoundaryAndData& data,
                                  const Mesh& m, const State& prev, double h,
                                  const SolverOptions& opt) {
  require_step(p, h);
  const StepContext ctx(p, data, m, prev, h);
  return fixed_point_step(ctx, opt);
}

GridFunction reconstruct_mu(const Mesh& m, std::span<const double> mu_n,
                            std::span<const double> phi_n, std::span<const double> phi_next,
                            double h) {
  GridFunction g(mu_n.size());
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = mu_n[i] + (phi_n[i] - phi_next[i]) / h;
  return disc::neumann_green(m, g);
}

double scheme_residual(const StepContext& ctx, const State& next) {
  const Mesh& m = ctx.mesh();
  const PhysParams& p = ctx.phys();
  const State& prev = ctx.prev();
  const auto mass = m.lumped_mass();
  const double h = ctx.h();
  const std::size_t n = mass.size();
  // All three equations multiplied through by h, per unit mass.
  double worst = max_abs(residual_A(ctx, next.phi, next.theta));

  const GridFunction kmu = m.apply_stiffness(next.mu);
  const GridFunction kphi = m.apply_stiffness(next.phi);
  const auto lp = ctx.lambda_prime_n();
  for (std::size_t i = 0; i < n; ++i) {
    const double dphi = next.phi[i] - prev.phi[i];
    const double rmu = dphi + h * (next.mu[i] - prev.mu[i] + kmu[i] / mass[i]);
    const double rphi = p.tau * dphi +
                        h * (p.gamma * kphi[i] / mass[i] + graphs::yosida(p.graph, p.eps, next.phi[i]) +
                             p.sigma_prime(next.phi[i]) - next.mu[i] - lp[i] * next.theta[i]);
    worst = std::max({worst, std::abs(rmu), std::abs(rphi)});
  }
  return worst;
}

Problem make_problem(const Setup& setup, const SolverOptions& opt) {
  Mesh mesh = setup.mesh();
  BoundaryAndData data = make_data(setup.data, mesh);
  return Problem{setup.phys, std::move(mesh), std::move(data), opt};
}

State initial_state(const Problem& pb) {
  State s;
  s.n = 0;
  s.t = 0.0;
  s.theta = pb.data.theta0;
  s.phi = pb.data.phi0;
  s.mu = pb.data.mu0;
  s.u.resize(s.theta.size());
  for (std::size_t i = 0; i < s.u.size(); ++i) s.u[i] = graphs::Ln_eps(pb.phys.eps, s.theta[i]);
  return s;
}

namespace {

// Step without retries, filling the solver and diagnostic parts of `rep`.
State advance_once(const Problem& pb, const State& prev, double h, StepReport& rep) {
  const PhysParams& p = pb.phys;
  const Mesh& m = pb.mesh;
  const StepContext ctx(p, pb.data, m, prev, h);
  FixedPointResult fp = fixed_point_step(ctx, pb.options);

  State next;
  next.n = prev.n + 1;
  next.t = prev.t + h;
  next.mu = reconstruct_mu(m, prev.mu, prev.phi, fp.phi, h);
  next.theta = std::move(fp.theta);
  next.phi = std::move(fp.phi);
  next.u.resize(next.theta.size());
  for (std::size_t i = 0; i < next.u.size(); ++i) next.u[i] = graphs::Ln_eps(p.eps, next.theta[i]);

  rep.fp_iterations = std::max(rep.fp_iterations, fp.iterations);
  rep.ratios.insert(rep.ratios.end(), fp.checked_ratios.begin(), fp.checked_ratios.end());
  for (double r : fp.checked_ratios) rep.max_ratio = std::max(rep.max_ratio, r);
  rep.q_theory = std::max(rep.q_theory, fp.q_theory);
  rep.newton_A_iterations += fp.newton_A.iterations;
  rep.newton_B_iterations += fp.newton_B.iterations;
  rep.cg_iterations += fp.newton_B.cg_iterations;
  rep.newton_A_residual = std::max(rep.newton_A_residual, fp.newton_A.residual);
  rep.newton_B_residual = std::max(rep.newton_B_residual, fp.newton_B.residual);

  if (pb.options.diagnostics) {
    const auto e = diagnostics::check_energy_step(m, p, prev, next, h);
    const auto t = diagnostics::check_temperature_step(m, p, prev.theta, next.theta);
    const double s13 = diagnostics::check_subgradient_step(p.graph, p.eps, next.phi, prev.phi, m);
    rep.slack_a15 = std::min(rep.slack_a15, e.slack);
    rep.slack_a2 = std::min(rep.slack_a2, t.slack);
    rep.slack_a13 = std::min(rep.slack_a13, s13);
    rep.identity_a10_residual = std::max(
        rep.identity_a10_residual, diagnostics::identity_energy_residual(m, p, prev, next, h));
    rep.identity_b2_residual =
        std::max(rep.identity_b2_residual, diagnostics::identity_dual_residual(m, prev, next, h));
    rep.scheme_residual = std::max(rep.scheme_residual, scheme_residual(ctx, next));
  }
  return next;
}

}  // namespace

StepOutcome advance(const Problem& pb, const State& prev, double h) {
  const double inf = std::numeric_limits<double>::infinity();
  std::string last_error;
  for (int retry = 0; retry <= pb.options.max_retries; ++retry) {
    const int pieces = 1 << retry;
    const double hs = h / pieces;
    StepReport rep;
    rep.h = h;
    rep.substeps = pieces;
    rep.slack_a15 = rep.slack_a2 = rep.slack_a13 = inf;
    try {
      State cur = prev;
      for (int k = 0; k < pieces; ++k) cur = advance_once(pb, cur, hs, rep);
      cur.n = prev.n + 1;
      cur.t = prev.t + h;
      rep.n = cur.n;
      rep.t = cur.t;
      if (!pb.options.diagnostics) rep.slack_a15 = rep.slack_a2 = rep.slack_a13 = 0.0;
      const double hr = pieces == 1 ? h : hs;
      rep.conserved_total = diagnostics::conserved_total(pb.mesh, cur.phi, cur.mu, hr);
      rep.energy = diagnostics::energy(pb.mesh, pb.phys, cur.phi, cur.mu, hr);
      rep.min_theta = *std::min_element(cur.theta.begin(), cur.theta.end());
      rep.min_rho = inf;
      for (double th : cur.theta) rep.min_rho = std::min(rep.min_rho, graphs::rho(pb.phys.eps, th));
      return StepOutcome{std::move(cur), std::move(rep)};
    } catch (const SolverFailure& e) {
      last_error = e.what();
    }
  }
  throw SolverFailure("step " + std::to_string(prev.n + 1) + " failed after " +
                      std::to_string(pb.options.max_retries) + " retries: " + last_error);
}

Trajectory run(const Problem& pb, double T, int N) {
  if (N < 1) throw PreconditionError("N must be at least 1");
  if (!(T > 0.0)) throw PreconditionError("T must be positive");
  pb.phys.validate();
  pb.data.validate(pb.mesh, pb.phys.graph);
  const double h = T / N;
  const StepGuard guard = step_guard_entries(pb.phys);
  if (h > pb.options.safety * guard.h0 * (1.0 + 1e-12)) {
    throw PreconditionError("h = " + std::to_string(h) + " exceeds " +
                            std::to_string(pb.options.safety) + " * h0 = " +
                            std::to_string(pb.options.safety * guard.h0) + " (binding entry " +
                            guard.binding().name + ")");
  }
  Trajectory tr;
  tr.T = T;
  tr.N = N;
  tr.h = h;
  tr.states.reserve(static_cast<std::size_t>(N) + 1);
  tr.states.push_back(initial_state(pb));
  for (int n = 0; n < N; ++n) {
    try {
      StepOutcome out = advance(pb, tr.states.back(), h);
      // Pin the grid time to avoid drift from repeated addition.
      out.next.t = T * (n + 1) / N;
      out.report.t = out.next.t;
      tr.states.push_back(std::move(out.next));
      tr.reports.push_back(std::move(out.report));
    } catch (const SolverFailure& e) {
      tr.ok = false;
      tr.failed_step = n + 1;
      tr.failure = e.what();
      break;
    }
  }
  return tr;
}

Trajectory run(const Setup& setup, const SolverOptions& opt) {
  const Problem pb = make_problem(setup, opt);
  return run(pb, setup.T, setup.N);
}

std::string_view to_string(ContinuationParam p) noexcept {
  switch (p) {
    case ContinuationParam::H: return "h";
    case ContinuationParam::Eps: return "eps";
    case ContinuationParam::Tau: return "tau";
  }
  return "unknown";
}

std::vector<double> halving_schedule(double value, int levels) {
  if (levels < 1) throw PreconditionError("need at least one continuation level");
  std::vector<double> s;
  for (int k = 0; k < levels; ++k) s.push_back(value / static_cast<double>(1 << k));
  return s;
}

ConvergenceTable continuation(const Setup& base, ContinuationParam param,
                              std::span<const double> schedule, const SolverOptions& opt) {
  if (schedule.empty()) throw PreconditionError("empty continuation schedule");
  for (std::size_t k = 0; k < schedule.size(); ++k) {
    if (!(schedule[k] > 0.0) || (k > 0 && !(schedule[k] < schedule[k - 1]))) {
      throw PreconditionError("continuation schedule must be positive and decreasing");
    }
  }
  std::vector<Setup> setups;
  for (double v : schedule) {
    Setup s = base;
    switch (param) {
      case ContinuationParam::Eps: s.phys.eps = v; break;
      case ContinuationParam::Tau: s.phys.tau = v; break;
      case ContinuationParam::H: {
        const double steps = base.T / v;
        s.N = static_cast<int>(std::lround(steps));
        if (s.N < 1 || std::abs(steps - s.N) > 1e-9 * steps) {
          throw PreconditionError("step size " + std::to_string(v) + " does not divide T");
        }
        break;
      }
    }
    setups.push_back(s);
  }
  if (param != ContinuationParam::H) {
    // A common step count keeps the time grids aligned across levels.
    int n_common = base.N;
    for (const Setup& s : setups) {
      const double hmax = opt.safety * step_guard(s.phys);
      n_common = std::max(n_common, static_cast<int>(std::ceil(s.T / hmax * (1.0 + 1e-12))));
    }
    for (Setup& s : setups) s.N = n_common;
  }

  ConvergenceTable table;
  table.param = param;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t k = 0; k < setups.size(); ++k) {
    const Setup& s = setups[k];
    ContinuationLevel lvl;
    lvl.value = schedule[k];
    lvl.N = s.N;
    lvl.h = s.h();
    lvl.distance = {nan, nan, nan, nan};
    const Mesh mesh = s.mesh();
    try {
      lvl.trajectory = run(s, opt);
      lvl.ok = lvl.trajectory.ok;
      lvl.failure = lvl.trajectory.failure;
    } catch (const std::exception& e) {
      lvl.ok = false;
      lvl.failure = e.what();
    }
    if (lvl.ok) {
      lvl.bounds = diagnostics::bound_tracker(lvl.trajectory, mesh, s.phys);
      if (k > 0 && table.levels.back().ok) {
        lvl.distance = diagnostics::trajectory_distance(table.levels.back().trajectory,
                                                        lvl.trajectory, mesh);
      }
    }
    table.levels.push_back(std::move(lvl));
  }
  return table;
}

ConvergenceTable continuation(const Setup& base, ContinuationParam param, int levels,
                              const SolverOptions& opt) {
  double start = 0.0;
  switch (param) {
    case ContinuationParam::H: start = base.h(); break;
    case ContinuationParam::Eps: start = base.phys.eps; break;
    case ContinuationParam::Tau: start = base.phys.tau; break;
  }
  const std::vector<double> schedule = halving_schedule(start, levels);
  return continuation(base, param, schedule, opt);
}

}  // namespace entroflow::stepper
