#include "entroflow/oracle.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "entroflow/errors.hpp"
#include "entroflow/stepper.hpp"

namespace entroflow::oracle {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kResidualTol = 1e-13;
constexpr int kMaxIterations = 100;

VectorXd to_eigen(std::span<const double> v) {
  return Eigen::Map<const VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

GridFunction from_eigen(const VectorXd& v) { return GridFunction(v.data(), v.data() + v.size()); }

// Dense lumped mass, stiffness and Robin matrices assembled element by element.
struct DenseOperators {
  MatrixXd M, K, R, G;  // G = (M + K)^{-1}
};

DenseOperators assemble(const DenseStepProblem& pb) {
  const int n = pb.n_nodes;
  const double dx = pb.length / (n - 1);
  DenseOperators ops;
  ops.M = MatrixXd::Zero(n, n);
  ops.K = MatrixXd::Zero(n, n);
  ops.R = MatrixXd::Zero(n, n);
  for (int e = 0; e + 1 < n; ++e) {
    Eigen::Matrix2d ke;
    ke << 1.0, -1.0, -1.0, 1.0;
    ops.K.block(e, e, 2, 2) += ke / dx;
    ops.M(e, e) += 0.5 * dx;
    ops.M(e + 1, e + 1) += 0.5 * dx;
  }
  ops.R(0, 0) = pb.alpha0;
  ops.R(n - 1, n - 1) = pb.alpha1;
  ops.G = (ops.M + ops.K).partialPivLu().inverse();
  return ops;
}

struct Evaluation {
  VectorXd residual;
  MatrixXd jacobian;
};

// Coupled residual, both blocks multiplied through by h:
//   c_s M (Ln th - u_n) + M L'(phi - phi_n) + eta h K th + h R th - h M f - h R th_G
//   tau M (phi - phi_n) + gamma h K phi + h M (beta(phi) + sigma'(phi))
//       - h M mu(phi) - h M L' th
// with L' = diag(lambda_eps'(phi_n)) and
//   mu(phi) = (M + K)^{-1} (M mu_n + M (phi_n - phi) / h).
Evaluation evaluate(const DenseStepProblem& pb, const DenseOperators& ops, const VectorXd& z) {
  const int n = pb.n_nodes;
  const PhysParams& p = pb.phys;
  const double h = pb.h;
  const VectorXd th = z.head(n);
  const VectorXd ph = z.tail(n);
  const VectorXd th_n = to_eigen(pb.prev.theta);
  const VectorXd ph_n = to_eigen(pb.prev.phi);
  const VectorXd mu_n = to_eigen(pb.prev.mu);
  const VectorXd u_n = to_eigen(pb.prev.u);
  const VectorXd f = to_eigen(pb.forcing.f);

  VectorXd ln(n), dln(n), lp(n), beta(n), dbeta(n), sp(n), spp(n);
  for (int i = 0; i < n; ++i) {
    ln(i) = graphs::Ln_eps(p.eps, th(i));
    dln(i) = graphs::Ln_eps_prime(p.eps, th(i));
    lp(i) = p.latent.truncated_prime(p.eps, ph_n(i));
    beta(i) = graphs::yosida(p.graph, p.eps, ph(i));
    dbeta(i) = graphs::yosida_derivative(p.graph, p.eps, ph(i));
    sp(i) = p.theta_a - 2.0 * p.theta_b * ph(i);
    spp(i) = -2.0 * p.theta_b;
  }
  VectorXd boundary = VectorXd::Zero(n);
  boundary(0) = pb.alpha0 * pb.forcing.theta_left;
  boundary(n - 1) = pb.alpha1 * pb.forcing.theta_right;

  const VectorXd mu = ops.G * (ops.M * mu_n + ops.M * (ph_n - ph) / h);

  Evaluation ev;
  ev.residual.resize(2 * n);
  ev.residual.head(n) = p.c_s * ops.M * (ln - u_n) + ops.M * lp.asDiagonal() * (ph - ph_n) +
                        p.eta * h * ops.K * th + h * ops.R * th - h * ops.M * f - h * boundary;
  ev.residual.tail(n) = p.tau * ops.M * (ph - ph_n) + p.gamma * h * ops.K * ph +
                        h * ops.M * (beta + sp) - h * ops.M * mu -
                        h * ops.M * lp.asDiagonal() * th;

  ev.jacobian = MatrixXd::Zero(2 * n, 2 * n);
  ev.jacobian.topLeftCorner(n, n) =
      p.c_s * ops.M * dln.asDiagonal() + p.eta * h * ops.K + h * ops.R;
  ev.jacobian.topRightCorner(n, n) = ops.M * lp.asDiagonal();
  ev.jacobian.bottomLeftCorner(n, n) = -h * ops.M * lp.asDiagonal();
  // d(-h M mu)/d phi = M (M + K)^{-1} M.
  ev.jacobian.bottomRightCorner(n, n) = p.tau * ops.M + p.gamma * h * ops.K +
                                        h * ops.M * (dbeta + spp).asDiagonal() +
                                        ops.M * ops.G * ops.M;
  return ev;
}

// Residual measured per unit mass, as the stepper does.
double scaled_norm(const DenseOperators& ops, const VectorXd& r) {
  const int n = static_cast<int>(ops.M.rows());
  double worst = 0.0;
  for (int i = 0; i < n; ++i) {
    worst = std::max(worst, std::abs(r(i)) / ops.M(i, i));
    worst = std::max(worst, std::abs(r(n + i)) / ops.M(i, i));
  }
  return worst;
}

// Golden-section search on a unimodal f, driven by the secant slope
// (f(y) - f(x)) / (y - x) rather than by function values: comparing values
// cannot resolve the minimizer below sqrt(machine eps) where f is flat.
double golden_section(const std::function<double(double, double)>& secant, double a, double b,
                      double tol) {
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - invphi * (b - a);
  double d = a + invphi * (b - a);
  while (b - a > tol) {
    if (secant(c, d) > 0.0) {
      b = d;
      d = c;
      c = b - invphi * (b - a);
    } else {
      a = c;
      c = d;
      d = a + invphi * (b - a);
    }
  }
  return 0.5 * (a + b);
}

// (F(u) - F(v)) / (u - v) for F(u) = u ln u, u, v > 0, without cancellation.
double xlogx_divided_difference(double u, double v) {
  if (u == v) return std::log(u) + 1.0;
  const double d = u - v;
  return std::log(v) + u * std::log1p(d / v) / d;
}

// Secant slope of betahat between two points of its effective domain.
double betahat_secant(graphs::GraphKind kind, double x, double y) {
  switch (kind) {
    case graphs::GraphKind::Regular:
      return (x + y) * (x * x + y * y) / 4.0;
    case graphs::GraphKind::Logarithmic:
      return xlogx_divided_difference(1.0 + x, 1.0 + y) -
             xlogx_divided_difference(1.0 - x, 1.0 - y);
    case graphs::GraphKind::Indicator:
      return 0.0;
  }
  return 0.0;
}

}  // namespace

DenseStepResult dense_step_solve(const DenseStepProblem& pb) {
  const int n = pb.n_nodes;
  if (n < 2 || n > 9) throw PreconditionError("dense oracle supports 2..9 nodes");
  if (!(pb.h > 0.0)) throw PreconditionError("dense oracle needs h > 0");
  const DenseOperators ops = assemble(pb);

  VectorXd z(2 * n);
  z.head(n) = to_eigen(pb.prev.theta);
  z.tail(n) = to_eigen(pb.prev.phi);

  const double scale = std::max(1.0, to_eigen(pb.prev.u).cwiseAbs().maxCoeff() * pb.phys.c_s);
  DenseStepResult out;
  Evaluation ev = evaluate(pb, ops, z);
  for (int it = 0;; ++it) {
    out.residual = scaled_norm(ops, ev.residual);
    out.iterations = it;
    if (out.residual <= kResidualTol * scale) break;
    if (it == kMaxIterations) {
      throw OracleError("dense oracle: Newton did not converge, residual " +
                        std::to_string(out.residual));
    }
    const VectorXd delta = ev.jacobian.partialPivLu().solve(-ev.residual);
    double s = 1.0;
    const double r0 = ev.residual.norm();
    bool accepted = false;
    for (int k = 0; k < 40; ++k) {
      Evaluation trial = evaluate(pb, ops, z + s * delta);
      if (trial.residual.norm() < (1.0 - 1e-4 * s) * r0) {
        z += s * delta;
        ev = std::move(trial);
        accepted = true;
        break;
      }
      s *= 0.5;
    }
    if (s < 1.0) ++out.damped_steps;
    if (!accepted) {
      // At roundoff level the merit cannot decrease further; take the full
      // step and let the tolerance test decide.
      z += delta;
      ev = evaluate(pb, ops, z);
      if (scaled_norm(ops, ev.residual) > kResidualTol * scale) {
        throw OracleError("dense oracle: line search failed, residual " +
                          std::to_string(scaled_norm(ops, ev.residual)));
      }
    }
  }
  const VectorXd ph = z.tail(n);
  const VectorXd mu = ops.G * (ops.M * to_eigen(pb.prev.mu) +
                               ops.M * (to_eigen(pb.prev.phi) - ph) / pb.h);
  out.theta = from_eigen(z.head(n));
  out.phi = from_eigen(ph);
  out.mu = from_eigen(mu);
  return out;
}

double prox_bruteforce(graphs::GraphSpec g, double eps, double r) {
  if (!(eps > 0.0)) throw PreconditionError("prox_bruteforce needs eps > 0");
  auto objective = [&](double s) {
    const auto b = graphs::betahat(g, s);
    if (b.is_infinite()) return std::numeric_limits<double>::infinity();
    return (r - s) * (r - s) / (2.0 * eps) + b.value();
  };
  double lo = 0.0, hi = 0.0;
  if (g.kind == graphs::GraphKind::Regular) {
    lo = std::min(0.0, r);
    hi = std::max(0.0, r);
  } else {
    lo = -1.0;
    hi = 1.0;
  }
  const double step = 1e-3;
  double best = lo;
  double best_val = objective(lo);
  for (double s = lo; s <= hi + 0.5 * step; s += step) {
    const double x = std::min(s, hi);
    const double v = objective(x);
    if (v < best_val) {
      best_val = v;
      best = x;
    }
  }
  const double a = std::max(lo, best - step);
  const double b = std::min(hi, best + step);
  // secant slope of the objective; its quadratic part is exact in this form
  auto secant = [&](double x, double y) {
    return (x + y - 2.0 * r) / (2.0 * eps) + betahat_secant(g.kind, x, y);
  };
  return golden_section(secant, a, b, 1e-10);
}

double fd_check(const std::function<double(double)>& f, const std::function<double(double)>& df,
                double x, double step) {
  const double central = (f(x + step) - f(x - step)) / (2.0 * step);
  const double exact = df(x);
  return std::abs(central - exact) / std::max(1.0, std::abs(exact));
}

OracleCase random_case(graphs::GraphKind kind, std::mt19937_64& rng, int n_nodes) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto in = [&](double a, double b) { return a + (b - a) * u(rng); };

  PhysParams p;
  p.graph.kind = kind;
  p.c_s = in(0.5, 2.0);
  p.eta = in(0.5, 2.0);
  p.gamma = in(0.5, 2.0);
  p.tau = in(0.5, 1.5);
  p.eps = in(0.3, 1.0);
  p.theta_a = in(-1.0, 1.0);
  p.theta_b = in(-0.5, 0.5);
  p.latent.a1 = in(-1.0, 1.0);
  p.latent.a2 = in(-0.5, 0.5);

  const double length = in(0.5, 2.0);
  Mesh mesh(n_nodes - 1, length, in(0.5, 2.0), in(0.5, 2.0));

  BoundaryAndData data;
  data.alpha_min = 0.5;
  data.alpha_max = 2.0;
  data.theta_min = 0.25;
  data.theta_max = 4.0;
  data.theta_left = TimeProfile::constant(in(0.5, 2.0));
  data.theta_right.kind = ProfileKind::Sinusoidal;
  data.theta_right.value = in(1.0, 2.0);
  data.theta_right.amplitude = in(0.0, 0.5);
  data.theta_right.period = in(0.5, 2.0);
  data.source.profile.kind = ProfileKind::Sinusoidal;
  data.source.profile.value = in(-1.0, 1.0);
  data.source.profile.amplitude = in(0.0, 1.0);
  data.source.profile.period = in(0.5, 2.0);
  data.source.mode = static_cast<int>(std::floor(in(0.0, 3.0)));

  const double phi_range = kind == graphs::GraphKind::Regular ? 1.5 : 0.8;
  State prev;
  prev.n = 0;
  prev.t = in(0.0, 1.0);
  for (int i = 0; i < n_nodes; ++i) {
    prev.theta.push_back(in(0.5, 2.0));
    prev.phi.push_back(in(-phi_range, phi_range));
    prev.mu.push_back(in(-1.0, 1.0));
    prev.u.push_back(graphs::Ln_eps(p.eps, prev.theta.back()));
  }
  data.theta0 = prev.theta;
  data.phi0 = prev.phi;
  data.mu0 = prev.mu;

  const double h = 0.5 * stepper::step_guard(p);
  return OracleCase{p, std::move(mesh), std::move(data), std::move(prev), h};
}

DenseStepProblem to_dense(const OracleCase& c) {
  DenseStepProblem pb;
  pb.phys = c.phys;
  pb.n_nodes = static_cast<int>(c.mesh.n_nodes());
  pb.length = c.mesh.length();
  pb.alpha0 = c.mesh.alpha0();
  pb.alpha1 = c.mesh.alpha1();
  pb.prev = c.prev;
  pb.forcing = c.data.forcing(c.mesh, c.prev.t, c.h);
  pb.h = c.h;
  return pb;
}

Comparison compare_step(const OracleCase& c) {
  const stepper::FixedPointResult fp =
      stepper::fixed_point_step(c.phys, c.data, c.mesh, c.prev, c.h);
  const GridFunction mu = stepper::reconstruct_mu(c.mesh, c.prev.mu, c.prev.phi, fp.phi, c.h);
  const DenseStepResult ref = dense_step_solve(to_dense(c));
  Comparison cmp;
  for (std::size_t i = 0; i < ref.theta.size(); ++i) {
    cmp.theta_diff = std::max(cmp.theta_diff, std::abs(fp.theta[i] - ref.theta[i]));
    cmp.phi_diff = std::max(cmp.phi_diff, std::abs(fp.phi[i] - ref.phi[i]));
    cmp.mu_diff = std::max(cmp.mu_diff, std::abs(mu[i] - ref.mu[i]));
  }
  cmp.max_diff = std::max({cmp.theta_diff, cmp.phi_diff, cmp.mu_diff});
  cmp.damped_steps = ref.damped_steps;
  return cmp;
}

}  // namespace entroflow::oracle
