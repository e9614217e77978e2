#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "entroflow/discretization.hpp"
#include "entroflow/graphs.hpp"

namespace entroflow {

using disc::GridFunction;
using disc::Mesh;

/// Scalar coefficients and model functions of the phase-field system.
/// sigma(r) = theta_a r - theta_b r^2, lambda from `latent`.
struct PhysParams {
  double c_s = 1.0;    // specific heat
  double eta = 1.0;    // entropy flux coefficient
  double gamma = 1.0;  // interface coefficient
  double tau = 1.0;    // viscosity
  double eps = 0.1;    // Yosida / log regularization, in (0, 1]
  graphs::GraphSpec graph{};
  graphs::LatentHeat latent{};
  double theta_a = 0.0;
  double theta_b = 0.0;

  double sigma_prime(double r) const noexcept { return theta_a - 2.0 * theta_b * r; }
  double sigma_second() const noexcept { return -2.0 * theta_b; }
  double sigma_second_sup() const noexcept { return 2.0 * (theta_b < 0 ? -theta_b : theta_b); }
  double lambda_prime(double r) const { return latent.truncated_prime(eps, r); }
  double lambda(double r) const { return latent.truncated(eps, r); }

  /// Throws PreconditionError naming the first violated constraint.
  void validate() const;
};

enum class ProfileKind { Constant, Piecewise, Sinusoidal };

/// Scalar function of time used for boundary temperatures and sources.
///   Constant:   value
///   Piecewise:  value for t < switch_time, value_after afterwards
///   Sinusoidal: value + amplitude * sin(2 pi t / period)
struct TimeProfile {
  ProfileKind kind = ProfileKind::Constant;
  double value = 0.0;
  double value_after = 0.0;
  double switch_time = 0.0;
  double amplitude = 0.0;
  double period = 1.0;

  static TimeProfile constant(double v) { return TimeProfile{ProfileKind::Constant, v}; }

  double at(double t) const;
  double min_value() const;
  double max_value() const;
  /// (1/(t1-t0)) * integral over (t0, t1), 4-point Gauss-Legendre.
  double interval_average(double t0, double t1) const;
};

/// Source f(x, t) = profile(t) * cos(pi * mode * x / L).
struct SourceSpec {
  TimeProfile profile{};
  int mode = 0;
};

/// Initial data generators:
///   theta0 = theta_mean + theta_amplitude cos(pi theta_mode x / L)
///   phi0   = phi_mean + phi_amplitude cos(pi phi_mode x / L) + zero-mass noise
struct InitialSpec {
  double theta_mean = 1.0;
  double theta_amplitude = 0.0;
  int theta_mode = 1;
  double phi_mean = 0.0;
  double phi_amplitude = 0.0;
  int phi_mode = 1;
  double phi_noise = 0.0;
  double mu0 = 0.0;
};

/// Boundary weights, bounds and data generators, independent of any mesh.
struct DataSpec {
  double alpha0 = 1.0;
  double alpha1 = 1.0;
  double alpha_min = 0.5;
  double alpha_max = 2.0;
  double theta_min = 0.5;
  double theta_max = 2.0;
  TimeProfile theta_left = TimeProfile::constant(1.0);
  TimeProfile theta_right = TimeProfile::constant(1.0);
  SourceSpec source{};
  InitialSpec initial{};
  std::uint64_t seed = 1;
};

/// Time-averaged data for one step interval.
struct StepForcing {
  GridFunction f;            // nodal source average
  double theta_left = 1.0;   // boundary temperature average at x = 0
  double theta_right = 1.0;  // boundary temperature average at x = L
};

/// Boundary data and initial state on a concrete mesh.
struct BoundaryAndData {
  double alpha_min = 0.5;
  double alpha_max = 2.0;
  double theta_min = 0.5;
  double theta_max = 2.0;
  TimeProfile theta_left = TimeProfile::constant(1.0);
  TimeProfile theta_right = TimeProfile::constant(1.0);
  SourceSpec source{};
  GridFunction theta0;
  GridFunction phi0;
  GridFunction mu0;

  StepForcing forcing(const Mesh& m, double t0, double h) const;
  /// Checks the boundary/initial bounds and that the phase mean lies in the
  /// interior of D(beta); throws PreconditionError.
  void validate(const Mesh& m, graphs::GraphSpec g) const;
};

BoundaryAndData make_data(const DataSpec& spec, const Mesh& m);

/// Mesh size, horizon and all data: everything needed to run the scheme.
struct Setup {
  int n_cells = 64;
  double length = 1.0;
  double T = 1.0;
  int N = 100;
  PhysParams phys{};
  DataSpec data{};

  double h() const { return T / N; }
  Mesh mesh() const { return Mesh(n_cells, length, data.alpha0, data.alpha1); }
};

/// Nodal fields at one time level; u = Ln_eps(theta).
struct State {
  int n = 0;
  double t = 0.0;
  GridFunction theta;
  GridFunction phi;
  GridFunction mu;
  GridFunction u;
};

struct StepReport {
  int n = 0;          // index of the new time level
  double t = 0.0;
  double h = 0.0;
  int substeps = 1;   // > 1 when the retry protocol split the step
  int fp_iterations = 0;
  std::vector<double> ratios;  // checked contraction ratios
  double max_ratio = 0.0;
  double q_theory = 0.0;
  int newton_A_iterations = 0;
  int newton_B_iterations = 0;
  int cg_iterations = 0;
  double newton_A_residual = 0.0;
  double newton_B_residual = 0.0;

  double conserved_total = 0.0;
  double energy = 0.0;
  double min_theta = 0.0;
  double min_rho = 0.0;
  double slack_a15 = 0.0;
  double slack_a2 = 0.0;
  double slack_a13 = 0.0;
  double identity_a10_residual = 0.0;
  double identity_b2_residual = 0.0;
  double scheme_residual = 0.0;
};

struct Trajectory {
  double T = 0.0;
  int N = 0;
  double h = 0.0;
  std::vector<State> states;
  std::vector<StepReport> reports;
  bool ok = true;
  int failed_step = -1;
  std::string failure;
};

}  // namespace entroflow
