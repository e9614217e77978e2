#pragma once

#include <span>
#include <string>
#include <vector>

#include "entroflow/diagnostics.hpp"
#include "entroflow/model.hpp"

namespace entroflow::stepper {

struct SolverOptions {
  double newton_tol = 1e-12;  // max-norm residual, relative to max(1, |rhs|)
  int newton_max_iter = 100;
  double cg_tol = 1e-13;
  int cg_max_iter = 0;  // 0: max(200, 4 * nodes)
  double fp_tol = 1e-11;
  int fp_max_iter = 200;
  int ratio_burn_in = 2;
  // Ratios whose numerator is below this (times max(1, |phi|_M)) are not
  // resolvable against the inner solve accuracy and are not checked.
  double ratio_noise_floor = 1e-13;
  bool check_ratio = true;
  double safety = 0.5;
  int max_retries = 5;
  bool diagnostics = true;
};

struct GuardEntry {
  std::string name;
  double value;
};

/// All finite entries of the step-size bound, h0 being their minimum.
struct StepGuard {
  double h0 = 1.0;
  std::vector<GuardEntry> entries;
  const GuardEntry& binding() const;
};

StepGuard step_guard_entries(const PhysParams& p);
/// h0 = min{1, tau/(2|sigma''|), c_s eps tau/(2|lambda_eps'|^2), gamma/(8|sigma''|^2)},
/// zero-denominator entries omitted. Throws PreconditionError for tau = 0.
double step_guard(const PhysParams& p);
/// Theoretical contraction constant 2 |lambda_eps'|^2 h / (c_s eps tau).
double contraction_constant(const PhysParams& p, double h);

struct NewtonStats {
  int iterations = 0;
  double residual = 0.0;
  int cg_iterations = 0;
  int backtracks = 0;
};

/// Quantities of one step that do not depend on the fixed-point iterate.
/// Holds references; the arguments must outlive it.
class StepContext {
public:
  StepContext(const PhysParams& p, const BoundaryAndData& data, const Mesh& m,
              const State& prev, double h);

  const PhysParams& phys() const noexcept { return p_; }
  const Mesh& mesh() const noexcept { return m_; }
  const State& prev() const noexcept { return prev_; }
  double h() const noexcept { return h_; }
  const StepForcing& forcing() const noexcept { return forcing_; }
  std::span<const double> lambda_prime_n() const noexcept { return lambda_prime_n_; }
  std::span<const double> green_mu_n() const noexcept { return green_mu_n_; }
  std::span<const double> green_phi_n() const noexcept { return green_phi_n_; }

private:
  const PhysParams& p_;
  const Mesh& m_;
  const State& prev_;
  double h_;
  StepForcing forcing_;
  GridFunction lambda_prime_n_;
  GridFunction green_mu_n_;
  GridFunction green_phi_n_;
};

/// Nodal residual of the temperature equation, divided by the lumped mass.
GridFunction residual_A(const StepContext& ctx, std::span<const double> phi_trial,
                        std::span<const double> theta);
/// Nodal residual of the phase equation, divided by the lumped mass.
GridFunction residual_B(const StepContext& ctx, std::span<const double> theta_input,
                        std::span<const double> phi);

GridFunction solve_A(const StepContext& ctx, std::span<const double> phi_trial,
                     std::span<const double> guess, const SolverOptions& opt = {},
                     NewtonStats* stats = nullptr);
GridFunction solve_B(const StepContext& ctx, std::span<const double> theta_input,
                     std::span<const double> guess, const SolverOptions& opt = {},
                     NewtonStats* stats = nullptr);

/// Convenience forms warm-started from the previous level.
GridFunction solve_A(const PhysParams& p, const BoundaryAndData& data, const Mesh& m,
                     const State& prev, std::span<const double> phi_trial, double h);
GridFunction solve_B(const PhysParams& p, const BoundaryAndData& data, const Mesh& m,
                     const State& prev, std::span<const double> theta_input, double h);

struct FixedPointResult {
  GridFunction theta;
  GridFunction phi;
  int iterations = 0;
  std::vector<double> ratios;          // every ratio_k
  std::vector<double> checked_ratios;  // those subject to the bound
  double q_theory = 0.0;
  NewtonStats newton_A;  // accumulated iterations, last residual
  NewtonStats newton_B;
};

/// phi^{k+1} = B(A(phi^k)) from phi^0 = phi_n. Throws SolverFailure at the
/// iteration cap and InvariantViolation if a checked ratio exceeds q_theory.
FixedPointResult fixed_point_step(const StepContext& ctx, const SolverOptions& opt = {});
FixedPointResult fixed_point_step(const PhysParams& p, const BoundaryAndData& data,
                                  const Mesh& m, const State& prev, double h,
                                  const SolverOptions& opt = {});

/// mu_{n+1} = G mu_n + (1/h) G (phi_n - phi_{n+1}).
GridFunction reconstruct_mu(const Mesh& m, std::span<const double> mu_n,
                            std::span<const double> phi_n, std::span<const double> phi_next,
                            double h);

/// Max-norm residual of the three discrete equations at a computed step,
/// each multiplied by h and divided by the lumped mass.
double scheme_residual(const StepContext& ctx, const State& next);

struct Problem {
  PhysParams phys;
  Mesh mesh;
  BoundaryAndData data;
  SolverOptions options;
};

Problem make_problem(const Setup& setup, const SolverOptions& opt = {});
State initial_state(const Problem& pb);

struct StepOutcome {
  State next;
  StepReport report;
};

/// One step of size h, splitting into 2^k substeps (k <= max_retries) on
/// solver failure. Throws SolverFailure when all retries fail.
StepOutcome advance(const Problem& pb, const State& prev, double h);

/// N steps of size T/N. Step failures end the run with ok = false.
Trajectory run(const Problem& pb, double T, int N);
Trajectory run(const Setup& setup, const SolverOptions& opt = {});

enum class ContinuationParam { H, Eps, Tau };
std::string_view to_string(ContinuationParam p) noexcept;

struct ContinuationLevel {
  double value = 0.0;
  int N = 0;
  double h = 0.0;
  bool ok = true;
  std::string failure;
  Trajectory trajectory;
  diagnostics::BoundReport bounds;
  // Against the previous level; NaN for the first.
  diagnostics::TrajectoryDistance distance;
};

struct ConvergenceTable {
  ContinuationParam param = ContinuationParam::H;
  std::vector<ContinuationLevel> levels;
};

/// Halving schedule value, value/2, ... with `levels` entries.
std::vector<double> halving_schedule(double value, int levels);

/// Runs one level per schedule entry. For eps and tau a common N is used,
/// raised if needed so that every level satisfies h <= safety * h0. For h the
/// schedule entries are step sizes and must divide T into whole steps.
ConvergenceTable continuation(const Setup& base, ContinuationParam param,
                              std::span<const double> schedule,
                              const SolverOptions& opt = {});
ConvergenceTable continuation(const Setup& base, ContinuationParam param, int levels,
                              const SolverOptions& opt = {});

}  // namespace entroflow::stepper
