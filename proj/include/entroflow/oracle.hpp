#pragma once

#include <cstdint>
#include <functional>
#include <random>

#include "entroflow/model.hpp"

namespace entroflow::oracle {

/// One full discrete step posed as a single coupled system in (theta, phi)
/// with the chemical potential eliminated. At most 9 nodes.
struct DenseStepProblem {
  PhysParams phys;
  int n_nodes = 3;
  double length = 1.0;
  double alpha0 = 1.0;
  double alpha1 = 1.0;
  State prev;
  StepForcing forcing;
  double h = 0.0;
};

struct DenseStepResult {
  GridFunction theta;
  GridFunction phi;
  GridFunction mu;
  int iterations = 0;
  int damped_steps = 0;  // Newton steps that needed backtracking
  double residual = 0.0;
};

/// Damped Newton with analytic dense Jacobian and LU solves. Throws
/// OracleError if it fails to reach residual 1e-13.
DenseStepResult dense_step_solve(const DenseStepProblem& pb);

/// Minimizer of |r - s|^2/(2 eps) + betahat(s) by grid search (step 1e-3)
/// followed by golden-section refinement to 1e-10.
double prox_bruteforce(graphs::GraphSpec g, double eps, double r);

/// |central difference - analytic| / max(1, |analytic|).
double fd_check(const std::function<double(double)>& f, const std::function<double(double)>& df,
                double x, double step = 1e-5);

/// A random admissible single-step problem on a small mesh.
struct OracleCase {
  PhysParams phys;
  Mesh mesh;
  BoundaryAndData data;
  State prev;
  double h = 0.0;
};

OracleCase random_case(graphs::GraphKind kind, std::mt19937_64& rng, int n_nodes = 3);

DenseStepProblem to_dense(const OracleCase& c);

struct Comparison {
  double max_diff = 0.0;  // max norm over theta, phi, mu
  double theta_diff = 0.0;
  double phi_diff = 0.0;
  double mu_diff = 0.0;
  int damped_steps = 0;
};

/// Runs the stepper's fixed point and the dense oracle on the same case.
Comparison compare_step(const OracleCase& c);

}  // namespace entroflow::oracle
