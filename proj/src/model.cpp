#include "entroflow/model.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <string>

#include "entroflow/errors.hpp"

namespace entroflow {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw PreconditionError(what);
}

// Gauss-Legendre nodes and weights on [-1, 1].
constexpr std::array<double, 4> kGaussNodes = {-0.86113631159405258, -0.33998104358485626,
                                               0.33998104358485626, 0.86113631159405258};
constexpr std::array<double, 4> kGaussWeights = {0.34785484513745386, 0.65214515486254614,
                                                 0.65214515486254614, 0.34785484513745386};

}  // namespace

void PhysParams::validate() const {
  require(c_s > 0.0, "c_s must be positive");
  require(eta > 0.0, "eta must be positive");
  require(gamma > 0.0, "gamma must be positive");
  require(tau >= 0.0, "tau must be nonnegative");
  require(eps > 0.0 && eps <= 1.0, "eps must lie in (0, 1]");
  require(std::isfinite(theta_a) && std::isfinite(theta_b), "sigma coefficients must be finite");
}

double TimeProfile::at(double t) const {
  switch (kind) {
    case ProfileKind::Constant: return value;
    case ProfileKind::Piecewise: return t < switch_time ? value : value_after;
    case ProfileKind::Sinusoidal: return value + amplitude * std::sin(2.0 * M_PI * t / period);
  }
  return value;
}

double TimeProfile::min_value() const {
  switch (kind) {
    case ProfileKind::Constant: return value;
    case ProfileKind::Piecewise: return std::min(value, value_after);
    case ProfileKind::Sinusoidal: return value - std::abs(amplitude);
  }
  return value;
}

double TimeProfile::max_value() const {
  switch (kind) {
    case ProfileKind::Constant: return value;
    case ProfileKind::Piecewise: return std::max(value, value_after);
    case ProfileKind::Sinusoidal: return value + std::abs(amplitude);
  }
  return value;
}

double TimeProfile::interval_average(double t0, double t1) const {
  if (kind == ProfileKind::Constant) return value;
  if (kind == ProfileKind::Piecewise) {
    // Exact: quadrature would smear the jump.
    if (t1 <= switch_time) return value;
    if (t0 >= switch_time) return value_after;
    return (value * (switch_time - t0) + value_after * (t1 - switch_time)) / (t1 - t0);
  }
  const double mid = 0.5 * (t0 + t1);
  const double half = 0.5 * (t1 - t0);
  double s = 0.0;
  for (std::size_t q = 0; q < 4; ++q) s += kGaussWeights[q] * at(mid + half * kGaussNodes[q]);
  return 0.5 * s;
}

StepForcing BoundaryAndData::forcing(const Mesh& m, double t0, double h) const {
  StepForcing out;
  out.theta_left = theta_left.interval_average(t0, t0 + h);
  out.theta_right = theta_right.interval_average(t0, t0 + h);
  const double amp = source.profile.interval_average(t0, t0 + h);
  out.f.resize(m.n_nodes());
  for (std::size_t i = 0; i < out.f.size(); ++i) {
    out.f[i] = amp * std::cos(M_PI * source.mode * m.node(i) / m.length());
  }
  return out;
}

void BoundaryAndData::validate(const Mesh& m, graphs::GraphSpec g) const {
  require(alpha_min > 0.0 && alpha_min <= alpha_max, "alpha bounds must satisfy 0 < alpha_min <= alpha_max");
  require(m.alpha0() >= alpha_min && m.alpha0() <= alpha_max, "alpha0 outside [alpha_min, alpha_max]");
  require(m.alpha1() >= alpha_min && m.alpha1() <= alpha_max, "alpha1 outside [alpha_min, alpha_max]");
  require(theta_min > 0.0 && theta_min <= theta_max, "theta bounds must satisfy 0 < theta_min <= theta_max");
  for (const TimeProfile* p : {&theta_left, &theta_right}) {
    require(p->min_value() >= theta_min && p->max_value() <= theta_max,
            "boundary temperature outside [theta_min, theta_max]");
  }
  const std::size_t n = m.n_nodes();
  require(theta0.size() == n && phi0.size() == n && mu0.size() == n,
          "initial data size does not match the mesh");
  for (double v : theta0) {
    require(v >= theta_min && v <= theta_max, "initial temperature outside [theta_min, theta_max]");
  }
  for (double v : phi0) {
    require(graphs::betahat(g, v).is_finite(), "betahat(phi0) is infinite at some node");
  }
  const double m0 = m.integral(phi0) / m.length();
  require(graphs::in_domain_interior(g, m0), "mean of phi0 is not in the interior of D(beta)");
}

BoundaryAndData make_data(const DataSpec& spec, const Mesh& m) {
  BoundaryAndData d;
  d.alpha_min = spec.alpha_min;
  d.alpha_max = spec.alpha_max;
  d.theta_min = spec.theta_min;
  d.theta_max = spec.theta_max;
  d.theta_left = spec.theta_left;
  d.theta_right = spec.theta_right;
  d.source = spec.source;

  const std::size_t n = m.n_nodes();
  const InitialSpec& ini = spec.initial;
  d.theta0.resize(n);
  d.phi0.resize(n);
  d.mu0.assign(n, ini.mu0);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = m.node(i) / m.length();
    d.theta0[i] = ini.theta_mean + ini.theta_amplitude * std::cos(M_PI * ini.theta_mode * x);
    d.phi0[i] = ini.phi_mean + ini.phi_amplitude * std::cos(M_PI * ini.phi_mode * x);
  }
  if (ini.phi_noise != 0.0) {
    std::mt19937_64 rng(spec.seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    GridFunction noise(n);
    for (double& v : noise) v = dist(rng);
    const double mean = m.integral(noise) / m.length();
    for (std::size_t i = 0; i < n; ++i) d.phi0[i] += ini.phi_noise * (noise[i] - mean);
  }
  return d;
}

}  // namespace entroflow
