#include "entroflow/discretization.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "entroflow/errors.hpp"

namespace entroflow::disc {

void Tridiagonal::apply(std::span<const double> x, std::span<double> y) const {
  const std::size_t n = size();
  for (std::size_t i = 0; i < n; ++i) {
    double v = diag[i] * x[i];
    if (i > 0) v += lower[i] * x[i - 1];
    if (i + 1 < n) v += upper[i] * x[i + 1];
    y[i] = v;
  }
}

GridFunction Tridiagonal::solve(std::span<const double> rhs) const {
  const std::size_t n = size();
  GridFunction x(n);
  if (n == 0) return x;
  std::vector<double> c_prime(n, 0.0);
  c_prime[0] = upper[0] / diag[0];
  x[0] = rhs[0] / diag[0];
  // Forward sweep
  for (std::size_t i = 1; i < n; ++i) {
    const double factor = 1.0 / (diag[i] - lower[i] * c_prime[i - 1]);
    c_prime[i] = upper[i] * factor;
    x[i] = (rhs[i] - lower[i] * x[i - 1]) * factor;
  }
  // Back substitution
  for (std::size_t ip = n - 1; ip > 0; --ip) {
    x[ip - 1] -= c_prime[ip - 1] * x[ip];
  }
  return x;
}

Mesh::Mesh(int n_cells, double length, double alpha0, double alpha1)
    : n_cells_(n_cells), length_(length), alpha0_(alpha0), alpha1_(alpha1) {
  if (n_cells < 1) throw PreconditionError("mesh needs at least one cell");
  if (!(length > 0.0)) throw PreconditionError("mesh length must be positive");
  if (alpha0 < 0.0 || alpha1 < 0.0) {
    throw PreconditionError("Robin weights must be nonnegative");
  }
  const std::size_t n = static_cast<std::size_t>(n_cells) + 1;
  const double dx = spacing();
  mass_.assign(n, dx);
  mass_.front() = mass_.back() = 0.5 * dx;

  stiffness_ = Tridiagonal(n);
  for (std::size_t e = 0; e + 1 < n; ++e) {
    const double k = 1.0 / dx;
    stiffness_.diag[e] += k;
    stiffness_.diag[e + 1] += k;
    stiffness_.upper[e] -= k;
    stiffness_.lower[e + 1] -= k;
  }
}

double Mesh::mass_inner(std::span<const double> a, std::span<const double> b) const {
  double s = 0.0;
  for (std::size_t i = 0; i < mass_.size(); ++i) s += mass_[i] * a[i] * b[i];
  return s;
}

double Mesh::integral(std::span<const double> a) const {
  double s = 0.0;
  for (std::size_t i = 0; i < mass_.size(); ++i) s += mass_[i] * a[i];
  return s;
}

double Mesh::stiffness_form(std::span<const double> a, std::span<const double> b) const {
  // Element-wise sum of (a_{e+1}-a_e)(b_{e+1}-b_e)/dx; exact for constants.
  const double inv_dx = 1.0 / spacing();
  double s = 0.0;
  for (std::size_t e = 0; e + 1 < mass_.size(); ++e) {
    s += (a[e + 1] - a[e]) * (b[e + 1] - b[e]);
  }
  return s * inv_dx;
}

double Mesh::v_norm_sq(std::span<const double> a) const {
  return grad_norm_sq(a) + mass_norm_sq(a);
}

double Mesh::robin_form(std::span<const double> a, std::span<const double> b) const {
  return alpha0_ * a.front() * b.front() + alpha1_ * a.back() * b.back();
}

GridFunction Mesh::apply_stiffness(std::span<const double> x) const {
  GridFunction y(x.size());
  const double inv_dx = 1.0 / spacing();
  const std::size_t n = x.size();
  for (std::size_t i = 0; i < n; ++i) {
    double v = 0.0;
    if (i > 0) v += x[i] - x[i - 1];
    if (i + 1 < n) v += x[i] - x[i + 1];
    y[i] = v * inv_dx;
  }
  return y;
}

Tridiagonal Mesh::mass_plus_stiffness() const {
  Tridiagonal a = stiffness_;
  for (std::size_t i = 0; i < mass_.size(); ++i) a.diag[i] += mass_[i];
  return a;
}

GridFunction neumann_green(const Mesh& m, std::span<const double> g) {
  const auto mass = m.lumped_mass();
  GridFunction rhs(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) rhs[i] = mass[i] * g[i];
  return m.mass_plus_stiffness().solve(rhs);
}

namespace {

void require_zero_mass(const Mesh& m, std::span<const double> v) {
  const double total = m.integral(v);
  const double scale = std::sqrt(m.length() * m.mass_norm_sq(v));
  if (std::abs(total) > 1e-10 * scale) {
    throw PreconditionError("zero_mean_green: input has nonzero mass " +
                            std::to_string(total));
  }
}

}  // namespace

GridFunction zero_mean_green(const Mesh& m, std::span<const double> v) {
  require_zero_mass(m, v);
  const std::size_t n = v.size();
  const auto mass = m.lumped_mass();
  GridFunction w(n, 0.0);
  if (n < 2) return w;
  // Remove the roundoff-level mean, then pin w_0 = 0 and solve the reduced
  // (Dirichlet-at-node-0) system, which is SPD and consistent.
  const double mean = m.integral(v) / m.length();
  Tridiagonal reduced(n - 1);
  GridFunction rhs(n - 1);
  const Tridiagonal& k = m.stiffness();
  for (std::size_t i = 1; i < n; ++i) {
    reduced.diag[i - 1] = k.diag[i];
    if (i > 1) reduced.lower[i - 1] = k.lower[i];
    if (i + 1 < n) reduced.upper[i - 1] = k.upper[i];
    rhs[i - 1] = mass[i] * (v[i] - mean);
  }
  const GridFunction tail = reduced.solve(rhs);
  std::copy(tail.begin(), tail.end(), w.begin() + 1);
  const double w_mean = m.integral(w) / m.length();
  for (double& x : w) x -= w_mean;
  return w;
}

double dual_norm_V0(const Mesh& m, std::span<const double> v) {
  const GridFunction w = zero_mean_green(m, v);
  return std::sqrt(std::max(0.0, m.mass_inner(v, w)));
}

double dual_norm_V(const Mesh& m, std::span<const double> v) {
  const GridFunction w = neumann_green(m, v);
  return std::sqrt(std::max(0.0, m.mass_inner(v, w)));
}

TraceConstants measure_trace_equivalence(const Mesh& m, int samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  TraceConstants c{std::numeric_limits<double>::infinity(), 0.0};
  GridFunction z(m.n_nodes());
  for (int s = 0; s < samples; ++s) {
    // Mix smooth and rough samples so both ends of the spectrum are probed.
    const double roughness = static_cast<double>(s % 4) / 3.0;
    const double freq = 1.0 + static_cast<double>(s % 7);
    for (std::size_t i = 0; i < z.size(); ++i) {
      const double x = m.node(i) / m.length();
      z[i] = (1.0 - roughness) * std::cos(freq * M_PI * x + dist(rng)) +
             roughness * dist(rng);
    }
    const double denom = m.grad_norm_sq(z) + z.front() * z.front() + z.back() * z.back();
    if (denom <= 0.0) continue;
    const double ratio = m.v_norm_sq(z) / denom;
    c.lower = std::min(c.lower, ratio);
    c.upper = std::max(c.upper, ratio);
  }
  return c;
}

}  // namespace entroflow::disc
