#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace entroflow::disc {

/// Nodal values of a P1 function, one per mesh node.
using GridFunction = std::vector<double>;

/// Symmetric or general tridiagonal matrix stored by diagonals.
/// lower[0] and upper[n-1] are unused.
struct Tridiagonal {
  std::vector<double> lower;
  std::vector<double> diag;
  std::vector<double> upper;

  explicit Tridiagonal(std::size_t n = 0) : lower(n, 0.0), diag(n, 0.0), upper(n, 0.0) {}

  std::size_t size() const noexcept { return diag.size(); }
  void apply(std::span<const double> x, std::span<double> y) const;
  /// Thomas algorithm; requires a matrix that needs no pivoting (SPD or
  /// diagonally dominant).
  GridFunction solve(std::span<const double> rhs) const;
};

/// Uniform 1D P1 mesh on (0, L) with lumped mass, stiffness and the two
/// Robin boundary weights. Immutable after construction.
class Mesh {
public:
  Mesh(int n_cells, double length, double alpha0 = 1.0, double alpha1 = 1.0);

  int n_cells() const noexcept { return n_cells_; }
  std::size_t n_nodes() const noexcept { return mass_.size(); }
  double length() const noexcept { return length_; }
  double spacing() const noexcept { return length_ / n_cells_; }
  double node(std::size_t i) const noexcept { return spacing() * static_cast<double>(i); }
  double alpha0() const noexcept { return alpha0_; }
  double alpha1() const noexcept { return alpha1_; }

  std::span<const double> lumped_mass() const noexcept { return mass_; }
  const Tridiagonal& stiffness() const noexcept { return stiffness_; }

  /// Sum_i M_i a_i b_i.
  double mass_inner(std::span<const double> a, std::span<const double> b) const;
  double mass_norm_sq(std::span<const double> a) const { return mass_inner(a, a); }
  /// Sum_i M_i a_i.
  double integral(std::span<const double> a) const;
  /// a^T K b.
  double stiffness_form(std::span<const double> a, std::span<const double> b) const;
  double grad_norm_sq(std::span<const double> a) const { return stiffness_form(a, a); }
  /// ||a||_V^2 = ||grad a||^2 + ||a||^2.
  double v_norm_sq(std::span<const double> a) const;
  /// alpha0 a(0) b(0) + alpha1 a(L) b(L).
  double robin_form(std::span<const double> a, std::span<const double> b) const;

  /// K x.
  GridFunction apply_stiffness(std::span<const double> x) const;
  /// The matrix M + K.
  Tridiagonal mass_plus_stiffness() const;

private:
  int n_cells_;
  double length_;
  double alpha0_;
  double alpha1_;
  std::vector<double> mass_;
  Tridiagonal stiffness_;
};

/// Discrete (1 - Delta)^{-1}: x with (M + K) x = M g.
GridFunction neumann_green(const Mesh& m, std::span<const double> g);

/// Discrete N: zero-mean w with K w = M v. Requires v of zero mass.
GridFunction zero_mean_green(const Mesh& m, std::span<const double> v);

/// ||v||_{V_0^*} = sqrt((M v) . N v); v must have zero mass.
double dual_norm_V0(const Mesh& m, std::span<const double> v);

/// ||v||_{V^*} = sqrt((M v) . F^{-1} v), F^{-1} realized by neumann_green.
double dual_norm_V(const Mesh& m, std::span<const double> v);

/// Empirical constants c1 <= ||z||_V^2 / (||grad z||^2 + z(0)^2 + z(L)^2) <= c2
/// over random grid functions.
struct TraceConstants {
  double lower = 0.0;
  double upper = 0.0;
};
TraceConstants measure_trace_equivalence(const Mesh& m, int samples, std::uint64_t seed);

}  // namespace entroflow::disc
