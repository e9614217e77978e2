#include <cmath>
#include <random>

#include <doctest.h>

#include "entroflow/discretization.hpp"
#include "entroflow/errors.hpp"
#include "support.hpp"

using namespace entroflow::disc;
using testsupport::dense_solve;
using testsupport::max_abs_diff;
using testsupport::random_vector;

namespace {

// (M + K) x = M g, assembled densely.
std::vector<double> dense_green(int cells, double length, const std::vector<double>& g) {
  auto a = testsupport::p1_stiffness(cells, length);
  const auto m = testsupport::p1_lumped_mass(cells, length);
  std::vector<double> b(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    a[i][i] += m[i];
    b[i] = m[i] * g[i];
  }
  return dense_solve(a, b);
}

// K w = M v subject to sum M w = 0, with a Lagrange multiplier.
std::vector<double> dense_zero_mean(int cells, double length, const std::vector<double>& v) {
  const auto k = testsupport::p1_stiffness(cells, length);
  const auto m = testsupport::p1_lumped_mass(cells, length);
  const std::size_t n = v.size();
  testsupport::Matrix a(n + 1, std::vector<double>(n + 1, 0.0));
  std::vector<double> b(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) a[i][j] = k[i][j];
    a[i][n] = a[n][i] = m[i];
    b[i] = m[i] * v[i];
  }
  auto x = dense_solve(a, b);
  x.pop_back();
  return x;
}

std::vector<double> zero_mass(std::vector<double> v, const Mesh& m) {
  const double mean = m.integral(v) / m.length();
  for (double& x : v) x -= mean;
  return v;
}

}  // namespace

TEST_SUITE("discretization") {
  TEST_CASE("mesh invariants") {
    const Mesh m(10, 2.5, 0.7, 1.3);
    CHECK(m.n_nodes() == 11);
    double total = 0.0;
    for (double w : m.lumped_mass()) total += w;
    CHECK(total == doctest::Approx(2.5).epsilon(1e-15));
    const std::vector<double> ones(11, 1.0);
    for (double x : m.apply_stiffness(ones)) CHECK(std::abs(x) <= 1e-14);
    std::mt19937_64 rng(1);
    const auto a = random_vector(11, rng);
    const std::vector<double> b(11, 2.0);
    CHECK(m.robin_form(a, b) == doctest::Approx(0.7 * a[0] * 2.0 + 1.3 * a[10] * 2.0));
    CHECK_THROWS_AS(Mesh(0, 1.0), entroflow::PreconditionError);
  }

  TEST_CASE("tridiagonal solve matches dense elimination") {
    std::mt19937_64 rng(2);
    const Mesh m(6, 1.0);
    Tridiagonal t = m.mass_plus_stiffness();
    const auto rhs = random_vector(7, rng);
    auto a = testsupport::p1_stiffness(6, 1.0);
    const auto mass = testsupport::p1_lumped_mass(6, 1.0);
    for (std::size_t i = 0; i < 7; ++i) a[i][i] += mass[i];
    CHECK(max_abs_diff(t.solve(rhs), dense_solve(a, rhs)) <= 1e-13);
  }

  TEST_CASE("neumann_green") {
    const Mesh m(4, 1.0);
    const std::vector<double> c(5, 3.25);
    CHECK(max_abs_diff(neumann_green(m, c), c) <= 1e-14);
    const std::vector<double> z(5, 0.0);
    CHECK(max_abs_diff(neumann_green(m, z), z) == 0.0);
    std::mt19937_64 rng(3);
    for (int k = 0; k < 10; ++k) {
      const auto g = random_vector(5, rng);
      CHECK(max_abs_diff(neumann_green(m, g), dense_green(4, 1.0, g)) <= 1e-12);
    }
  }

  TEST_CASE("neumann_green inverts (M + K) M^{-1}") {
    const Mesh m(16, 1.3);
    std::mt19937_64 rng(4);
    const auto g = random_vector(17, rng);
    const auto x = neumann_green(m, g);
    const auto kx = m.apply_stiffness(x);
    const auto w = m.lumped_mass();
    std::vector<double> back(17);
    for (std::size_t i = 0; i < 17; ++i) back[i] = x[i] + kx[i] / w[i];
    CHECK(max_abs_diff(back, g) <= 1e-12);
  }

  TEST_CASE("green operator is symmetric, monotone and nonexpansive") {
    const Mesh m(12, 1.0);
    std::mt19937_64 rng(5);
    for (int k = 0; k < 50; ++k) {
      const auto a = random_vector(13, rng), b = random_vector(13, rng);
      const auto ga = neumann_green(m, a), gb = neumann_green(m, b);
      CHECK(m.mass_inner(a, gb) == doctest::Approx(m.mass_inner(b, ga)).epsilon(1e-13));
      std::vector<double> d(13), gd(13);
      for (std::size_t i = 0; i < 13; ++i) {
        d[i] = a[i] - b[i];
        gd[i] = ga[i] - gb[i];
      }
      CHECK(m.mass_inner(gd, d) >= 0.0);
      CHECK(m.mass_norm_sq(gd) <= m.mass_norm_sq(d) * (1 + 1e-14));
    }
  }

  TEST_CASE("zero_mean_green") {
    const Mesh m(4, 1.0);
    const std::vector<double> z(5, 0.0);
    CHECK(max_abs_diff(zero_mean_green(m, z), z) == 0.0);
    // one positive and one negative bump
    const auto v = zero_mass({0.0, 1.0, 0.0, -1.0, 0.0}, m);
    const auto w = zero_mean_green(m, v);
    CHECK(max_abs_diff(w, dense_zero_mean(4, 1.0, v)) <= 1e-12);
    CHECK(std::abs(m.integral(w)) <= 1e-14);
    std::mt19937_64 rng(6);
    for (int k = 0; k < 10; ++k) {
      const auto r = zero_mass(random_vector(5, rng), m);
      CHECK(max_abs_diff(zero_mean_green(m, r), dense_zero_mean(4, 1.0, r)) <= 1e-12);
    }
    CHECK_THROWS_AS(zero_mean_green(m, std::vector<double>(5, 1.0)),
                    entroflow::PreconditionError);
  }

  TEST_CASE("dual norms") {
    const Mesh m(4, 1.0);
    const std::vector<double> z(5, 0.0);
    CHECK(dual_norm_V0(m, z) == 0.0);
    CHECK(dual_norm_V(m, z) == 0.0);
    CHECK(dual_norm_V(m, std::vector<double>(5, 1.0)) == doctest::Approx(1.0).epsilon(1e-14));
    std::mt19937_64 rng(7);
    const auto v = zero_mass(random_vector(5, rng), m);
    std::vector<double> v2(v);
    for (double& x : v2) x *= 2.0;
    CHECK(dual_norm_V0(m, v2) == doctest::Approx(2.0 * dual_norm_V0(m, v)).epsilon(1e-14));
    CHECK(dual_norm_V(m, v2) == doctest::Approx(2.0 * dual_norm_V(m, v)).epsilon(1e-14));
    const auto w = dense_zero_mean(4, 1.0, v);
    const auto mass = testsupport::p1_lumped_mass(4, 1.0);
    double s = 0.0;
    for (std::size_t i = 0; i < 5; ++i) s += mass[i] * v[i] * w[i];
    CHECK(dual_norm_V0(m, v) == doctest::Approx(std::sqrt(s)).epsilon(1e-12));
    // ||v||_{V0*}^2 = |grad N v|^2
    const auto nv = zero_mean_green(m, v);
    CHECK(dual_norm_V0(m, v) * dual_norm_V0(m, v) ==
          doctest::Approx(m.grad_norm_sq(nv)).epsilon(1e-12));
  }

  TEST_CASE("trace equivalence constants are positive and ordered") {
    const Mesh m(32, 1.0);
    const auto c = measure_trace_equivalence(m, 200, 9);
    MESSAGE("trace constants: " << c.lower << " .. " << c.upper);
    CHECK(c.lower > 0.0);
    CHECK(c.upper >= c.lower);
  }
}
