#include <cmath>
#include <random>

#include <doctest.h>

#include "entroflow/errors.hpp"
#include "entroflow/oracle.hpp"
#include "entroflow/stepper.hpp"
#include "support.hpp"

using namespace entroflow;
using namespace entroflow::stepper;
using testsupport::max_abs_diff;

namespace {

PhysParams reference_params() {
  PhysParams p;
  p.c_s = 1.0;
  p.eps = 0.1;
  p.tau = 0.1;
  p.gamma = 1.0;
  p.theta_a = 0.5;
  p.theta_b = 0.5;
  p.latent = {1.0, -1.0};
  return p;
}

// phi = 0, theta = theta_G = 1, f = 0 with sigma'(0) = lambda'(0) theta.
Setup stationary_setup(int cells, int N) {
  Setup s;
  s.n_cells = cells;
  s.phys = reference_params();
  s.phys.graph.kind = graphs::GraphKind::Logarithmic;
  s.phys.theta_a = 1.0;
  s.T = N * 0.25 * step_guard(s.phys);
  s.N = N;
  return s;
}

State make_state(const GridFunction& theta, const GridFunction& phi, const GridFunction& mu,
                 double eps, double t = 0.0) {
  State s;
  s.t = t;
  s.theta = theta;
  s.phi = phi;
  s.mu = mu;
  for (double th : theta) s.u.push_back(graphs::Ln_eps(eps, th));
  return s;
}

double max_abs(const GridFunction& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

TEST_SUITE("stepper") {
  TEST_CASE("step guard entries") {
    const PhysParams p = reference_params();
    // entries 1, 0.1/2, 0.01/(2*21^2), 1/8
    CHECK(step_guard(p) == doctest::Approx(0.01 / 882.0).epsilon(1e-14));
    const StepGuard g = step_guard_entries(p);
    CHECK(g.entries.size() == 4);
    CHECK(g.binding().name == "c_s*eps*tau/(2|lambda_eps'|^2)");

    PhysParams lin = p;
    lin.theta_b = 0.0;
    const StepGuard gl = step_guard_entries(lin);
    CHECK(gl.entries.size() == 2);
    CHECK(gl.h0 == doctest::Approx(0.01 / 882.0).epsilon(1e-14));

    PhysParams twice = p;
    twice.tau = 0.2;
    const StepGuard g2 = step_guard_entries(twice);
    for (std::size_t i = 0; i < g.entries.size(); ++i) {
      const double factor = g.entries[i].name.find("tau") != std::string::npos ? 2.0 : 1.0;
      CHECK(g2.entries[i].value == doctest::Approx(factor * g.entries[i].value).epsilon(1e-14));
    }

    PhysParams zero = p;
    zero.tau = 0.0;
    CHECK_THROWS_AS(step_guard(zero), PreconditionError);
    CHECK(contraction_constant(p, 0.5 * step_guard(p)) == doctest::Approx(0.5).epsilon(1e-14));
  }

  TEST_CASE("temperature solve keeps a stationary constant state") {
    PhysParams p = reference_params();
    const Mesh m(8, 1.0);
    BoundaryAndData data;
    data.theta_left = data.theta_right = TimeProfile::constant(1.4);
    const State prev = make_state(GridFunction(9, 1.4), GridFunction(9, 0.2), GridFunction(9, 0.0),
                                  p.eps);
    const auto th = solve_A(p, data, m, prev, prev.phi, 0.5 * step_guard(p));
    CHECK(max_abs_diff(th, prev.theta) <= 1e-13);
  }

  TEST_CASE("phase solve has the zero solution") {
    PhysParams p = reference_params();
    p.theta_a = 0.0;
    for (auto kind : {graphs::GraphKind::Regular, graphs::GraphKind::Logarithmic,
                      graphs::GraphKind::Indicator}) {
      p.graph.kind = kind;
      const Mesh m(8, 1.0);
      BoundaryAndData data;
      const State prev =
          make_state(GridFunction(9, 1.0), GridFunction(9, 0.0), GridFunction(9, 0.0), p.eps);
      const auto ph = solve_B(p, data, m, prev, GridFunction(9, 0.0), 0.5 * step_guard(p));
      CHECK(max_abs(ph) <= 1e-14);
    }
  }

  TEST_CASE("solver residuals on a 17-node case") {
    std::mt19937_64 rng(21);
    for (auto kind : {graphs::GraphKind::Regular, graphs::GraphKind::Logarithmic,
                      graphs::GraphKind::Indicator}) {
      const auto c = oracle::random_case(kind, rng, 17);
      const StepContext ctx(c.phys, c.data, c.mesh, c.prev, c.h);
      std::vector<double> trial(c.prev.phi);
      for (double& x : trial) x *= 0.9;
      const auto th = solve_A(ctx, trial, c.prev.theta);
      CHECK(max_abs(residual_A(ctx, trial, th)) <= 1e-11);
      const auto ph = solve_B(ctx, th, c.prev.phi);
      CHECK(max_abs(residual_B(ctx, th, ph)) <= 1e-11);
    }
  }

  TEST_CASE("convenience solves reject step sizes above the guard") {
    const auto c = [] {
      std::mt19937_64 rng(22);
      return oracle::random_case(graphs::GraphKind::Regular, rng);
    }();
    CHECK_THROWS_AS(solve_A(c.phys, c.data, c.mesh, c.prev, c.prev.phi, 4.0 * c.h),
                    PreconditionError);
  }

  TEST_CASE("fixed point is immediate for stationary data") {
    const Setup s = stationary_setup(8, 1);
    const Problem pb = make_problem(s);
    const State s0 = initial_state(pb);
    const auto fp = fixed_point_step(pb.phys, pb.data, pb.mesh, s0, s.h());
    CHECK(fp.iterations == 1);
    CHECK(max_abs_diff(fp.phi, s0.phi) <= 1e-14);
    CHECK(max_abs_diff(fp.theta, s0.theta) <= 1e-14);
  }

  TEST_CASE("fixed point matches the dense oracle") {
    std::mt19937_64 rng(23);
    for (auto kind : {graphs::GraphKind::Regular, graphs::GraphKind::Logarithmic,
                      graphs::GraphKind::Indicator}) {
      for (int k = 0; k < 5; ++k) {
        const auto cmp = oracle::compare_step(oracle::random_case(kind, rng));
        CHECK(cmp.max_diff <= 1e-9);
      }
    }
  }

  TEST_CASE("contraction ratios stay below the theoretical constant") {
    std::mt19937_64 rng(24);
    const auto c = oracle::random_case(graphs::GraphKind::Logarithmic, rng, 9);
    const auto fp = fixed_point_step(c.phys, c.data, c.mesh, c.prev, c.h);
    CHECK(fp.q_theory == doctest::Approx(contraction_constant(c.phys, c.h)));
    for (double r : fp.checked_ratios) CHECK(r <= fp.q_theory * (1 + 1e-6));
  }

  TEST_CASE("chemical potential reconstruction") {
    const Mesh m(4, 1.0);
    const GridFunction z(5, 0.0), phi{0.1, -0.2, 0.3, 0.0, 0.5};
    CHECK(max_abs(reconstruct_mu(m, z, phi, phi, 0.01)) == 0.0);
    CHECK(max_abs_diff(reconstruct_mu(m, GridFunction(5, 2.5), phi, phi, 0.01),
                       GridFunction(5, 2.5)) <= 1e-14);
    // (M + K) mu = M (mu_n + (phi_n - phi_next)/h), dense
    std::mt19937_64 rng(25);
    const auto mu_n = testsupport::random_vector(5, rng);
    const auto next = testsupport::random_vector(5, rng);
    const double h = 0.03;
    auto a = testsupport::p1_stiffness(4, 1.0);
    const auto mass = testsupport::p1_lumped_mass(4, 1.0);
    std::vector<double> b(5);
    for (std::size_t i = 0; i < 5; ++i) {
      a[i][i] += mass[i];
      b[i] = mass[i] * (mu_n[i] + (phi[i] - next[i]) / h);
    }
    CHECK(max_abs_diff(reconstruct_mu(m, mu_n, phi, next, h), testsupport::dense_solve(a, b)) <=
          1e-12);
  }

  TEST_CASE("stationary run is constant in time") {
    const Setup s = stationary_setup(16, 20);
    const Trajectory tr = run(s);
    REQUIRE(tr.ok);
    CHECK(tr.states.size() == 21);
    for (const State& st : tr.states) {
      CHECK(max_abs_diff(st.phi, tr.states.front().phi) <= 1e-12);
      CHECK(max_abs_diff(st.theta, tr.states.front().theta) <= 1e-12);
      CHECK(max_abs(st.mu) <= 1e-12);
    }
  }

  TEST_CASE("two steps equal two chained oracle solves") {
    std::mt19937_64 rng(26);
    const auto c = oracle::random_case(graphs::GraphKind::Regular, rng);
    const Problem pb{c.phys, c.mesh, c.data, SolverOptions{}};
    const auto s1 = advance(pb, c.prev, c.h).next;
    const auto s2 = advance(pb, s1, c.h).next;

    auto dp = oracle::to_dense(c);
    const auto o1 = oracle::dense_step_solve(dp);
    dp.prev = make_state(o1.theta, o1.phi, o1.mu, c.phys.eps, c.prev.t + c.h);
    dp.forcing = c.data.forcing(c.mesh, c.prev.t + c.h, c.h);
    const auto o2 = oracle::dense_step_solve(dp);
    CHECK(max_abs_diff(s2.theta, o2.theta) <= 1e-9);
    CHECK(max_abs_diff(s2.phi, o2.phi) <= 1e-9);
    CHECK(max_abs_diff(s2.mu, o2.mu) <= 1e-9);
  }

  TEST_CASE("run rejects a step above the safety bound and names the entry") {
    Setup s = stationary_setup(8, 4);
    s.T *= 4.0;
    try {
      (void)run(s);
      FAIL("expected PreconditionError");
    } catch (const PreconditionError& e) {
      CHECK(std::string(e.what()).find("lambda_eps") != std::string::npos);
    }
  }

  TEST_CASE("halving schedule") {
    const auto s = halving_schedule(0.1, 3);
    REQUIRE(s.size() == 3);
    CHECK(s[1] == 0.05);
    CHECK(s[2] == 0.025);
  }

  TEST_CASE("continuation of stationary data has zero differences") {
    const Setup s = stationary_setup(8, 8);
    for (auto param : {ContinuationParam::H, ContinuationParam::Eps, ContinuationParam::Tau}) {
      const auto table = continuation(s, param, 3);
      REQUIRE(table.levels.size() == 3);
      CHECK(std::isnan(table.levels[0].distance.combined_L2H));
      for (std::size_t k = 1; k < 3; ++k) {
        CHECK(table.levels[k].ok);
        CHECK(table.levels[k].distance.combined_L2H <= 1e-12);
        CHECK(table.levels[k].distance.phi_CVstar <= 1e-12);
      }
    }
  }
}
