#include <cmath>
#include <random>

#include <doctest.h>

#include "entroflow/diagnostics.hpp"
#include "entroflow/oracle.hpp"
#include "entroflow/stepper.hpp"
#include "support.hpp"

using namespace entroflow;
using namespace entroflow::diagnostics;

namespace {

State with_u(State s, double eps) {
  s.u.clear();
  for (double th : s.theta) s.u.push_back(graphs::Ln_eps(eps, th));
  return s;
}

Setup smooth_setup(int cells, int N, graphs::GraphKind kind) {
  Setup s;
  s.n_cells = cells;
  s.phys.eps = 0.2;
  s.phys.tau = 0.2;
  s.phys.theta_a = 0.5;
  s.phys.theta_b = 0.5;
  s.phys.latent = {1.0, 0.0};
  s.phys.graph.kind = kind;
  s.data.theta_left = TimeProfile::constant(1.5);
  s.data.initial.theta_mean = 1.2;
  s.data.initial.theta_amplitude = 0.2;
  s.data.initial.phi_amplitude = 0.5;
  s.data.initial.phi_mode = 2;
  s.N = N;
  s.T = N * 0.5 * stepper::step_guard(s.phys);
  return s;
}

}  // namespace

TEST_SUITE("diagnostics") {
  TEST_CASE("conserved total") {
    const Mesh m(8, 2.0);
    CHECK(conserved_total(m, GridFunction(9, 0.37), GridFunction(9, 0.0), 0.1) ==
          doctest::Approx(0.37).epsilon(1e-15));
    const Mesh m3(2, 1.0);
    const GridFunction phi{0.3, -0.1, 0.7}, mu{1.0, 2.0, -3.0};
    // weights 1/4, 1/2, 1/4 on the unit interval
    const double direct =
        0.25 * (0.3 + 0.1 * 1.0) + 0.5 * (-0.1 + 0.1 * 2.0) + 0.25 * (0.7 + 0.1 * -3.0);
    CHECK(conserved_total(m3, phi, mu, 0.1) == doctest::Approx(direct).epsilon(1e-15));
  }

  TEST_CASE("energy functional") {
    const Mesh m(2, 1.0);
    PhysParams p;
    p.gamma = 2.0;
    p.eps = 0.5;
    p.graph.kind = graphs::GraphKind::Indicator;
    const GridFunction phi{0.0, 0.5, 2.0}, mu{1.0, 0.0, 1.0};
    // gradients: slopes 1 and 3 on cells of width 1/2
    const double grad = 0.5 * (1.0 + 9.0);
    const double pot = 0.25 * graphs::moreau(p.graph, p.eps, 2.0);
    const double expected = 0.5 * p.gamma * grad + pot + 0.5 * 0.1 * (0.25 + 0.25);
    CHECK(energy(m, p, phi, mu, 0.1) == doctest::Approx(expected).epsilon(1e-14));
  }

  TEST_CASE("subgradient slack") {
    const Mesh m(16, 1.0);
    std::mt19937_64 rng(31);
    const auto a = testsupport::random_vector(17, rng, -2.0, 2.0);
    for (auto kind : {graphs::GraphKind::Regular, graphs::GraphKind::Logarithmic,
                      graphs::GraphKind::Indicator}) {
      const graphs::GraphSpec g{kind};
      CHECK(check_subgradient_step(g, 0.1, a, a, m) == 0.0);
      for (int k = 0; k < 20; ++k) {
        const auto b = testsupport::random_vector(17, rng, -2.0, 2.0);
        CHECK(check_subgradient_step(g, 0.1, a, b, m) >= -1e-12);
      }
    }
  }

  TEST_CASE("temperature convexity slack") {
    const Mesh m(16, 1.0);
    PhysParams p;
    p.eps = 0.05;
    std::mt19937_64 rng(32);
    const auto a = testsupport::random_vector(17, rng, 0.1, 3.0);
    CHECK(check_temperature_step(m, p, a, a).slack == doctest::Approx(0.0).epsilon(1e-14));
    for (int k = 0; k < 20; ++k) {
      const auto b = testsupport::random_vector(17, rng, 0.1, 3.0);
      CHECK(check_temperature_step(m, p, a, b).slack >= -1e-12);
    }
    GridFunction lo(17, 1e-2), hi(17, 10.0);
    const auto big = check_temperature_step(m, p, lo, hi);
    CHECK(std::isfinite(big.slack));
    CHECK(big.slack >= 0.0);
    CHECK(big.rho_total > 0.0);
    CHECK(check_temperature_step(m, p, hi, lo).slack >= 0.0);
  }

  TEST_CASE("energy inequality on a stationary step") {
    const Mesh m(8, 1.0);
    PhysParams p;
    p.theta_a = 0.3;
    p.theta_b = 0.5;
    const State s = with_u(State{0, 0.0, GridFunction(9, 1.0), GridFunction(9, 0.2),
                                 GridFunction(9, 0.0), {}},
                           p.eps);
    const auto rec = check_energy_step(m, p, s, s, 0.01);
    CHECK(rec.slack >= 0.0);
    CHECK(rec.energy_increment() == 0.0);
    CHECK(rec.dissipation_w == 0.0);
  }

  TEST_CASE("energy inequality and identities on a solver step") {
    std::mt19937_64 rng(33);
    for (auto kind : {graphs::GraphKind::Regular, graphs::GraphKind::Logarithmic,
                      graphs::GraphKind::Indicator}) {
      const auto c = oracle::random_case(kind, rng, 17);
      const stepper::Problem pb{c.phys, c.mesh, c.data, {}};
      const auto out = stepper::advance(pb, c.prev, c.h);
      const auto rec = check_energy_step(c.mesh, c.phys, c.prev, out.next, c.h);
      CHECK(rec.slack >= -1e-9);
      CHECK(rec.slack == check_energy_step(c.mesh, c.phys, c.prev, out.next, c.h).slack);
      CHECK(identity_energy_residual(c.mesh, c.phys, c.prev, out.next, c.h) <= 1e-9);
      CHECK(identity_dual_residual(c.mesh, c.prev, out.next, c.h) <= 1e-9);
      CHECK(out.report.slack_a2 >= -1e-9);
      CHECK(out.report.slack_a13 >= -1e-9);
    }
  }

  TEST_CASE("energy audit telescopes") {
    const Setup s = smooth_setup(16, 30, graphs::GraphKind::Logarithmic);
    const Trajectory tr = stepper::run(s);
    REQUIRE(tr.ok);
    const auto audit = energy_audit(tr, s.mesh(), s.phys);
    CHECK(audit.energies.size() == 31);
    CHECK(audit.telescoping_error <= 1e-12);
    CHECK(audit.min_slack >= -1e-9);
  }

  TEST_CASE("bound tracker") {
    Setup st = smooth_setup(8, 10, graphs::GraphKind::Logarithmic);
    st.phys.theta_a = 1.0;
    st.data.theta_left = TimeProfile::constant(1.0);
    st.data.initial = InitialSpec{};
    const Trajectory still = stepper::run(st);
    REQUIRE(still.ok);
    const auto rep = bound_tracker(still, st.mesh(), st.phys);
    CHECK(rep.quantities.size() == 12);
    for (const char* name : {"tau_dt_phi_L2H", "dt_phi_L2Vstar", "dt_log_theta_L2Vstar",
                             "dt_lambda_phi_L2Vstar"}) {
      REQUIRE(rep.find(name) != nullptr);
      CHECK(rep.find(name)->value <= 1e-20);
    }
    CHECK(rep.find("dt_log_theta_L2Vstar")->tau_weighted);
    CHECK_FALSE(rep.find("theta_L2V")->tau_weighted);
    CHECK(rep.find("no_such_quantity") == nullptr);
  }

  TEST_CASE("bound tracker under mesh refinement") {
    const Setup coarse = smooth_setup(32, 20, graphs::GraphKind::Regular);
    Setup fine = coarse;
    fine.n_cells = 64;
    const auto rc = bound_tracker(stepper::run(coarse), coarse.mesh(), coarse.phys);
    const auto rf = bound_tracker(stepper::run(fine), fine.mesh(), fine.phys);
    for (const char* name : {"phi_LinfV", "theta_L2V", "mu_L2V", "log_theta_LinfH"}) {
      const double a = rc.find(name)->value, b = rf.find(name)->value;
      CHECK(std::abs(a - b) <= 0.05 * std::max(a, b));
    }
  }

  TEST_CASE("trajectory distance") {
    const Setup s = smooth_setup(8, 8, graphs::GraphKind::Regular);
    const Trajectory a = stepper::run(s);
    const auto self = trajectory_distance(a, a, s.mesh());
    CHECK(self.combined_L2H == 0.0);
    CHECK(self.phi_CVstar == 0.0);
    Setup s2 = s;
    s2.N = 16;
    const Trajectory b = stepper::run(s2);
    const auto d = trajectory_distance(a, b, s.mesh());
    CHECK(d.combined_L2H > 0.0);
    CHECK(d.combined_L2H ==
          doctest::Approx(std::hypot(d.phi_L2H, d.theta_L2H)).epsilon(1e-14));
    const auto back = trajectory_distance(b, a, s.mesh());
    CHECK(back.combined_L2H == doctest::Approx(d.combined_L2H).epsilon(1e-14));
  }

  TEST_CASE("coercivity probe") {
    for (auto kind : {graphs::GraphKind::Regular, graphs::GraphKind::Logarithmic,
                      graphs::GraphKind::Indicator}) {
      for (double eps : {0.1, 0.05, 0.025}) {
        PhysParams p;
        p.graph.kind = kind;
        p.eps = eps;
        const double c = coercivity_probe(p);
        MESSAGE(graphs::to_string(kind) << " eps=" << eps << " C=" << c);
        CHECK(std::isfinite(c));
        CHECK(c >= 0.0);
      }
    }
  }
}
