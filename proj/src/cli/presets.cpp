#include <string>

#include "entroflow/config.hpp"
#include "entroflow/errors.hpp"

namespace entroflow::cli {

namespace {

// Shared coefficients: c_s = 1, eps = 0.1, tau = 0.1, lambda(r) = r - r^2,
// theta_b = 0.5, gamma = 1, for which h0 = 0.01/882.
RunConfig base(const std::string& name) {
  RunConfig c;
  c.name = name;
  c.out_dir = "out/" + name;
  Setup& s = c.setup;
  s.n_cells = 64;
  s.length = 1.0;
  s.phys.c_s = 1.0;
  s.phys.eta = 1.0;
  s.phys.gamma = 1.0;
  s.phys.tau = 0.1;
  s.phys.eps = 0.1;
  s.phys.theta_a = 0.5;
  s.phys.theta_b = 0.5;
  s.phys.latent = {1.0, -1.0};
  s.N = 100;
  s.T = 5e-4;
  s.data.theta_min = 0.5;
  s.data.theta_max = 2.0;
  s.data.alpha_min = 0.5;
  s.data.alpha_max = 2.0;
  s.data.alpha0 = 1.0;
  s.data.alpha1 = 1.5;
  s.data.theta_left.kind = ProfileKind::Sinusoidal;
  s.data.theta_left.value = 1.3;
  s.data.theta_left.amplitude = 0.2;
  s.data.theta_left.period = 2e-4;
  s.data.theta_right = TimeProfile::constant(0.9);
  s.data.source.profile.kind = ProfileKind::Piecewise;
  s.data.source.profile.value = 1.0;
  s.data.source.profile.value_after = -0.5;
  s.data.source.profile.switch_time = 2.5e-4;
  s.data.source.mode = 1;
  s.data.initial.theta_mean = 1.1;
  s.data.initial.theta_amplitude = 0.3;
  s.data.initial.theta_mode = 1;
  s.data.initial.phi_mean = 0.0;
  s.data.initial.phi_amplitude = 0.3;
  s.data.initial.phi_mode = 1;
  s.data.initial.phi_noise = 0.05;
  s.data.seed = 7;
  return c;
}

// Lighter sweep presets: linear lambda keeps h0 proportional to eps * tau.
RunConfig sweep_base(const std::string& name) {
  RunConfig c = base(name);
  Setup& s = c.setup;
  s.n_cells = 32;
  s.phys.tau = 0.2;
  s.phys.latent = {1.0, 0.0};
  s.T = 0.05;
  s.N = 40;
  s.data.theta_left = TimeProfile::constant(1.5);
  s.data.theta_right = TimeProfile::constant(1.0);
  s.data.source.profile = TimeProfile::constant(0.0);
  s.data.source.mode = 0;
  s.data.initial.theta_mean = 1.0;
  s.data.initial.phi_amplitude = 0.5;
  s.data.initial.phi_mode = 2;
  s.data.initial.phi_noise = 0.0;
  return c;
}

}  // namespace

std::vector<std::string> preset_names() {
  return {"stationary", "smooth-regular", "smooth-log", "obstacle",
          "sweep-eps",  "sweep-h",        "sweep-tau"};
}

std::vector<std::string> check_suite() {
  return {"stationary", "smooth-regular", "smooth-log", "obstacle"};
}

RunConfig preset(std::string_view name) {
  if (name == "stationary") {
    // phi = 0, theta = theta_G = 1, f = 0 and sigma'(0) = lambda'(0) * 1.
    RunConfig c = base("stationary");
    Setup& s = c.setup;
    s.n_cells = 32;
    s.N = 50;
    s.T = 2.5e-4;
    s.phys.graph.kind = graphs::GraphKind::Logarithmic;
    s.phys.theta_a = 1.0;
    s.data.theta_left = TimeProfile::constant(1.0);
    s.data.theta_right = TimeProfile::constant(1.0);
    s.data.source.profile = TimeProfile::constant(0.0);
    s.data.source.mode = 0;
    s.data.initial = InitialSpec{};
    s.data.initial.theta_mean = 1.0;
    return c;
  }
  if (name == "smooth-regular") {
    RunConfig c = base("smooth-regular");
    c.setup.phys.graph.kind = graphs::GraphKind::Regular;
    return c;
  }
  if (name == "smooth-log") {
    RunConfig c = base("smooth-log");
    c.setup.phys.graph.kind = graphs::GraphKind::Logarithmic;
    c.setup.data.initial.phi_mean = 0.1;
    c.setup.data.initial.phi_amplitude = 0.5;
    return c;
  }
  if (name == "obstacle") {
    RunConfig c = base("obstacle");
    c.setup.phys.graph.kind = graphs::GraphKind::Indicator;
    c.setup.data.initial.phi_amplitude = 0.95;
    c.setup.data.initial.phi_noise = 0.0;
    return c;
  }
  if (name == "sweep-eps") {
    return sweep_base("sweep-eps");
  }
  if (name == "sweep-h") {
    return sweep_base("sweep-h");
  }
  if (name == "sweep-tau") {
    // Small tau with a mode-1 profile: tau * pi^2 << 1, the regime the
    // uniform-in-tau bounds describe.
    RunConfig c = sweep_base("sweep-tau");
    c.setup.phys.tau = 0.02;
    c.setup.N = 100;
    c.setup.data.initial.phi_mode = 1;
    return c;
  }
  throw ConfigError("unknown preset '" + std::string(name) + "'");
}

}  // namespace entroflow::cli
