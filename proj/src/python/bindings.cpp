#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <random>
#include <sstream>

#include "entroflow/cli.hpp"
#include "entroflow/errors.hpp"
#include "entroflow/oracle.hpp"

namespace py = pybind11;
using namespace entroflow;

namespace {

graphs::GraphSpec graph(const std::string& name) {
  const auto k = graphs::parse_graph_kind(name);
  if (!k) throw py::value_error("unknown graph '" + name + "'");
  return {*k};
}

py::dict trajectory_dict(const Trajectory& tr) {
  std::vector<double> t;
  std::vector<std::vector<double>> theta, phi, mu, u;
  for (const State& s : tr.states) {
    t.push_back(s.t);
    theta.push_back(s.theta);
    phi.push_back(s.phi);
    mu.push_back(s.mu);
    u.push_back(s.u);
  }
  py::dict d;
  d["ok"] = tr.ok;
  d["failure"] = tr.failure;
  d["h"] = tr.h;
  d["t"] = t;
  d["theta"] = theta;
  d["phi"] = phi;
  d["mu"] = mu;
  d["u"] = u;
  std::vector<double> conserved, energy, s15, s2, s13, ratio;
  for (const auto& r : tr.reports) {
    conserved.push_back(r.conserved_total);
    energy.push_back(r.energy);
    s15.push_back(r.slack_a15);
    s2.push_back(r.slack_a2);
    s13.push_back(r.slack_a13);
    ratio.push_back(r.max_ratio);
  }
  d["conserved_total"] = conserved;
  d["energy"] = energy;
  d["slack_a15"] = s15;
  d["slack_a2"] = s2;
  d["slack_a13"] = s13;
  d["max_ratio"] = ratio;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Time-discrete solver for phase separation with entropy balance";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<PreconditionError>(m, "PreconditionError", PyExc_ValueError);
  py::register_exception<SolverFailure>(m, "SolverFailure", PyExc_RuntimeError);
  py::register_exception<InvariantViolation>(m, "InvariantViolation", PyExc_RuntimeError);

  m.def("prox", [](const std::string& g, double eps, double r) { return graphs::prox(graph(g), eps, r); },
        py::arg("graph"), py::arg("eps"), py::arg("r"));
  m.def("yosida", [](const std::string& g, double eps, double r) { return graphs::yosida(graph(g), eps, r); },
        py::arg("graph"), py::arg("eps"), py::arg("r"));
  m.def("moreau", [](const std::string& g, double eps, double r) { return graphs::moreau(graph(g), eps, r); },
        py::arg("graph"), py::arg("eps"), py::arg("r"));
  m.def("rho", &graphs::rho, py::arg("eps"), py::arg("r"));
  m.def("Ln_eps", &graphs::Ln_eps, py::arg("eps"), py::arg("r"));

  m.def("preset_names", &cli::preset_names);
  m.def("preset", [](const std::string& name) { return cli::to_text(cli::preset(name)); },
        py::arg("name"), "Configuration text of a preset");
  m.def("step_guard", [](const std::string& text) {
        return stepper::step_guard(cli::parse_config(text).setup.phys);
      }, py::arg("config"), "h0 for the coefficients in a configuration text");
  m.def("run", [](const std::string& text) {
        const cli::RunConfig cfg = cli::parse_config(text);
        cli::validate(cfg);
        Trajectory tr;
        {
          py::gil_scoped_release release;
          tr = stepper::run(cfg.setup);
        }
        return trajectory_dict(tr);
      }, py::arg("config"), "Run a configuration text and return the trajectory");
  m.def("check", [](double slack_floor) {
        std::vector<cli::SuiteEntry> suite;
        {
          py::gil_scoped_release release;
          suite = cli::run_check_suite(slack_floor);
        }
        py::dict out;
        for (const auto& e : suite) out[py::str(e.preset)] = e.passed();
        return out;
      }, py::arg("slack_floor") = 1e-9);
  m.def("oracle_max_difference", [](const std::string& g, std::uint64_t seed, int cases) {
        std::mt19937_64 rng(seed);
        double worst = 0.0;
        for (int c = 0; c < cases; ++c) {
          worst = std::max(worst, oracle::compare_step(oracle::random_case(graph(g).kind, rng)).max_diff);
        }
        return worst;
      }, py::arg("graph"), py::arg("seed") = 1, py::arg("cases") = 5);
}
