#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "entroflow/cli.hpp"

namespace efc = entroflow::cli;

int main(int argc, char** argv) {
  CLI::App app{"entroflow: phase separation with entropy balance, time-discrete solver"};
  app.require_subcommand(1);

  std::string config;
  std::string out;
  auto* run = app.add_subcommand("run", "Run one configuration");
  run->add_option("--config", config, "Configuration file")->required();
  run->add_option("--out", out, "Output directory");

  std::string sweep_config;
  std::string sweep_out;
  std::string param;
  int levels = 3;
  auto* sweep = app.add_subcommand("sweep", "Continuation study in h, eps or tau");
  sweep->add_option("--config", sweep_config, "Configuration file")->required();
  sweep->add_option("--param", param, "h | eps | tau")->required();
  sweep->add_option("--levels", levels, "Number of halving levels")->required();
  sweep->add_option("--out", sweep_out, "Output directory");

  double slack_floor = 1e-9;
  auto* check = app.add_subcommand("check", "Invariant battery on the preset suite");
  check->add_option("--slack-floor", slack_floor)->group("");

  std::uint64_t seed = 20240611;
  int cases = 20;
  auto* oracle = app.add_subcommand("oracle", "Randomized stepper vs dense oracle comparison");
  oracle->add_option("--seed", seed, "Random seed");
  oracle->add_option("--cases", cases, "Cases per graph kind");

  std::string preset_name;
  auto* preset = app.add_subcommand("preset", "Print a preset configuration");
  preset->add_option("name", preset_name, "Preset name")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : efc::kConfigError;
  }

  auto opt = [](const std::string& s) { return s.empty() ? std::nullopt : std::optional<std::string>(s); };
  if (*run) return efc::cmd_run(config, opt(out), std::cerr);
  if (*sweep) return efc::cmd_sweep(sweep_config, param, levels, opt(sweep_out), std::cerr);
  if (*check) return efc::cmd_check(slack_floor, std::cout);
  if (*oracle) return efc::cmd_oracle(seed, cases, std::cout);
  if (*preset) return efc::cmd_preset(preset_name, std::cout, std::cerr);
  return efc::kConfigError;
}
