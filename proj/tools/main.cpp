#include <iostream>
#include <map>
#include <set>

#include "CLI11.hpp"
#include "eklab/harness.hpp"

using namespace eklab;

namespace {

const std::map<std::string, std::set<Scenario>>& commands() {
  static const std::map<std::string, std::set<Scenario>> c = {
      {"simulate", {Scenario::dispersion}},
      {"bkw-build", {Scenario::cascade_residual}},
      {"sweep", {Scenario::fullspace_convergence, Scenario::cascade_residual, Scenario::halfspace_residual}},
      {"layer", {Scenario::layer_profiles}},
      {"nls-compare", {Scenario::madelung_compare}},
      {"energy-report", {Scenario::energy_audit}},
  };
  return c;
}

int run(const std::string& command, const std::string& config, const std::string& out_flag) {
  try {
    const auto cfg = ExperimentConfig::load(config);
    if (!commands().at(command).count(cfg.scenario))
      throw ConfigError("scenario '" + std::string(to_string(cfg.scenario)) + "' is not run by '" + command + "'");
    const std::filesystem::path out = out_flag.empty() ? cfg.out : std::filesystem::path(out_flag);
    const auto res = run_experiment(cfg, out, command);
    for (const auto& a : res.assertions)
      std::cout << (a.pass ? "PASS " : "FAIL ") << a.name << ": " << a.value << " (" << a.bound << ")\n";
    if (const auto* f = res.first_failure()) {
      std::cerr << "assertion failed: " << f->name << " = " << f->value << " (" << f->bound << ")\n";
      return 2;
    }
    return 0;
  } catch (const std::exception& e) {
    std::cerr << config << ": " << e.what() << '\n';
    return exit_code_for(e);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Euler-Korteweg experiments"};
  app.require_subcommand(1);
  std::string config, out;
  std::string chosen;
  for (const auto& [name, scenarios] : commands()) {
    std::string help = "runs";
    for (auto s : scenarios) help += std::string(" ") + to_string(s);
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config, "experiment config file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out, "output directory (overrides the config's out key)");
    sub->callback([&chosen, n = name] { chosen = n; });
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 3;
  }
  return run(chosen, config, out);
}
