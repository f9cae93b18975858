#include "switchflow/error.hpp"
#include "switchflow/scenario.hpp"

#include "CLI11.hpp"

#include <fstream>
#include <iostream>

namespace sf = switchflow;

namespace {

struct Source {
  std::string config;
  std::string preset;
};

void add_source(CLI::App& cmd, Source& src) {
  cmd.add_option("config", src.config, "scenario config (JSON)");
  cmd.add_option("--preset", src.preset, "use a built-in preset instead of a config file");
}

// Loaded config and the directory relative paths resolve against.
std::pair<sf::Json, std::filesystem::path> load(const Source& src) {
  if (!src.preset.empty()) {
    if (!src.config.empty()) sf::fail(sf::ErrorKind::ConfigInvalid, "give a config file or --preset, not both");
    return {sf::preset_config(src.preset), "."};
  }
  if (src.config.empty()) sf::fail(sf::ErrorKind::ConfigInvalid, "no config file or --preset given");
  std::ifstream in(src.config);
  if (!in) sf::fail(sf::ErrorKind::ConfigInvalid, "cannot open config '" + src.config + "'");
  try {
    return {sf::Json::parse(in), std::filesystem::path(src.config).parent_path()};
  } catch (const sf::Json::parse_error& e) {
    sf::fail(sf::ErrorKind::ConfigInvalid, "config '" + src.config + "' is not valid JSON: " + e.what());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulate and check switched subgradient flows"};
  // --h is the step size, so help is --help only.
  app.set_help_flag("--help", "print this help and exit");
  app.require_subcommand(1);

  Source run_src;
  std::optional<std::string> out;
  sf::Overrides overrides;
  auto* run = app.add_subcommand("run", "simulate a scenario and check its expected outcomes");
  add_source(*run, run_src);
  run->add_option("--out", out, "output directory (default $SWITCHFLOW_OUT_DIR or ./switchflow_out)");
  run->add_option("--h", overrides.h, "step size")->check(CLI::PositiveNumber);
  run->add_option("--horizon", overrides.horizon, "final time")->check(CLI::PositiveNumber);
  run->add_option("--seed", overrides.seed, "random seed");

  app.add_subcommand("presets", "list built-in presets");

  std::string shown;
  auto* show = app.add_subcommand("show-preset", "print a preset's config");
  show->add_option("name", shown)->required();

  Source sweep_src;
  sf::SweepGrid grid;
  std::optional<std::string> sweep_out;
  auto* sweep = app.add_subcommand("sweep", "run a scenario over a parameter grid");
  add_source(*sweep, sweep_src);
  sweep->add_option("--h", grid.h, "step sizes")->delimiter(',');
  sweep->add_option("--dwell", grid.dwell, "dwell times")->delimiter(',');
  sweep->add_option("--horizon", grid.horizon, "final times")->delimiter(',');
  sweep->add_option("--seed", grid.seed, "seeds")->delimiter(',');
  sweep->add_option("--out", sweep_out, "write sweep.json to this directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand("presets")) {
      for (const auto& name : sf::preset_names()) std::cout << name << '\n';
      return 0;
    }
    if (app.got_subcommand("show-preset")) {
      std::cout << sf::preset_config(shown).dump(2) << '\n';
      return 0;
    }
    if (app.got_subcommand("run")) {
      auto [config, base] = load(run_src);
      const sf::Scenario s = sf::parse_scenario(sf::apply_overrides(config, overrides), base);
      const sf::RunResult result = sf::run_scenario(s);
      const auto dir = sf::output_directory(s, out);
      sf::write_artifacts(s, result, dir);
      std::cout << result.summary(s) << "artifacts in " << dir.string() << '\n';
      return result.exit_code();
    }
    auto [config, base] = load(sweep_src);
    const sf::SweepReport report = sf::sweep(config, grid, base);
    std::cout << report.table();
    if (sweep_out) {
      std::filesystem::create_directories(*sweep_out);
      std::ofstream(std::filesystem::path(*sweep_out) / "sweep.json", std::ios::binary)
          << report.to_json().dump(2) << '\n';
    }
    return report.all_passed() ? 0 : 1;
  } catch (const sf::Error& e) {
    std::cerr << "error [" << sf::to_string(e.kind()) << "]: " << e.what() << '\n';
    return 2;
  }
}
