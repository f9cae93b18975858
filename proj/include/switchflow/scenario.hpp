#pragma once

#include "switchflow/integrator.hpp"
#include "switchflow/objective.hpp"
#include "switchflow/serialization.hpp"
#include "switchflow/switching.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace switchflow {

inline constexpr int kSchemaVersion = 1;

enum class ScenarioKind { Subgradient, Monotone };
enum class ResidualKind { Subgradient, Quadrant, Pairing };

// A validated scenario. `diagnostics` keeps the checked diagnostics entries;
// `source` is the config it came from.
struct Scenario {
  std::string name;
  std::string description;
  ScenarioKind kind = ScenarioKind::Subgradient;
  Layout layout;
  std::vector<ModeDescriptor> modes;
  std::vector<MonotoneMap> maps;
  Vector zero;  // common zero of the maps
  SwitchingSignal signal = SwitchingSignal::constant(1);
  StepScheme scheme;
  SimulationOptions simulation;
  double horizon = 0.0;
  Vector initial_condition;
  std::uint64_t seed = 0;
  ResidualKind residual_kind = ResidualKind::Subgradient;
  Json diagnostics = Json::array();
  std::size_t csv_stride = 1;
  std::optional<std::string> output_dir;
  Json source;

  int mode_count() const;
};

// Throws ConfigInvalid naming the offending field path, or
// InitialConditionOutsideSet. Relative edge-list paths resolve against
// `base_dir`.
Scenario parse_scenario(const Json& config, const std::filesystem::path& base_dir = ".");
Scenario load_scenario(const std::filesystem::path& path);

std::vector<std::string> preset_names();
// Throws UnknownPreset.
Json preset_config(const std::string& name);
Scenario preset(const std::string& name);

// Command-line overrides, applied to the config before parsing.
struct Overrides {
  std::optional<double> h;
  std::optional<double> horizon;
  std::optional<std::uint64_t> seed;
  std::optional<double> dwell;
};
Json apply_overrides(Json config, const Overrides& overrides);

struct CheckResult {
  std::string name;
  bool expected = true;
  bool observed = false;
  std::string detail;
  Json data;

  bool matched() const { return expected == observed; }
};

struct RunResult {
  Trajectory trajectory;
  std::vector<CheckResult> checks;

  bool ok() const;
  int exit_code() const { return ok() ? 0 : 1; }
  Json diagnostics_json(const Scenario& scenario) const;
  std::string summary(const Scenario& scenario) const;
};

RunResult run_scenario(const Scenario& scenario);

// trajectory.csv, trajectory.json, diagnostics.json and summary.txt.
void write_artifacts(const Scenario& scenario, const RunResult& result,
                     const std::filesystem::path& dir);

// --out, then the config's output.dir, then $SWITCHFLOW_OUT_DIR, then
// ./switchflow_out; the scenario name is appended.
std::filesystem::path output_directory(const Scenario& scenario,
                                       const std::optional<std::string>& cli_dir);

struct SweepGrid {
  std::vector<double> h;
  std::vector<double> dwell;
  std::vector<double> horizon;
  std::vector<std::uint64_t> seed;

  bool empty() const { return h.empty() && dwell.empty() && horizon.empty() && seed.empty(); }
};

struct SweepCell {
  Overrides parameters;
  bool passed = false;
  std::vector<std::string> failed_checks;
  Vector final_state;
  // Sup-norm gap to the next finer h on shared nodes, and its ratio to the
  // previous gap in the same refinement chain.
  std::optional<double> refinement_gap;
  std::optional<double> error_ratio;
};

struct SweepReport {
  std::vector<SweepCell> cells;

  bool all_passed() const;
  Json to_json() const;
  std::string table() const;
};

// Cartesian product over the nonempty axes; cells are ordered by
// (dwell, horizon, seed, h descending). An empty grid gives an empty report.
SweepReport sweep(const Json& config, const SweepGrid& grid,
                  const std::filesystem::path& base_dir = ".");

}  // namespace switchflow
