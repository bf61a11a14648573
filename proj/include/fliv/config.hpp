#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fliv/estimators.hpp"
#include "fliv/ingest.hpp"
#include "fliv/simgen.hpp"

namespace fliv {

enum class Command { Simulate, Fit, Bootstrap, Bench };
enum class ReportFormat { Csv, Json };

std::string_view to_string(Command c);
std::string_view to_string(ReportFormat f);
ReportFormat parse_format(std::string_view s);

/// Everything one CLI invocation needs. Serialized as flat JSON keys; the
/// scenario keys mirror ScenarioConfig (x_structure, x_rho, x_sigma, ...).
struct RunConfig {
  Command command = Command::Simulate;

  std::optional<std::string> preset;  ///< study1 ... study5
  ScenarioConfig scenario;            ///< inline scenario, or base for the preset
  std::optional<std::size_t> n_override;
  std::optional<std::size_t> n_grid_override;

  std::vector<Estimator> estimators{std::begin(kAllEstimators), std::end(kAllEstimators)};
  KRange k_range;
  int reps = 500;
  int bootstrap_reps = 500;
  double level = 0.95;
  int simex_nsim = 50;
  double lambda_max = 2.0001;
  double lambda_step = 0.05;
  std::uint64_t seed = 1;
  int threads = 0;
  int bench_reps = 20;

  std::string out;
  ReportFormat format = ReportFormat::Csv;
  std::optional<std::string> export_data;  ///< simulate: directory for replicate-0 CSVs

  // fit / bootstrap inputs
  std::optional<std::string> long_csv;
  std::optional<std::string> outcomes_csv;
  LongSchema long_schema;
  OutcomeSchema outcome_schema{"subject", "y", {}, std::nullopt};
  PreprocessRules preprocess;
  double max_bad_fraction = 0.0;

  /// Throws InvalidConfig when a command's required fields are missing.
  void validate() const;

  SimexConfig simex_config() const;
  EstimatorOptions estimator_options() const;
  /// Scenarios this run covers: the preset grid or the inline scenario, with
  /// overrides and the run seed applied and duplicates removed.
  std::vector<ScenarioConfig> scenarios() const;
};

/// Scenario grids of the five simulation studies, built on top of base.
std::vector<ScenarioConfig> preset_scenarios(const std::string& name, const ScenarioConfig& base);
std::vector<std::string> preset_names();

nlohmann::json scenario_to_json(const ScenarioConfig& s);
ScenarioConfig scenario_from_json(const nlohmann::json& j, ScenarioConfig base = {});

nlohmann::json config_to_json(const RunConfig& c);
/// Applies keys of j on top of base; unknown keys are an InvalidConfig error.
RunConfig config_from_json(const nlohmann::json& j, RunConfig base = {});
RunConfig load_config_file(const std::string& path, RunConfig base = {});

}  // namespace fliv
