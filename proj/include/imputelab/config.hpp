#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "imputelab/amputation.hpp"
#include "imputelab/csv.hpp"
#include "imputelab/imputers.hpp"
#include "imputelab/pipeline.hpp"
#include "imputelab/predictor.hpp"
#include "imputelab/synthetic.hpp"

namespace imputelab {

enum class run_task { availability, ampute, impute, reconstruct, predict, realtime, mcar_test, synth };

std::string to_string(run_task t);
run_task run_task_from_string(const std::string& s);

struct RunConfig {
  std::string dataset;  // CSV path; empty when the synthetic block supplies data
  std::optional<SyntheticConfig> synthetic;
  FeatureSet features;  // empty = every feature in the dataset
  std::vector<StrategySpec> strategies;
  AmputationConfig amputation;
  run_task task = run_task::reconstruct;
  leakage_mode leakage = leakage_mode::train_only;
  double train_fraction = 0.8;
  week_aggregation aggregation = week_aggregation::mean;
  std::uint64_t seed = 0;
  std::string out_dir = "out";
  unsigned jobs = 0;  // 0 = all available cores
  WideCsvSchema schema;
  PredictorSpec predictor;
  double bh_alpha = 0.05;
};

struct ConfigOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<std::vector<std::string>> features;
  std::optional<std::string> strategy;  // replaces the strategy list with one kind
  std::optional<double> r;
  std::optional<std::string> leakage;
  std::optional<unsigned> jobs;
  std::optional<std::string> task;
};

/// Parse a config document, apply overrides, and resolve derived defaults
/// (strategy and amputation seeds fall back to the global seed).
RunConfig parse_config(const nlohmann::json& doc, const ConfigOverrides& overrides = {});

RunConfig load_config(const std::string& path, const ConfigOverrides& overrides = {});

/// Full resolved config as JSON; parse_config(config_to_json(c)) reproduces c.
nlohmann::json config_to_json(const RunConfig& cfg);

/// Dataset from the config: loads the CSV or generates the synthetic block.
LongitudinalDataset load_config_dataset(const RunConfig& cfg);

/// The configured feature set, or every dataset feature when unset.
FeatureSet resolve_features(const RunConfig& cfg, const LongitudinalDataset& ds);

}  // namespace imputelab
