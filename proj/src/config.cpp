#include "imputelab/config.hpp"

#include <fstream>
#include <initializer_list>

#include "imputelab/error.hpp"
#include "imputelab/rng.hpp"

namespace imputelab {

namespace {

using nlohmann::json;

void expect_keys(const json& obj, const char* ctx, std::initializer_list<const char*> allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* key : allowed)
      if (it.key() == key) {
        known = true;
        break;
      }
    if (!known)
      raise(errc::bad_config, "unknown field '" + it.key() + "' in " + ctx);
  }
}

void expect_object(const json& obj, const char* ctx) {
  if (!obj.is_object()) raise(errc::bad_config, std::string(ctx) + " must be a JSON object");
}

template <typename T>
T field_or(const json& obj, const char* ctx, const char* key, T fallback) {
  const auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    raise(errc::bad_config, std::string("field '") + key + "' in " + ctx + " has the wrong type");
  }
}

template <typename T>
std::optional<T> field_opt(const json& obj, const char* ctx, const char* key) {
  const auto it = obj.find(key);
  if (it == obj.end()) return std::nullopt;
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    raise(errc::bad_config, std::string("field '") + key + "' in " + ctx + " has the wrong type");
  }
}

StrategySpec parse_strategy(const json& entry, std::uint64_t global_seed) {
  StrategySpec spec;
  if (entry.is_string()) {
    spec.kind = strategy_kind_from_string(entry.get<std::string>());
    spec.seed = global_seed;
    return spec;
  }
  expect_object(entry, "strategies entry");
  const auto kind_it = entry.find("kind");
  if (kind_it == entry.end() || !kind_it->is_string())
    raise(errc::bad_config, "field 'kind' in strategies entry is required");
  spec.kind = strategy_kind_from_string(kind_it->get<std::string>());
  const char* ctx = "strategies entry";
  spec.seed = field_or<std::uint64_t>(entry, ctx, "seed", global_seed);
  spec.display_name = field_or<std::string>(entry, ctx, "name", "");
  switch (spec.kind) {
    case strategy_kind::median:
      expect_keys(entry, ctx, {"kind", "seed", "name"});
      break;
    case strategy_kind::windowed_median:
      expect_keys(entry, ctx, {"kind", "seed", "name", "window"});
      spec.window = field_or<int>(entry, ctx, "window", spec.window);
      break;
    case strategy_kind::globem_c_proxy:
      expect_keys(entry, ctx, {"kind", "seed", "name", "row_thresh", "col_thresh"});
      spec.row_thresh = field_or<double>(entry, ctx, "row_thresh", spec.row_thresh);
      spec.col_thresh = field_or<double>(entry, ctx, "col_thresh", spec.col_thresh);
      break;
    case strategy_kind::simple_knn:
      expect_keys(entry, ctx, {"kind", "seed", "name", "k"});
      spec.knn_k = field_or<int>(entry, ctx, "k", spec.knn_k);
      break;
    case strategy_kind::bounded_knn:
      expect_keys(entry, ctx, {"kind", "seed", "name", "l", "u", "clip_lo_pct", "clip_hi_pct"});
      spec.bounded.l = field_or<int>(entry, ctx, "l", spec.bounded.l);
      spec.bounded.u = field_or<int>(entry, ctx, "u", spec.bounded.u);
      spec.bounded.clip_lo_pct = field_or<double>(entry, ctx, "clip_lo_pct", spec.bounded.clip_lo_pct);
      spec.bounded.clip_hi_pct = field_or<double>(entry, ctx, "clip_hi_pct", spec.bounded.clip_hi_pct);
      break;
    case strategy_kind::mice:
      expect_keys(entry, ctx, {"kind", "seed", "name", "iterations", "ridge_lambda"});
      spec.mice.n_iterations = field_or<int>(entry, ctx, "iterations", spec.mice.n_iterations);
      spec.mice.ridge_lambda = field_or<double>(entry, ctx, "ridge_lambda", spec.mice.ridge_lambda);
      break;
    case strategy_kind::soft_impute:
      expect_keys(entry, ctx, {"kind", "seed", "name", "lambda", "max_iters", "tol"});
      spec.soft.lambda = field_opt<double>(entry, ctx, "lambda");
      spec.soft.max_iters = field_or<int>(entry, ctx, "max_iters", spec.soft.max_iters);
      spec.soft.tol = field_or<double>(entry, ctx, "tol", spec.soft.tol);
      break;
    case strategy_kind::autoencoder:
      expect_keys(entry, ctx,
                  {"kind", "seed", "name", "hidden_dim", "activation", "epochs", "learning_rate",
                   "adam_beta1", "adam_beta2", "adam_eps", "initial"});
      spec.ae.hidden_dim = field_or<int>(entry, ctx, "hidden_dim", spec.ae.hidden_dim);
      spec.ae.epochs = field_or<int>(entry, ctx, "epochs", spec.ae.epochs);
      spec.ae.learning_rate = field_or<double>(entry, ctx, "learning_rate", spec.ae.learning_rate);
      spec.ae.adam_beta1 = field_or<double>(entry, ctx, "adam_beta1", spec.ae.adam_beta1);
      spec.ae.adam_beta2 = field_or<double>(entry, ctx, "adam_beta2", spec.ae.adam_beta2);
      spec.ae.adam_eps = field_or<double>(entry, ctx, "adam_eps", spec.ae.adam_eps);
      if (const auto act = field_opt<std::string>(entry, ctx, "activation")) {
        if (*act == "relu")
          spec.ae.activation = ae_activation::relu;
        else if (*act == "sigmoid")
          spec.ae.activation = ae_activation::sigmoid;
        else
          raise(errc::bad_config, "field 'activation' in strategies entry must be relu or sigmoid");
      }
      if (const auto init = field_opt<std::string>(entry, ctx, "initial")) {
        if (*init == "median")
          spec.ae.initial_imputer = ae_initial::median;
        else if (*init == "simple_knn")
          spec.ae.initial_imputer = ae_initial::simple_knn;
        else
          raise(errc::bad_config,
                "field 'initial' in strategies entry must be median or simple_knn");
      }
      break;
  }
  return spec;
}

json strategy_to_json(const StrategySpec& spec) {
  json entry;
  entry["kind"] = to_string(spec.kind);
  entry["seed"] = spec.seed;
  if (!spec.display_name.empty()) entry["name"] = spec.display_name;
  switch (spec.kind) {
    case strategy_kind::median:
      break;
    case strategy_kind::windowed_median:
      entry["window"] = spec.window;
      break;
    case strategy_kind::globem_c_proxy:
      entry["row_thresh"] = spec.row_thresh;
      entry["col_thresh"] = spec.col_thresh;
      break;
    case strategy_kind::simple_knn:
      entry["k"] = spec.knn_k;
      break;
    case strategy_kind::bounded_knn:
      entry["l"] = spec.bounded.l;
      entry["u"] = spec.bounded.u;
      entry["clip_lo_pct"] = spec.bounded.clip_lo_pct;
      entry["clip_hi_pct"] = spec.bounded.clip_hi_pct;
      break;
    case strategy_kind::mice:
      entry["iterations"] = spec.mice.n_iterations;
      entry["ridge_lambda"] = spec.mice.ridge_lambda;
      break;
    case strategy_kind::soft_impute:
      if (spec.soft.lambda) entry["lambda"] = *spec.soft.lambda;
      entry["max_iters"] = spec.soft.max_iters;
      entry["tol"] = spec.soft.tol;
      break;
    case strategy_kind::autoencoder:
      entry["hidden_dim"] = spec.ae.hidden_dim;
      entry["activation"] = spec.ae.activation == ae_activation::relu ? "relu" : "sigmoid";
      entry["epochs"] = spec.ae.epochs;
      entry["learning_rate"] = spec.ae.learning_rate;
      entry["adam_beta1"] = spec.ae.adam_beta1;
      entry["adam_beta2"] = spec.ae.adam_beta2;
      entry["adam_eps"] = spec.ae.adam_eps;
      entry["initial"] = spec.ae.initial_imputer == ae_initial::median ? "median" : "simple_knn";
      break;
  }
  return entry;
}

SyntheticConfig parse_synthetic(const json& obj, std::uint64_t global_seed) {
  expect_object(obj, "synthetic");
  const char* ctx = "synthetic";
  expect_keys(obj, ctx,
              {"n_participants", "n_weeks", "n_features", "missing_rate", "mechanism", "seed",
               "phi", "offset_scale", "trend_scale", "feature_scale", "noise_scale", "label_slope",
               "label_noise"});
  SyntheticConfig cfg;
  cfg.n_participants = field_or<std::size_t>(obj, ctx, "n_participants", cfg.n_participants);
  cfg.n_weeks = field_or<std::size_t>(obj, ctx, "n_weeks", cfg.n_weeks);
  cfg.n_features = field_or<std::size_t>(obj, ctx, "n_features", cfg.n_features);
  cfg.missing_rate = field_or<double>(obj, ctx, "missing_rate", cfg.missing_rate);
  if (const auto mech = field_opt<std::string>(obj, ctx, "mechanism"))
    cfg.mechanism = amputation_kind_from_string(*mech);
  cfg.seed = field_or<std::uint64_t>(obj, ctx, "seed", global_seed);
  cfg.phi = field_or<double>(obj, ctx, "phi", cfg.phi);
  cfg.offset_scale = field_or<double>(obj, ctx, "offset_scale", cfg.offset_scale);
  cfg.trend_scale = field_or<double>(obj, ctx, "trend_scale", cfg.trend_scale);
  cfg.feature_scale = field_or<double>(obj, ctx, "feature_scale", cfg.feature_scale);
  cfg.noise_scale = field_or<double>(obj, ctx, "noise_scale", cfg.noise_scale);
  cfg.label_slope = field_or<double>(obj, ctx, "label_slope", cfg.label_slope);
  cfg.label_noise = field_or<double>(obj, ctx, "label_noise", cfg.label_noise);
  if (cfg.missing_rate < 0.0 || cfg.missing_rate >= 1.0)
    raise(errc::bad_config, "field 'missing_rate' in synthetic must lie in [0, 1)");
  return cfg;
}

json synthetic_to_json(const SyntheticConfig& cfg) {
  json obj;
  obj["n_participants"] = cfg.n_participants;
  obj["n_weeks"] = cfg.n_weeks;
  obj["n_features"] = cfg.n_features;
  obj["missing_rate"] = cfg.missing_rate;
  obj["mechanism"] = to_string(cfg.mechanism);
  obj["seed"] = cfg.seed;
  obj["phi"] = cfg.phi;
  obj["offset_scale"] = cfg.offset_scale;
  obj["trend_scale"] = cfg.trend_scale;
  obj["feature_scale"] = cfg.feature_scale;
  obj["noise_scale"] = cfg.noise_scale;
  obj["label_slope"] = cfg.label_slope;
  obj["label_noise"] = cfg.label_noise;
  return obj;
}

}  // namespace

std::string to_string(run_task t) {
  switch (t) {
    case run_task::availability: return "availability";
    case run_task::ampute: return "ampute";
    case run_task::impute: return "impute";
    case run_task::reconstruct: return "reconstruct";
    case run_task::predict: return "predict";
    case run_task::realtime: return "realtime";
    case run_task::mcar_test: return "mcar-test";
    case run_task::synth: return "synth";
  }
  return "reconstruct";
}

run_task run_task_from_string(const std::string& s) {
  if (s == "availability") return run_task::availability;
  if (s == "ampute") return run_task::ampute;
  if (s == "impute") return run_task::impute;
  if (s == "reconstruct") return run_task::reconstruct;
  if (s == "predict") return run_task::predict;
  if (s == "realtime") return run_task::realtime;
  if (s == "mcar-test" || s == "mcar_test") return run_task::mcar_test;
  if (s == "synth") return run_task::synth;
  raise(errc::bad_config, "unknown task: " + s);
}

RunConfig parse_config(const nlohmann::json& doc, const ConfigOverrides& overrides) {
  expect_object(doc, "config");
  const char* ctx = "config";
  expect_keys(doc, ctx,
              {"dataset", "synthetic", "features", "strategies", "amputation", "task",
               "leakage_mode", "train_fraction", "aggregation", "seed", "out_dir", "jobs",
               "schema", "predictor", "bh_alpha"});

  RunConfig cfg;
  cfg.seed = field_or<std::uint64_t>(doc, ctx, "seed", cfg.seed);
  if (overrides.seed) cfg.seed = *overrides.seed;

  cfg.dataset = field_or<std::string>(doc, ctx, "dataset", "");
  if (doc.contains("synthetic")) cfg.synthetic = parse_synthetic(doc.at("synthetic"), cfg.seed);

  if (const auto names = field_opt<std::vector<std::string>>(doc, ctx, "features"))
    cfg.features.names = *names;
  if (overrides.features) cfg.features.names = *overrides.features;

  if (doc.contains("strategies")) {
    const auto& arr = doc.at("strategies");
    if (!arr.is_array()) raise(errc::bad_config, "field 'strategies' in config must be an array");
    for (const auto& entry : arr) cfg.strategies.push_back(parse_strategy(entry, cfg.seed));
  }
  if (overrides.strategy) {
    StrategySpec spec;
    spec.kind = strategy_kind_from_string(*overrides.strategy);
    spec.seed = cfg.seed;
    cfg.strategies = {spec};
  }

  cfg.amputation.seed = cfg.seed;
  if (doc.contains("amputation")) {
    const auto& amp = doc.at("amputation");
    expect_object(amp, "amputation");
    expect_keys(amp, "amputation", {"kind", "r", "seed"});
    if (const auto kind = field_opt<std::string>(amp, "amputation", "kind"))
      cfg.amputation.kind = amputation_kind_from_string(*kind);
    cfg.amputation.r = field_or<double>(amp, "amputation", "r", cfg.amputation.r);
    cfg.amputation.seed = field_or<std::uint64_t>(amp, "amputation", "seed", cfg.seed);
  }
  if (overrides.r) cfg.amputation.r = *overrides.r;
  if (!(cfg.amputation.r > 0.0 && cfg.amputation.r < 100.0))
    raise(errc::bad_config, "field 'r' in amputation must lie in (0, 100)");

  if (const auto task = field_opt<std::string>(doc, ctx, "task"))
    cfg.task = run_task_from_string(*task);
  if (overrides.task) cfg.task = run_task_from_string(*overrides.task);

  if (const auto mode = field_opt<std::string>(doc, ctx, "leakage_mode"))
    cfg.leakage = leakage_mode_from_string(*mode);
  if (overrides.leakage) cfg.leakage = leakage_mode_from_string(*overrides.leakage);

  cfg.train_fraction = field_or<double>(doc, ctx, "train_fraction", cfg.train_fraction);
  if (!(cfg.train_fraction > 0.0 && cfg.train_fraction < 1.0))
    raise(errc::bad_config, "field 'train_fraction' in config must lie in (0, 1)");

  if (const auto agg = field_opt<std::string>(doc, ctx, "aggregation"))
    cfg.aggregation = week_aggregation_from_string(*agg);

  cfg.out_dir = field_or<std::string>(doc, ctx, "out_dir", cfg.out_dir);
  if (overrides.out_dir) cfg.out_dir = *overrides.out_dir;
  cfg.jobs = field_or<unsigned>(doc, ctx, "jobs", cfg.jobs);
  if (overrides.jobs) cfg.jobs = *overrides.jobs;

  if (doc.contains("schema")) {
    const auto& sch = doc.at("schema");
    expect_object(sch, "schema");
    expect_keys(sch, "schema",
                {"id_column", "date_column", "week_column", "label_column", "missing_tokens"});
    cfg.schema.id_column = field_or<std::string>(sch, "schema", "id_column", cfg.schema.id_column);
    cfg.schema.date_column =
        field_or<std::string>(sch, "schema", "date_column", cfg.schema.date_column);
    cfg.schema.week_column =
        field_or<std::string>(sch, "schema", "week_column", cfg.schema.week_column);
    cfg.schema.label_column =
        field_or<std::string>(sch, "schema", "label_column", cfg.schema.label_column);
    if (const auto toks = field_opt<std::vector<std::string>>(sch, "schema", "missing_tokens"))
      cfg.schema.missing_tokens = *toks;
    if (cfg.schema.id_column.empty() || cfg.schema.date_column.empty())
      raise(errc::bad_config, "fields 'id_column' and 'date_column' in schema must be non-empty");
  }

  if (doc.contains("predictor")) {
    const auto& pred = doc.at("predictor");
    expect_object(pred, "predictor");
    expect_keys(pred, "predictor",
                {"kind", "learning_rate", "iterations", "l2_lambda", "command", "work_dir"});
    if (const auto kind = field_opt<std::string>(pred, "predictor", "kind")) {
      if (*kind == "baseline_logistic")
        cfg.predictor.kind = predictor_kind::baseline_logistic;
      else if (*kind == "external")
        cfg.predictor.kind = predictor_kind::external;
      else
        raise(errc::bad_config,
              "field 'kind' in predictor must be baseline_logistic or external");
    }
    cfg.predictor.learning_rate =
        field_or<double>(pred, "predictor", "learning_rate", cfg.predictor.learning_rate);
    cfg.predictor.iterations =
        field_or<int>(pred, "predictor", "iterations", cfg.predictor.iterations);
    cfg.predictor.l2_lambda =
        field_or<double>(pred, "predictor", "l2_lambda", cfg.predictor.l2_lambda);
    cfg.predictor.command = field_or<std::string>(pred, "predictor", "command", "");
    cfg.predictor.work_dir = field_or<std::string>(pred, "predictor", "work_dir", "");
    if (cfg.predictor.kind == predictor_kind::external && cfg.predictor.command.empty())
      raise(errc::bad_config, "field 'command' in predictor is required for kind external");
  }

  cfg.bh_alpha = field_or<double>(doc, ctx, "bh_alpha", cfg.bh_alpha);
  if (!(cfg.bh_alpha > 0.0 && cfg.bh_alpha < 1.0))
    raise(errc::bad_config, "field 'bh_alpha' in config must lie in (0, 1)");

  if (!cfg.dataset.empty() && cfg.synthetic)
    raise(errc::bad_config, "config sets both 'dataset' and 'synthetic'; pick one data source");
  return cfg;
}

RunConfig load_config(const std::string& path, const ConfigOverrides& overrides) {
  std::ifstream in(path);
  if (!in) raise(errc::io_error, "cannot open config '" + path + "'");
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    raise(errc::bad_config, "config '" + path + "' is not valid JSON: " + e.what());
  }
  return parse_config(doc, overrides);
}

nlohmann::json config_to_json(const RunConfig& cfg) {
  nlohmann::json doc;
  doc["dataset"] = cfg.dataset;
  if (cfg.synthetic) doc["synthetic"] = synthetic_to_json(*cfg.synthetic);
  doc["features"] = cfg.features.names;
  doc["strategies"] = nlohmann::json::array();
  for (const auto& spec : cfg.strategies) doc["strategies"].push_back(strategy_to_json(spec));
  doc["amputation"] = {{"kind", to_string(cfg.amputation.kind)},
                       {"r", cfg.amputation.r},
                       {"seed", cfg.amputation.seed}};
  doc["task"] = to_string(cfg.task);
  doc["leakage_mode"] = to_string(cfg.leakage);
  doc["train_fraction"] = cfg.train_fraction;
  doc["aggregation"] = to_string(cfg.aggregation);
  doc["seed"] = cfg.seed;
  doc["out_dir"] = cfg.out_dir;
  doc["jobs"] = cfg.jobs;
  doc["schema"] = {{"id_column", cfg.schema.id_column},
                   {"date_column", cfg.schema.date_column},
                   {"week_column", cfg.schema.week_column},
                   {"label_column", cfg.schema.label_column},
                   {"missing_tokens", cfg.schema.missing_tokens}};
  doc["predictor"] = {{"kind", cfg.predictor.name()},
                      {"learning_rate", cfg.predictor.learning_rate},
                      {"iterations", cfg.predictor.iterations},
                      {"l2_lambda", cfg.predictor.l2_lambda},
                      {"command", cfg.predictor.command},
                      {"work_dir", cfg.predictor.work_dir}};
  doc["bh_alpha"] = cfg.bh_alpha;
  return doc;
}

LongitudinalDataset load_config_dataset(const RunConfig& cfg) {
  if (cfg.synthetic) return generate_synthetic(*cfg.synthetic);
  if (cfg.dataset.empty())
    raise(errc::bad_config, "config needs either 'dataset' or a 'synthetic' block");
  return load_dataset_csv(cfg.dataset, cfg.schema);
}

FeatureSet resolve_features(const RunConfig& cfg, const LongitudinalDataset& ds) {
  if (!cfg.features.names.empty()) return cfg.features;
  return FeatureSet{ds.feature_names};
}

}  // namespace imputelab
