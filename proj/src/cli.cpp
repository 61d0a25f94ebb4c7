#include "imputelab/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "imputelab/config.hpp"
#include "imputelab/csv.hpp"
#include "imputelab/error.hpp"
#include "imputelab/log.hpp"
#include "imputelab/report.hpp"

namespace imputelab {

namespace {

std::string single_line(std::string msg) {
  std::replace(msg.begin(), msg.end(), '\n', ' ');
  return msg;
}

std::string cell(double v) { return format_double(v); }

std::string cell(const std::optional<double>& v) { return v ? format_double(*v) : "NA"; }

std::string out_path(const RunConfig& cfg, const std::string& name) {
  return (std::filesystem::path(cfg.out_dir) / name).string();
}

void ensure_out_dir(const RunConfig& cfg) {
  std::error_code ec;
  std::filesystem::create_directories(cfg.out_dir, ec);
  if (ec) raise(errc::io_error, "cannot create output directory '" + cfg.out_dir + "'");
}

void print_row(const std::string& a, const std::string& b) {
  std::printf("  %-28s %s\n", a.c_str(), b.c_str());
}

void run_availability(const LongitudinalDataset& ds, const FeatureSet& features,
                      ReportDocument& report) {
  const auto rep = availability(ds, features);
  ReportTable per_participant{"availability_per_participant", {"pid", "availability_pct"}, {}};
  for (const auto& [pid, pct] : rep.per_participant_pct)
    per_participant.rows.push_back({pid, cell(pct)});
  ReportTable per_feature{"availability_per_feature", {"feature", "availability_pct"}, {}};
  for (const auto& [feature, pct] : rep.per_feature_pct)
    per_feature.rows.push_back({feature, cell(pct)});
  report.tables = {std::move(per_participant), std::move(per_feature)};
  report.summary["overall_availability_pct"] = rep.overall_pct;

  std::printf("availability over %zu participants, %zu features\n", ds.participants.size(),
              features.names.size());
  print_row("overall", cell(rep.overall_pct) + " %");
}

void run_ampute(const RunConfig& cfg, const LongitudinalDataset& ds, const FeatureSet& features,
                ReportDocument& report) {
  auto [amputed, plan] = ampute(ds, features, cfg.amputation);
  write_dataset_csv(amputed, out_path(cfg, "amputed.csv"));
  write_plan_csv(plan, out_path(cfg, "plan.csv"));
  if (!plan.skipped.empty()) {
    ReportTable skipped{"amputation_skipped", {"pid", "feature"}, {}};
    for (const auto& [pid, feature] : plan.skipped) skipped.rows.push_back({pid, feature});
    report.tables.push_back(std::move(skipped));
  }
  report.summary["amputation_kind"] = to_string(cfg.amputation.kind);
  report.summary["requested_rate_pct"] = cfg.amputation.r;
  report.summary["realized_rate_pct"] = plan.realized_rate_pct;
  report.summary["n_removed"] = plan.removed.size();

  std::printf("amputation %s at r=%s\n", to_string(cfg.amputation.kind).c_str(),
              cell(cfg.amputation.r).c_str());
  print_row("removed cells", std::to_string(plan.removed.size()));
  print_row("realized rate", cell(plan.realized_rate_pct) + " %");
  print_row("amputed dataset", out_path(cfg, "amputed.csv"));
  print_row("plan", out_path(cfg, "plan.csv"));
}

void run_impute(const RunConfig& cfg, const LongitudinalDataset& ds, const FeatureSet& features,
                ReportDocument& report) {
  if (cfg.strategies.empty()) raise(errc::bad_config, "field 'strategies' in config is empty");
  ReportTable availability_table{"availability_after_imputation",
                                 {"strategy", "availability_pct"},
                                 {}};
  ReportTable failures{"imputation_failures", {"strategy", "detail"}, {}};
  std::printf("imputation of %zu participants\n", ds.participants.size());
  for (const auto& strategy : cfg.strategies) {
    std::vector<std::string> fails;
    const auto imputed = pldi(ds, features, strategy, cfg.jobs, &fails);
    const auto path = out_path(cfg, "imputed_" + strategy.name() + ".csv");
    write_dataset_csv(imputed, path);
    const auto rep = availability(imputed, features);
    availability_table.rows.push_back({strategy.name(), cell(rep.overall_pct)});
    for (const auto& f : fails) failures.rows.push_back({strategy.name(), f});
    print_row(strategy.name(), path + "  (availability " + cell(rep.overall_pct) + " %)");
  }
  report.tables.push_back(std::move(availability_table));
  if (!failures.rows.empty()) report.tables.push_back(std::move(failures));
  report.summary["n_strategies"] = cfg.strategies.size();
}

void run_reconstruct(const RunConfig& cfg, const LongitudinalDataset& ds,
                     const FeatureSet& features, ReportDocument& report) {
  if (cfg.strategies.empty()) raise(errc::bad_config, "field 'strategies' in config is empty");
  const auto result = run_reconstruction(ds, features, cfg.strategies, cfg.amputation, cfg.jobs);

  ReportTable per_participant{"r_rmse_per_participant",
                              {"pid", "strategy", "r_rmse", "availability_pct"},
                              {}};
  ReportTable counts{"reconstruction_counts",
                     {"pid", "strategy", "n_removed", "n_scored", "n_declined"},
                     {}};
  for (const auto& e : result.entries) {
    per_participant.rows.push_back(
        {e.participant_id, e.strategy, cell(e.r_rmse), cell(e.availability_pct)});
    counts.rows.push_back({e.participant_id, e.strategy, std::to_string(e.n_removed),
                           std::to_string(e.n_scored), std::to_string(e.n_declined)});
  }
  ReportTable pooled{"r_rmse_pooled", {"strategy", "r_rmse", "n_scored", "n_declined"}, {}};
  for (const auto& p : result.pooled)
    pooled.rows.push_back(
        {p.strategy, cell(p.r_rmse), std::to_string(p.n_scored), std::to_string(p.n_declined)});
  report.tables = {std::move(per_participant), std::move(counts), std::move(pooled)};
  if (!result.failures.empty()) {
    ReportTable failures{"reconstruction_failures", {"detail"}, {}};
    for (const auto& f : result.failures) failures.rows.push_back({f});
    report.tables.push_back(std::move(failures));
  }
  report.summary["amputation_kind"] = result.amputation_kind_name;
  report.summary["realized_rate_pct"] = result.realized_rate_pct;

  std::printf("reconstruction under %s amputation (realized %s %%)\n",
              result.amputation_kind_name.c_str(), cell(result.realized_rate_pct).c_str());
  for (const auto& p : result.pooled)
    print_row(p.strategy, "pooled r-RMSE " + cell(p.r_rmse) + "  (scored " +
                              std::to_string(p.n_scored) + ", declined " +
                              std::to_string(p.n_declined) + ")");
}

void run_predict(const RunConfig& cfg, const LongitudinalDataset& ds, const FeatureSet& features,
                 ReportDocument& report) {
  if (cfg.strategies.empty()) raise(errc::bad_config, "field 'strategies' in config is empty");
  const auto result = run_prediction(ds, features, cfg.strategies, cfg.predictor, cfg.leakage,
                                     cfg.train_fraction, cfg.aggregation, cfg.jobs);

  ReportTable pooled{"prediction_pooled", {"strategy", "auroc", "balanced_accuracy"}, {}};
  ReportTable accuracy{"accuracy_per_participant", {"pid", "strategy", "accuracy"}, {}};
  for (const auto& s : result.strategies) {
    pooled.rows.push_back({s.strategy, cell(s.pooled_auroc), cell(s.pooled_balanced_accuracy)});
    for (std::size_t k = 0; k < s.participant_ids.size(); ++k)
      accuracy.rows.push_back(
          {s.participant_ids[k], s.strategy, cell(s.per_participant_accuracy[k])});
  }
  report.tables = {std::move(pooled), std::move(accuracy)};
  if (!result.excluded.empty()) {
    ReportTable excluded{"excluded_participants", {"pid", "reason"}, {}};
    for (const auto& [pid, reason] : result.excluded) excluded.rows.push_back({pid, reason});
    report.tables.push_back(std::move(excluded));
  }
  report.summary["leakage_mode"] = to_string(result.mode);
  report.summary["predictor"] = result.predictor_name;
  report.summary["n_included"] =
      result.strategies.empty() ? 0 : result.strategies.front().participant_ids.size();
  report.summary["n_excluded"] = result.excluded.size();

  std::printf("prediction (%s, %s leakage mode)\n", result.predictor_name.c_str(),
              to_string(result.mode).c_str());
  for (const auto& s : result.strategies)
    print_row(s.strategy, "AUROC " + cell(s.pooled_auroc) + "  balanced accuracy " +
                              cell(s.pooled_balanced_accuracy));
  if (!result.excluded.empty())
    print_row("excluded participants", std::to_string(result.excluded.size()));
}

void run_realtime_task(const RunConfig& cfg, const LongitudinalDataset& ds,
                       const FeatureSet& features, ReportDocument& report) {
  if (cfg.strategies.empty()) raise(errc::bad_config, "field 'strategies' in config is empty");
  const auto sched =
      run_realtime(ds, features, cfg.strategies, cfg.predictor, cfg.aggregation, cfg.jobs);

  ReportTable per_week{"realtime_per_week",
                       {"strategy", "week", "auroc", "balanced_accuracy", "n_predictions"},
                       {}};
  for (const auto& m : sched.per_week)
    per_week.rows.push_back({m.strategy, std::to_string(m.week), cell(m.auroc),
                             cell(m.balanced_accuracy), std::to_string(m.n_predictions)});
  report.tables = {std::move(per_week)};
  if (!sched.skipped.empty()) {
    ReportTable skipped{"realtime_skipped", {"pid", "reason"}, {}};
    for (const auto& [pid, reason] : sched.skipped) skipped.rows.push_back({pid, reason});
    report.tables.push_back(std::move(skipped));
  }
  report.summary["start_week"] = sched.start_week;
  report.summary["end_week"] = sched.end_week;

  std::printf("real-time prediction, weeks %d..%d\n", sched.start_week, sched.end_week);
  for (const auto& m : sched.per_week)
    print_row(m.strategy + " week " + std::to_string(m.week),
              "AUROC " + cell(m.auroc) + "  n " + std::to_string(m.n_predictions));
}

void run_mcar_task(const RunConfig& cfg, const LongitudinalDataset& ds, const FeatureSet& features,
                   ReportDocument& report) {
  const auto sweep = run_mcar_sweep(ds, features, cfg.bh_alpha, cfg.jobs);
  ReportTable table{"mcar", {"pid", "d2", "df", "p_value", "reject_bh", "skipped", "reason"}, {}};
  std::size_t n_tested = 0, n_rejected = 0;
  for (std::size_t i = 0; i < sweep.results.size(); ++i) {
    const auto& r = sweep.results[i];
    if (r.skipped) {
      table.rows.push_back({r.participant_id, "NA", "NA", "NA", "NA", "true", r.skip_reason});
    } else {
      ++n_tested;
      if (sweep.reject_bh[i]) ++n_rejected;
      table.rows.push_back({r.participant_id, cell(r.d2), std::to_string(r.df), cell(r.p_value),
                            sweep.reject_bh[i] ? "true" : "false", "false", ""});
    }
  }
  report.tables = {std::move(table)};
  report.summary["alpha"] = sweep.alpha;
  report.summary["n_tested"] = n_tested;
  report.summary["n_rejected"] = n_rejected;

  std::printf("MCAR test over %zu participants (alpha %s, BH-corrected)\n",
              sweep.results.size(), cell(sweep.alpha).c_str());
  print_row("tested", std::to_string(n_tested));
  print_row("rejected", std::to_string(n_rejected));
}

void run_synth(const RunConfig& cfg, ReportDocument& report) {
  if (!cfg.synthetic) raise(errc::bad_config, "task synth needs a 'synthetic' block in config");
  const auto ds = generate_synthetic(*cfg.synthetic);
  const auto path = out_path(cfg, "synthetic.csv");
  write_dataset_csv(ds, path);
  const auto rep = availability(ds, FeatureSet{ds.feature_names});
  report.summary["n_participants"] = cfg.synthetic->n_participants;
  report.summary["n_weeks"] = cfg.synthetic->n_weeks;
  report.summary["n_features"] = cfg.synthetic->n_features;
  report.summary["overall_availability_pct"] = rep.overall_pct;

  std::printf("synthetic dataset: %zu participants x %zu weeks x %zu features\n",
              cfg.synthetic->n_participants, cfg.synthetic->n_weeks, cfg.synthetic->n_features);
  print_row("dataset", path);
  print_row("availability", cell(rep.overall_pct) + " %");
}

int run_task_with_config(const RunConfig& cfg) {
  const auto started = std::chrono::steady_clock::now();
  ensure_out_dir(cfg);

  ReportDocument report;
  report.tool_version = tool_version();
  report.task = to_string(cfg.task);
  report.config_echo = config_to_json(cfg);
  // Worker count and output location cannot influence results, so they live
  // in the volatile run_meta.json and never break report byte-identity.
  report.run_meta["jobs"] = report.config_echo["jobs"];
  report.run_meta["out_dir"] = report.config_echo["out_dir"];
  report.config_echo.erase("jobs");
  report.config_echo.erase("out_dir");

  if (cfg.task == run_task::synth) {
    run_synth(cfg, report);
  } else {
    log_info("loading dataset");
    const auto ds = load_config_dataset(cfg);
    const auto features = resolve_features(cfg, ds);
    log_info("dataset ready: " + std::to_string(ds.participants.size()) + " participants, " +
             std::to_string(features.names.size()) + " features");
    switch (cfg.task) {
      case run_task::availability: run_availability(ds, features, report); break;
      case run_task::ampute: run_ampute(cfg, ds, features, report); break;
      case run_task::impute: run_impute(cfg, ds, features, report); break;
      case run_task::reconstruct: run_reconstruct(cfg, ds, features, report); break;
      case run_task::predict: run_predict(cfg, ds, features, report); break;
      case run_task::realtime: run_realtime_task(cfg, ds, features, report); break;
      case run_task::mcar_test: run_mcar_task(cfg, ds, features, report); break;
      case run_task::synth: break;
    }
  }

  report.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  const auto written = write_report(report, cfg.out_dir);
  log_info("report written: " + written.front());
  print_row("report", written.front());
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"imputelab: benchmark imputation strategies on longitudinal sensing data"};
  app.require_subcommand(1);

  static const std::vector<std::pair<std::string, std::string>> kTasks = {
      {"availability", "report observed-cell percentages"},
      {"ampute", "remove observed cells under a missingness mechanism"},
      {"impute", "fill missing cells per participant and write imputed datasets"},
      {"reconstruct", "ampute, impute, and score reconstruction r-RMSE"},
      {"predict", "weekly label prediction under each imputation strategy"},
      {"realtime", "inductive week-by-week prediction simulation"},
      {"mcar-test", "per-participant MCAR test with BH correction"},
      {"synth", "generate a synthetic dataset"},
  };

  std::string config_path;
  ConfigOverrides ov;
  std::uint64_t seed_flag = 0;
  std::string out_flag, strategy_flag, leakage_flag;
  std::vector<std::string> features_flag;
  double r_flag = 0.0;
  unsigned jobs_flag = 0;

  for (const auto& [name, help] : kTasks) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "JSON config file")->required();
    sub->add_option("--seed", seed_flag, "override the global seed");
    sub->add_option("--out", out_flag, "override the output directory");
    sub->add_option("--features", features_flag, "override the feature selection")
        ->delimiter(',');
    sub->add_option("--strategy", strategy_flag, "replace the strategy list with one kind");
    sub->add_option("--r", r_flag, "override the amputation rate (percent)");
    sub->add_option("--leakage", leakage_flag, "override the leakage mode (full|train_only)");
    sub->add_option("--jobs", jobs_flag, "worker threads (0 = all cores)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << "error: " << single_line(e.what()) << "\n";
    return 2;
  }

  try {
    const auto* sub = app.get_subcommands().front();
    ov.task = sub->get_name();
    if (sub->count("--seed")) ov.seed = seed_flag;
    if (sub->count("--out")) ov.out_dir = out_flag;
    if (sub->count("--features")) ov.features = features_flag;
    if (sub->count("--strategy")) ov.strategy = strategy_flag;
    if (sub->count("--r")) ov.r = r_flag;
    if (sub->count("--leakage")) ov.leakage = leakage_flag;
    if (sub->count("--jobs")) ov.jobs = jobs_flag;
    const auto cfg = load_config(config_path, ov);
    return run_task_with_config(cfg);
  } catch (const error& e) {
    std::cerr << "error: " << single_line(e.what()) << "\n";
    return e.is_config_error() ? 2 : 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << single_line(e.what()) << "\n";
    return 3;
  }
}

}  // namespace imputelab
