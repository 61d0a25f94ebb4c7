#include <sys/wait.h>

#include <cstdlib>
#include <string>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "imputelab/config.hpp"
#include "imputelab/error.hpp"
#include "imputelab/report.hpp"

using namespace imputelab;
using nlohmann::json;

namespace {

template <typename Fn>
void expect_config_error(Fn&& fn, const std::string& fragment) {
  try {
    fn();
    FAIL_CHECK("expected a config error mentioning '" << fragment << "'");
  } catch (const error& e) {
    CHECK(e.code() == errc::bad_config);
    CHECK(std::string(e.what()).find(fragment) != std::string::npos);
  }
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(IMPUTELAB_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  REQUIRE(WIFEXITED(status));
  return WEXITSTATUS(status);
}

}  // namespace

TEST_CASE("an empty config resolves to the documented defaults") {
  const auto cfg = parse_config(json::object());
  CHECK(cfg.dataset.empty());
  CHECK(!cfg.synthetic.has_value());
  CHECK(cfg.features.names.empty());
  CHECK(cfg.strategies.empty());
  CHECK(cfg.amputation.kind == amputation_kind::mcar);
  CHECK(cfg.amputation.r == 10.0);
  CHECK(cfg.amputation.seed == 0);
  CHECK(cfg.task == run_task::reconstruct);
  CHECK(cfg.leakage == leakage_mode::train_only);
  CHECK(cfg.train_fraction == 0.8);
  CHECK(cfg.aggregation == week_aggregation::mean);
  CHECK(cfg.seed == 0);
  CHECK(cfg.out_dir == "out");
  CHECK(cfg.jobs == 0);
  CHECK(cfg.bh_alpha == 0.05);
  CHECK(cfg.predictor.kind == predictor_kind::baseline_logistic);
  CHECK(cfg.schema.id_column == "pid");
  CHECK(cfg.schema.date_column == "date");
}

TEST_CASE("unknown and mistyped fields are rejected by name") {
  expect_config_error([] { parse_config(json{{"bogus", 1}}); }, "bogus");
  expect_config_error([] { parse_config(json{{"seed", "abc"}}); }, "seed");
  expect_config_error([] { parse_config(json{{"train_fraction", "half"}}); }, "train_fraction");
  expect_config_error([] { parse_config(json{{"synthetic", {{"n_vveeks", 3}}}}); }, "n_vveeks");
  expect_config_error([] { parse_config(json{{"amputation", {{"rate", 5}}}}); }, "rate");
  expect_config_error([] { parse_config(json::array()); }, "object");
  expect_config_error([] { parse_config(json{{"strategies", "median"}}); }, "array");
}

TEST_CASE("out-of-range numeric fields are rejected") {
  expect_config_error([] { parse_config(json{{"train_fraction", 0.0}}); }, "train_fraction");
  expect_config_error([] { parse_config(json{{"train_fraction", 1.0}}); }, "train_fraction");
  expect_config_error([] { parse_config(json{{"amputation", {{"r", 0.0}}}}); }, "r");
  expect_config_error([] { parse_config(json{{"amputation", {{"r", 100.0}}}}); }, "r");
  expect_config_error([] { parse_config(json{{"bh_alpha", 1.0}}); }, "bh_alpha");
  expect_config_error([] { parse_config(json{{"synthetic", {{"missing_rate", 1.0}}}}); },
                      "missing_rate");
}

TEST_CASE("strategies parse from strings or objects with per-kind keys") {
  const auto cfg = parse_config(json{{"seed", 42}, {"strategies", json::array({"median", "mice"})}});
  REQUIRE(cfg.strategies.size() == 2);
  CHECK(cfg.strategies[0].kind == strategy_kind::median);
  CHECK(cfg.strategies[1].kind == strategy_kind::mice);
  CHECK(cfg.strategies[0].seed == 42);
  CHECK(cfg.strategies[1].seed == 42);

  const auto rich = parse_config(json{
      {"strategies",
       json::array(
           {json{{"kind", "simple_knn"}, {"k", 7}, {"seed", 9}, {"name", "knn7"}},
            json{{"kind", "windowed_median"}, {"window", 14}},
            json{{"kind", "bounded_knn"}, {"l", 2}, {"u", 4}, {"clip_lo_pct", 10.0}},
            json{{"kind", "soft_impute"}, {"max_iters", 50}},
            json{{"kind", "autoencoder"}, {"activation", "sigmoid"}, {"initial", "simple_knn"}}})}});
  REQUIRE(rich.strategies.size() == 5);
  CHECK(rich.strategies[0].knn_k == 7);
  CHECK(rich.strategies[0].seed == 9);
  CHECK(rich.strategies[0].name() == "knn7");
  CHECK(rich.strategies[1].window == 14);
  CHECK(rich.strategies[2].bounded.l == 2);
  CHECK(rich.strategies[2].bounded.u == 4);
  CHECK(rich.strategies[2].bounded.clip_lo_pct == 10.0);
  CHECK(!rich.strategies[3].soft.lambda.has_value());
  CHECK(rich.strategies[3].soft.max_iters == 50);
  CHECK(rich.strategies[4].ae.activation == ae_activation::sigmoid);
  CHECK(rich.strategies[4].ae.initial_imputer == ae_initial::simple_knn);
  CHECK(rich.strategies[4].name() == "autoencoder_knn");

  expect_config_error(
      [] { parse_config(json{{"strategies", json::array({json{{"k", 3}}})}}); }, "kind");
  expect_config_error(
      [] {
        parse_config(json{{"strategies", json::array({json{{"kind", "median"}, {"window", 3}}})}});
      },
      "window");
  expect_config_error(
      [] {
        parse_config(
            json{{"strategies", json::array({json{{"kind", "autoencoder"}, {"activation", "tanh"}}})}});
      },
      "activation");
  expect_config_error([] { parse_config(json{{"strategies", json::array({"warp"})}}); }, "warp");
}

TEST_CASE("command-line overrides replace the config values") {
  const json doc{{"seed", 1},
                 {"strategies", json::array({"median", "mice"})},
                 {"out_dir", "somewhere"},
                 {"task", "reconstruct"}};
  ConfigOverrides ov;
  ov.seed = 77;
  ov.out_dir = "elsewhere";
  ov.features = std::vector<std::string>{"fa", "fb"};
  ov.strategy = "soft_impute";
  ov.r = 33.0;
  ov.leakage = "full";
  ov.jobs = 4;
  ov.task = "predict";
  const auto cfg = parse_config(doc, ov);
  CHECK(cfg.seed == 77);
  CHECK(cfg.out_dir == "elsewhere");
  CHECK(cfg.features.names == std::vector<std::string>{"fa", "fb"});
  REQUIRE(cfg.strategies.size() == 1);
  CHECK(cfg.strategies[0].kind == strategy_kind::soft_impute);
  CHECK(cfg.strategies[0].seed == 77);
  CHECK(cfg.amputation.r == 33.0);
  CHECK(cfg.amputation.seed == 77);
  CHECK(cfg.leakage == leakage_mode::full);
  CHECK(cfg.jobs == 4);
  CHECK(cfg.task == run_task::predict);
}

TEST_CASE("a fully specified config round-trips through its JSON form") {
  json doc;
  doc["synthetic"] = {{"n_participants", 5}, {"n_weeks", 6}, {"n_features", 4},
                      {"missing_rate", 0.25}, {"mechanism", "mnar_tails"}, {"seed", 3},
                      {"phi", 0.5}, {"label_noise", 2.0}};
  doc["features"] = {"f0", "f2"};
  doc["strategies"] = json::array(
      {"median",
       json{{"kind", "windowed_median"}, {"window", 7}},
       json{{"kind", "globem_c_proxy"}, {"row_thresh", 0.4}, {"col_thresh", 0.6}},
       json{{"kind", "simple_knn"}, {"k", 3}},
       json{{"kind", "bounded_knn"}, {"l", 2}, {"u", 6}, {"clip_lo_pct", 1.0}, {"clip_hi_pct", 99.0}},
       json{{"kind", "mice"}, {"iterations", 4}, {"ridge_lambda", 0.01}},
       json{{"kind", "soft_impute"}, {"lambda", 0.2}, {"max_iters", 77}, {"tol", 1e-5}},
       json{{"kind", "autoencoder"}, {"hidden_dim", 6}, {"epochs", 40}, {"name", "ae"}}});
  doc["amputation"] = {{"kind", "mnar_central"}, {"r", 25.0}, {"seed", 8}};
  doc["task"] = "predict";
  doc["leakage_mode"] = "full";
  doc["train_fraction"] = 0.7;
  doc["aggregation"] = "median";
  doc["seed"] = 99;
  doc["out_dir"] = "results";
  doc["jobs"] = 3;
  doc["schema"] = {{"id_column", "person"}, {"date_column", "day"}, {"week_column", ""},
                   {"label_column", "dep"}, {"missing_tokens", json::array({"", "?"})}};
  doc["predictor"] = {{"kind", "external"}, {"command", "./predict.sh"}, {"work_dir", "wk"}};
  doc["bh_alpha"] = 0.01;

  const auto cfg = parse_config(doc);
  const auto echoed = config_to_json(cfg);
  const auto cfg2 = parse_config(echoed);
  CHECK(config_to_json(cfg2) == echoed);
  CHECK(cfg2.strategies.size() == cfg.strategies.size());
  CHECK(cfg2.synthetic->mechanism == amputation_kind::mnar_tails);
  CHECK(cfg2.predictor.kind == predictor_kind::external);
  CHECK(cfg2.schema.week_column.empty());
}

TEST_CASE("configs pick one data source and complete predictor commands") {
  expect_config_error(
      [] { parse_config(json{{"dataset", "x.csv"}, {"synthetic", json::object()}}); }, "one data");
  expect_config_error([] { parse_config(json{{"predictor", {{"kind", "external"}}}}); },
                      "command");
  expect_config_error(
      [] { parse_config(json{{"schema", {{"id_column", ""}, {"date_column", "d"}}}}); },
      "id_column");
}

TEST_CASE("config files load with clear errors for bad paths and bad JSON") {
  const testutil::TempDir tmp;
  testutil::write_file(tmp.file("ok.json"), R"({"seed": 5})");
  CHECK(load_config(tmp.file("ok.json")).seed == 5);

  testutil::write_file(tmp.file("broken.json"), "{nope");
  expect_config_error([&] { load_config(tmp.file("broken.json")); }, "JSON");

  try {
    load_config(tmp.file("absent.json"));
    FAIL_CHECK("expected an io error");
  } catch (const error& e) {
    CHECK(e.code() == errc::io_error);
    CHECK(!e.is_config_error());
  }
}

namespace {

ReportDocument sample_report(double runtime) {
  ReportDocument report;
  report.tool_version = tool_version();
  report.task = "reconstruct";
  report.config_echo = json{{"seed", 4}, {"task", "reconstruct"}};
  report.summary = json{{"realized_rate_pct", 9.5}};
  report.tables.push_back(
      ReportTable{"scores", {"pid", "value"}, {{"p1", "0.5"}, {"p2", "NA"}}});
  report.tables.push_back(ReportTable{"notes", {"detail"}, {{"fine"}}});
  report.runtime_seconds = runtime;
  report.run_meta = json{{"jobs", 2}};
  return report;
}

}  // namespace

TEST_CASE("reports write deterministic bytes with runtime kept out of report.json") {
  const testutil::TempDir tmp;
  const auto a = write_report(sample_report(1.0), tmp.file("a"));
  const auto b = write_report(sample_report(2.0), tmp.file("b"));
  REQUIRE(a.size() == 4);
  REQUIRE(b.size() == 4);
  CHECK(testutil::read_file(tmp.file("a/report.json")) ==
        testutil::read_file(tmp.file("b/report.json")));
  CHECK(testutil::read_file(tmp.file("a/scores.csv")) ==
        testutil::read_file(tmp.file("b/scores.csv")));
  CHECK(testutil::read_file(tmp.file("a/scores.csv")) == "pid,value\np1,0.5\np2,NA\n");
  CHECK(testutil::read_file(tmp.file("a/notes.csv")) == "detail\nfine\n");

  const auto meta = json::parse(testutil::read_file(tmp.file("a/run_meta.json")));
  CHECK(meta.at("volatile") == true);
  CHECK(meta.at("jobs") == 2);
  CHECK(meta.at("runtime_seconds") == 1.0);
  const auto doc = json::parse(testutil::read_file(tmp.file("a/report.json")));
  CHECK(!doc.contains("runtime_seconds"));
  CHECK(doc.at("tables").at("scores").at("rows").size() == 2);
}

TEST_CASE("reports without tables write only the two JSON files") {
  const testutil::TempDir tmp;
  ReportDocument report;
  report.tool_version = tool_version();
  report.task = "availability";
  const auto written = write_report(report, tmp.file("empty"));
  CHECK(written.size() == 2);
  const auto doc = json::parse(testutil::read_file(tmp.file("empty/report.json")));
  CHECK(doc.at("tables") == json::object());
}

TEST_CASE("a ragged table row is rejected") {
  const testutil::TempDir tmp;
  ReportDocument report;
  report.tables.push_back(ReportTable{"bad", {"a", "b"}, {{"only one"}}});
  try {
    write_report(report, tmp.file("r"));
    FAIL_CHECK("expected a ragged-row error");
  } catch (const error& e) {
    CHECK(e.code() == errc::invalid_input);
  }
}

TEST_CASE("the tool version names the tool") {
  CHECK(tool_version().rfind("imputelab ", 0) == 0);
}

TEST_CASE("cli: a synth run succeeds and separates volatile metadata") {
  const testutil::TempDir tmp;
  testutil::write_file(
      tmp.file("cfg.json"),
      R"({"synthetic": {"n_participants": 2, "n_weeks": 2, "n_features": 2}, "seed": 6})");
  const int rc =
      run_cli("synth --config " + tmp.file("cfg.json") + " --out " + tmp.file("out"));
  CHECK(rc == 0);

  const auto doc = json::parse(testutil::read_file(tmp.file("out/report.json")));
  CHECK(doc.at("task") == "synth");
  CHECK(!doc.at("config").contains("jobs"));
  CHECK(!doc.at("config").contains("out_dir"));
  const auto meta = json::parse(testutil::read_file(tmp.file("out/run_meta.json")));
  CHECK(meta.contains("jobs"));
  CHECK(meta.at("out_dir") == tmp.file("out"));
  CHECK(meta.contains("runtime_seconds"));
  CHECK(testutil::read_file(tmp.file("out/synthetic.csv")).rfind("pid,date,week,label,", 0) == 0);
}

TEST_CASE("cli: config problems exit 2, runtime problems exit 3") {
  const testutil::TempDir tmp;
  testutil::write_file(tmp.file("bad.json"), R"({"bogus": 1})");
  CHECK(run_cli("availability --config " + tmp.file("bad.json")) == 2);

  testutil::write_file(tmp.file("gone.json"), R"({"dataset": "no_such_file.csv"})");
  CHECK(run_cli("availability --config " + tmp.file("gone.json") + " --out " + tmp.file("o3")) ==
        3);

  CHECK(run_cli("availability") == 2);
  CHECK(run_cli("--help") == 0);
  CHECK(run_cli("availability --config " + tmp.file("bad.json") + " --frobnicate") == 2);
}

TEST_CASE("cli: repeated reconstruct runs write byte-identical reports") {
  const testutil::TempDir tmp;
  testutil::write_file(tmp.file("cfg.json"), R"({
    "synthetic": {"n_participants": 3, "n_weeks": 3, "n_features": 2, "missing_rate": 0.2},
    "strategies": ["median", "simple_knn"],
    "amputation": {"kind": "MCAR", "r": 15.0},
    "seed": 12
  })");
  const std::string base = "reconstruct --config " + tmp.file("cfg.json");
  REQUIRE(run_cli(base + " --out " + tmp.file("r1") + " --jobs 1") == 0);
  REQUIRE(run_cli(base + " --out " + tmp.file("r2") + " --jobs 4") == 0);
  for (const std::string name :
       {"report.json", "r_rmse_per_participant.csv", "reconstruction_counts.csv",
        "r_rmse_pooled.csv"}) {
    CHECK(testutil::read_file(tmp.file("r1/" + name)) ==
          testutil::read_file(tmp.file("r2/" + name)));
  }
  CHECK(testutil::read_file(tmp.file("r1/report.json")).find("\"r_rmse_pooled\"") !=
        std::string::npos);
}
