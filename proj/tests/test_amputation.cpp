#include <algorithm>
#include <set>

#include "doctest.h"
#include "helpers.hpp"
#include "imputelab/amputation.hpp"
#include "imputelab/error.hpp"
#include "imputelab/synthetic.hpp"

using namespace imputelab;
using testutil::NA;

namespace {

/// One participant, one feature, values 1..n on consecutive days.
LongitudinalDataset ramp_dataset(int n) {
  std::vector<std::vector<double>> days;
  for (int t = 1; t <= n; ++t) days.push_back({static_cast<double>(t)});
  return testutil::make_dataset({"f"}, {{"p1", days}});
}

std::set<double> removed_values(const AmputationPlan& plan) {
  std::set<double> vals;
  for (const auto& cell : plan.removed) vals.insert(cell.original_value);
  return vals;
}

}  // namespace

TEST_CASE("mcar removes exactly round(r% of observed) cells") {
  auto ds = ramp_dataset(100);
  AmputationConfig cfg;
  cfg.kind = amputation_kind::mcar;
  cfg.r = 10.0;
  cfg.seed = 7;
  auto [amputed, plan] = ampute(ds, FeatureSet{{"f"}}, cfg);
  CHECK(plan.removed.size() == 10);
  CHECK(plan.realized_rate_pct == doctest::Approx(10.0));
  std::size_t missing = 0;
  for (const auto& row : amputed.participants[0].rows)
    if (!row.values[0]) ++missing;
  CHECK(missing == 10);
  for (const auto& row : ds.participants[0].rows) CHECK(row.values[0].has_value());
}

TEST_CASE("rounding keeps small groups untouched and rounds half away from zero") {
  AmputationConfig cfg;
  cfg.r = 10.0;
  cfg.seed = 1;
  auto [a4, p4] = ampute(ramp_dataset(4), FeatureSet{{"f"}}, cfg);
  CHECK(p4.removed.empty());
  auto [a5, p5] = ampute(ramp_dataset(5), FeatureSet{{"f"}}, cfg);
  CHECK(p5.removed.size() == 1);
}

TEST_CASE("mnar central removes the middle rank band") {
  auto ds = ramp_dataset(100);
  AmputationConfig cfg;
  cfg.kind = amputation_kind::mnar_central;
  cfg.r = 10.0;
  auto [amputed, plan] = ampute(ds, FeatureSet{{"f"}}, cfg);
  std::set<double> expected;
  for (int v = 46; v <= 55; ++v) expected.insert(v);
  CHECK(removed_values(plan) == expected);
}

TEST_CASE("mnar tails removes the lowest and highest ranks") {
  auto ds = ramp_dataset(100);
  AmputationConfig cfg;
  cfg.kind = amputation_kind::mnar_tails;
  cfg.r = 10.0;
  auto [amputed, plan] = ampute(ds, FeatureSet{{"f"}}, cfg);
  std::set<double> expected{1, 2, 3, 4, 5, 96, 97, 98, 99, 100};
  CHECK(removed_values(plan) == expected);
}

TEST_CASE("mnar rank bands bracket retained values") {
  SyntheticConfig synth;
  synth.n_participants = 4;
  synth.n_weeks = 6;
  synth.n_features = 3;
  synth.seed = 11;
  const auto ds = generate_synthetic(synth);
  const FeatureSet fs{ds.feature_names};

  AmputationConfig central;
  central.kind = amputation_kind::mnar_central;
  central.r = 20.0;
  central.seed = 3;
  auto [ac, pc] = ampute(ds, fs, central);
  for (std::size_t pi = 0; pi < ds.participants.size(); ++pi) {
    for (std::size_t j = 0; j < ds.feature_names.size(); ++j) {
      std::vector<double> removed, retained;
      for (std::size_t r = 0; r < ds.participants[pi].rows.size(); ++r) {
        const auto& before = ds.participants[pi].rows[r].values[j];
        const auto& after = ac.participants[pi].rows[r].values[j];
        if (!before) continue;
        (after ? retained : removed).push_back(*before);
      }
      if (removed.empty() || retained.empty()) continue;
      const double lo = *std::min_element(retained.begin(), retained.end());
      const double hi = *std::max_element(retained.begin(), retained.end());
      for (double v : removed) {
        CHECK(v >= lo);
        CHECK(v <= hi);
      }
    }
  }

  AmputationConfig tails = central;
  tails.kind = amputation_kind::mnar_tails;
  auto [at, pt] = ampute(ds, fs, tails);
  for (std::size_t pi = 0; pi < ds.participants.size(); ++pi) {
    for (std::size_t j = 0; j < ds.feature_names.size(); ++j) {
      std::vector<double> removed, retained;
      for (std::size_t r = 0; r < ds.participants[pi].rows.size(); ++r) {
        const auto& before = ds.participants[pi].rows[r].values[j];
        const auto& after = at.participants[pi].rows[r].values[j];
        if (!before) continue;
        (after ? retained : removed).push_back(*before);
      }
      if (removed.empty() || retained.empty()) continue;
      const double removed_lo = *std::min_element(removed.begin(), removed.end());
      const double removed_hi = *std::max_element(removed.begin(), removed.end());
      for (double v : retained) {
        CHECK(v >= removed_lo);
        CHECK(v <= removed_hi);
      }
    }
  }
}

TEST_CASE("applying plan originals restores the source dataset") {
  SyntheticConfig synth;
  synth.n_participants = 5;
  synth.n_weeks = 4;
  synth.n_features = 4;
  synth.missing_rate = 0.2;
  synth.seed = 21;
  const auto ds = generate_synthetic(synth);
  const FeatureSet fs{ds.feature_names};
  for (auto kind :
       {amputation_kind::mcar, amputation_kind::mnar_central, amputation_kind::mnar_tails}) {
    AmputationConfig cfg;
    cfg.kind = kind;
    cfg.r = 25.0;
    cfg.seed = 5;
    auto [amputed, plan] = ampute(ds, fs, cfg);
    apply_plan_originals(amputed, plan);
    for (std::size_t pi = 0; pi < ds.participants.size(); ++pi)
      for (std::size_t r = 0; r < ds.participants[pi].rows.size(); ++r)
        CHECK(amputed.participants[pi].rows[r].values ==
              ds.participants[pi].rows[r].values);
  }
}

TEST_CASE("amputation never touches cells that were already missing") {
  auto ds = testutil::make_dataset(
      {"f"}, {{"p1", {{1.0}, {NA}, {3.0}, {NA}, {5.0}, {6.0}, {7.0}, {8.0}, {9.0}, {10.0}}}});
  AmputationConfig cfg;
  cfg.r = 50.0;
  cfg.seed = 2;
  auto [amputed, plan] = ampute(ds, FeatureSet{{"f"}}, cfg);
  CHECK(plan.removed.size() == 4);
  const std::set<double> observed{1, 3, 5, 6, 7, 8, 9, 10};
  for (const auto& cell : plan.removed) CHECK(observed.count(cell.original_value) == 1);
  CHECK(!amputed.participants[0].rows[1].values[0].has_value());
  CHECK(!amputed.participants[0].rows[3].values[0].has_value());
  std::size_t missing = 0;
  for (const auto& row : amputed.participants[0].rows)
    if (!row.values[0]) ++missing;
  CHECK(missing == 6);
}

TEST_CASE("removal is independent of participant iteration order") {
  SyntheticConfig synth;
  synth.n_participants = 6;
  synth.n_weeks = 3;
  synth.n_features = 2;
  synth.seed = 31;
  auto ds = generate_synthetic(synth);
  const FeatureSet fs{ds.feature_names};
  AmputationConfig cfg;
  cfg.r = 30.0;
  cfg.seed = 9;
  auto [a1, p1] = ampute(ds, fs, cfg);

  auto shuffled = ds;
  std::reverse(shuffled.participants.begin(), shuffled.participants.end());
  auto [a2, p2] = ampute(shuffled, fs, cfg);

  auto key = [](const RemovedCell& c) {
    return std::make_tuple(c.participant_id, c.day.days, c.feature, c.original_value);
  };
  std::set<std::tuple<std::string, std::int64_t, std::string, double>> s1, s2;
  for (const auto& c : p1.removed) s1.insert(key(c));
  for (const auto& c : p2.removed) s2.insert(key(c));
  CHECK(s1 == s2);
}

TEST_CASE("same seed reproduces the identical plan") {
  auto ds = ramp_dataset(50);
  AmputationConfig cfg;
  cfg.r = 20.0;
  cfg.seed = 1234;
  auto [a1, p1] = ampute(ds, FeatureSet{{"f"}}, cfg);
  auto [a2, p2] = ampute(ds, FeatureSet{{"f"}}, cfg);
  REQUIRE(p1.removed.size() == p2.removed.size());
  for (std::size_t i = 0; i < p1.removed.size(); ++i) {
    CHECK(p1.removed[i].day == p2.removed[i].day);
    CHECK(p1.removed[i].original_value == p2.removed[i].original_value);
  }
  cfg.seed = 1235;
  auto [a3, p3] = ampute(ds, FeatureSet{{"f"}}, cfg);
  bool differs = p3.removed.size() != p1.removed.size();
  for (std::size_t i = 0; !differs && i < p1.removed.size(); ++i)
    differs = !(p1.removed[i].day == p3.removed[i].day);
  CHECK(differs);
}

TEST_CASE("realized rate tracks the requested rate on large groups") {
  SyntheticConfig synth;
  synth.n_participants = 8;
  synth.n_weeks = 5;
  synth.n_features = 3;
  synth.seed = 77;
  const auto ds = generate_synthetic(synth);
  const FeatureSet fs{ds.feature_names};
  AmputationConfig cfg;
  cfg.r = 10.0;
  cfg.seed = 8;
  auto [amputed, plan] = ampute(ds, fs, cfg);
  CHECK(realized_rate(plan, ds, fs) == doctest::Approx(plan.realized_rate_pct));
  CHECK(plan.realized_rate_pct >= 8.0);
  CHECK(plan.realized_rate_pct <= 12.0);
}

TEST_CASE("features with zero observed values are skipped and logged") {
  auto ds = testutil::make_dataset(
      {"f", "g"},
      {{"p1", {{1.0, NA}, {2.0, NA}, {3.0, NA}, {4.0, NA}, {5.0, NA},
               {6.0, NA}, {7.0, NA}, {8.0, NA}, {9.0, NA}, {10.0, NA}}}});
  AmputationConfig cfg;
  cfg.r = 10.0;
  auto [amputed, plan] = ampute(ds, FeatureSet{{"f", "g"}}, cfg);
  REQUIRE(plan.skipped.size() == 1);
  CHECK(plan.skipped[0].first == "p1");
  CHECK(plan.skipped[0].second == "g");
  CHECK(plan.removed.size() == 1);
}

TEST_CASE("amputation rejects rates outside (0,100)") {
  auto ds = ramp_dataset(10);
  AmputationConfig cfg;
  cfg.r = 0.0;
  CHECK_THROWS_AS(ampute(ds, FeatureSet{{"f"}}, cfg), error);
  cfg.r = 100.0;
  CHECK_THROWS_AS(ampute(ds, FeatureSet{{"f"}}, cfg), error);
}

TEST_CASE("plan csv lists removed cells") {
  auto ds = ramp_dataset(20);
  AmputationConfig cfg;
  cfg.r = 10.0;
  cfg.seed = 3;
  auto [amputed, plan] = ampute(ds, FeatureSet{{"f"}}, cfg);
  testutil::TempDir dir;
  const auto path = dir.file("plan.csv");
  write_plan_csv(plan, path);
  const auto text = testutil::read_file(path);
  CHECK(text.rfind("pid,date,feature,original_value\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') ==
        static_cast<std::ptrdiff_t>(plan.removed.size()) + 1);
}
