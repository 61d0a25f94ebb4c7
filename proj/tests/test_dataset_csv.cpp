#include <algorithm>

#include "doctest.h"
#include "helpers.hpp"
#include "imputelab/csv.hpp"
#include "imputelab/dataset.hpp"
#include "imputelab/error.hpp"

using namespace imputelab;
using testutil::NA;

namespace {

LongitudinalDataset two_feature_dataset() {
  return testutil::make_dataset({"a", "b"},
                                {{"p1", {{1.0, 2.0}, {NA, 4.0}}}, {"p2", {{5.0, NA}}}});
}

}  // namespace

TEST_CASE("availability counts observed cells") {
  auto ds = testutil::make_dataset(
      {"f0", "f1", "f2", "f3", "f4"},
      {{"p1",
        {{1, 2, 3, 4, 5}, {1, NA, 3, NA, 5}, {NA, 2, NA, 4, 5}, {1, NA, 3, 4, NA}}}});
  FeatureSet fs{ds.feature_names};
  const auto rep = availability(ds, fs);
  CHECK(rep.overall_pct == doctest::Approx(70.0).epsilon(1e-12));
  REQUIRE(rep.per_participant_pct.size() == 1);
  CHECK(rep.per_participant_pct[0].second == doctest::Approx(70.0));
  REQUIRE(rep.per_feature_pct.size() == 5);
  CHECK(rep.per_feature_pct[0].second == doctest::Approx(75.0));
}

TEST_CASE("availability extremes") {
  auto full = testutil::make_dataset({"a"}, {{"p1", {{1.0}, {2.0}}}});
  CHECK(availability(full, FeatureSet{{"a"}}).overall_pct == 100.0);
  auto empty = testutil::make_dataset({"a"}, {{"p1", {{NA}, {NA}}}});
  CHECK(availability(empty, FeatureSet{{"a"}}).overall_pct == 0.0);
}

TEST_CASE("availability is invariant under participant permutation") {
  auto ds = testutil::make_dataset(
      {"a", "b"}, {{"p1", {{1.0, NA}, {2.0, 3.0}}}, {"p2", {{NA, NA}, {4.0, 5.0}}}});
  FeatureSet fs{ds.feature_names};
  const double before = availability(ds, fs).overall_pct;
  std::swap(ds.participants[0], ds.participants[1]);
  CHECK(availability(ds, fs).overall_pct == before);
}

TEST_CASE("availability rejects unknown features") {
  auto ds = two_feature_dataset();
  CHECK_THROWS_AS(availability(ds, FeatureSet{{"nope"}}), error);
  try {
    availability(ds, FeatureSet{{"nope"}});
  } catch (const error& e) {
    CHECK(e.code() == errc::feature_not_found);
  }
}

TEST_CASE("select_features keeps rows and order") {
  auto ds = testutil::make_dataset({"a", "b", "c"}, {{"p1", {{1, 2, 3}, {4, NA, 6}}}});
  const auto all = select_features(ds, FeatureSet{ds.feature_names});
  CHECK(all.feature_names == ds.feature_names);
  CHECK(all.participants[0].rows[1].values[1] == Cell{});

  const auto one = select_features(ds, FeatureSet{{"b"}});
  CHECK(one.feature_names == std::vector<std::string>{"b"});
  for (const auto& row : one.participants[0].rows) CHECK(row.values.size() == 1);
  CHECK(*one.participants[0].rows[0].values[0] == 2.0);

  CHECK_THROWS_AS(select_features(ds, FeatureSet{{"z"}}), error);
  CHECK(ds.feature_names.size() == 3);
}

TEST_CASE("chronological_split cuts by distinct weeks") {
  std::vector<std::vector<double>> days(70, {1.0});
  auto s = testutil::make_series("p1", days);
  auto [train, test] = chronological_split(s, 0.8);
  CHECK(train.rows.size() == 56);
  CHECK(test.rows.size() == 14);
  CHECK(train.rows.back().week == 8);
  CHECK(test.rows.front().week == 9);
  CHECK(train.rows.back().day < test.rows.front().day);

  std::vector<std::vector<double>> five_weeks(35, {1.0});
  auto s5 = testutil::make_series("p1", five_weeks);
  auto [t5, v5] = chronological_split(s5, 0.8);
  CHECK(t5.rows.back().week == 4);
  CHECK(v5.rows.front().week == 5);
}

TEST_CASE("chronological_split union preserves every row once") {
  std::vector<std::vector<double>> days;
  for (int t = 0; t < 21; ++t) days.push_back({static_cast<double>(t)});
  auto s = testutil::make_series("p1", days);
  auto [train, test] = chronological_split(s, 0.5);
  CHECK(train.rows.size() + test.rows.size() == s.rows.size());
  std::size_t k = 0;
  for (const auto& row : train.rows) CHECK(row.day == s.rows[k++].day);
  for (const auto& row : test.rows) CHECK(row.day == s.rows[k++].day);
}

TEST_CASE("chronological_split error contracts") {
  auto one_week = testutil::make_series("p1", {{1.0}, {2.0}});
  CHECK_THROWS_AS(chronological_split(one_week, 0.8), error);
  try {
    chronological_split(one_week, 0.8);
  } catch (const error& e) {
    CHECK(e.code() == errc::split_infeasible);
  }
  auto ok = testutil::make_series("p1", std::vector<std::vector<double>>(14, {1.0}));
  CHECK_THROWS_AS(chronological_split(ok, 0.0), error);
  CHECK_THROWS_AS(chronological_split(ok, 1.0), error);
}

TEST_CASE("derive_weeks uses seven-day blocks from the first row") {
  auto ds = testutil::make_dataset({"a"}, {{"p1", std::vector<std::vector<double>>(15, {1.0})}});
  for (auto& row : ds.participants[0].rows) row.week = 99;
  derive_weeks(ds);
  CHECK(ds.participants[0].rows[0].week == 1);
  CHECK(ds.participants[0].rows[6].week == 1);
  CHECK(ds.participants[0].rows[7].week == 2);
  CHECK(ds.participants[0].rows[14].week == 3);
}

TEST_CASE("to_matrix and from_matrix round-trip missing cells") {
  auto s = testutil::make_series("p1", {{1.0, NA}, {NA, 4.0}});
  const auto m = to_matrix(s, {0, 1});
  CHECK(m(0, 0) == 1.0);
  CHECK(std::isnan(m(0, 1)));
  Eigen::MatrixXd filled = m;
  filled(0, 1) = 9.0;
  from_matrix(s, {0, 1}, filled);
  CHECK(*s.rows[0].values[1] == 9.0);
  CHECK(!s.rows[1].values[0].has_value());
}

TEST_CASE("csv loader maps missing tokens and parses values") {
  testutil::TempDir dir;
  const auto path = dir.file("data.csv");
  testutil::write_file(path,
                       "pid,date,a,b\n"
                       "p1,2021-04-05,,3.5\n"
                       "p1,2021-04-06,NA,1.0\n"
                       "p1,2021-04-07,NaN,nan\n");
  const auto ds = load_dataset_csv(path);
  REQUIRE(ds.participants.size() == 1);
  const auto& rows = ds.participants[0].rows;
  REQUIRE(rows.size() == 3);
  CHECK(!rows[0].values[0].has_value());
  CHECK(*rows[0].values[1] == 3.5);
  CHECK(!rows[1].values[0].has_value());
  CHECK(!rows[2].values[0].has_value());
  CHECK(!rows[2].values[1].has_value());
  CHECK(rows[0].week == 1);
}

TEST_CASE("csv loader reports malformed rows with 1-based line numbers") {
  testutil::TempDir dir;
  const auto path = dir.file("bad.csv");
  testutil::write_file(path, "pid,date,a\np1,2021-04-05,abc\n");
  try {
    load_dataset_csv(path);
    FAIL("expected malformed_row");
  } catch (const error& e) {
    CHECK(e.code() == errc::malformed_row);
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    CHECK(std::string(e.what()).find(path) != std::string::npos);
  }
}

TEST_CASE("csv loader rejects duplicate participant-day rows") {
  testutil::TempDir dir;
  const auto path = dir.file("dup.csv");
  testutil::write_file(path,
                       "pid,date,a\n"
                       "p1,2021-04-05,1\n"
                       "p1,2021-04-05,2\n");
  try {
    load_dataset_csv(path);
    FAIL("expected duplicate_row");
  } catch (const error& e) {
    CHECK(e.code() == errc::duplicate_row);
  }
}

TEST_CASE("csv loader requires id and date columns") {
  testutil::TempDir dir;
  const auto path = dir.file("noid.csv");
  testutil::write_file(path, "date,a\n2021-04-05,1\n");
  try {
    load_dataset_csv(path);
    FAIL("expected missing_column");
  } catch (const error& e) {
    CHECK(e.code() == errc::missing_column);
    CHECK(std::string(e.what()).find("pid") != std::string::npos);
  }
}

TEST_CASE("csv loader accepts CRLF and sorts rows by date within participant") {
  testutil::TempDir dir;
  const auto path = dir.file("crlf.csv");
  testutil::write_file(path,
                       "pid,date,a\r\n"
                       "p1,2021-04-07,3\r\n"
                       "p1,2021-04-05,1\r\n");
  const auto ds = load_dataset_csv(path);
  const auto& rows = ds.participants[0].rows;
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].day < rows[1].day);
  CHECK(*rows[0].values[0] == 1.0);
}

TEST_CASE("csv loader reads week and label columns when present") {
  testutil::TempDir dir;
  const auto path = dir.file("wk.csv");
  testutil::write_file(path,
                       "pid,date,week,label,a\n"
                       "p1,2021-04-05,2,,1.5\n"
                       "p1,2021-04-06,2,1,2.5\n");
  const auto ds = load_dataset_csv(path);
  CHECK(ds.feature_names == std::vector<std::string>{"a"});
  const auto& rows = ds.participants[0].rows;
  CHECK(rows[0].week == 2);
  CHECK(!rows[0].label.has_value());
  CHECK(*rows[1].label == 1);
}

TEST_CASE("writer output round-trips through the loader") {
  auto ds = testutil::make_dataset(
      {"a", "b"},
      {{"p1", {{1.25, NA}, {NA, -3.5}, {2.0, 4.0}}}, {"p2", {{0.1, 0.2}}}});
  ds.participants[0].rows[2].label = 1;
  ds.participants[1].rows[0].label = 0;

  testutil::TempDir dir;
  const auto path = dir.file("round.csv");
  write_dataset_csv(ds, path);
  const auto text = testutil::read_file(path);
  CHECK(text.find("\r\n") == std::string::npos);

  const auto back = load_dataset_csv(path);
  REQUIRE(back.participants.size() == ds.participants.size());
  CHECK(back.feature_names == ds.feature_names);
  for (std::size_t i = 0; i < ds.participants.size(); ++i) {
    const auto& orig = ds.participants[i];
    const auto& got = back.participants[i];
    CHECK(got.participant_id == orig.participant_id);
    REQUIRE(got.rows.size() == orig.rows.size());
    for (std::size_t r = 0; r < orig.rows.size(); ++r) {
      CHECK(got.rows[r].day == orig.rows[r].day);
      CHECK(got.rows[r].week == orig.rows[r].week);
      CHECK(got.rows[r].label == orig.rows[r].label);
      CHECK(got.rows[r].values == orig.rows[r].values);
    }
  }
}

TEST_CASE("schema can demote a week-named column to a feature") {
  testutil::TempDir dir;
  const auto path = dir.file("feat.csv");
  testutil::write_file(path, "pid,date,week\np1,2021-04-05,3.5\n");
  WideCsvSchema schema;
  schema.week_column = "";
  schema.label_column = "";
  const auto ds = load_dataset_csv(path, schema);
  CHECK(ds.feature_names == std::vector<std::string>{"week"});
  CHECK(*ds.participants[0].rows[0].values[0] == 3.5);
}

TEST_CASE("validate_dataset enforces structural invariants") {
  auto ok = two_feature_dataset();
  CHECK_NOTHROW(validate_dataset(ok));

  auto dup = ok;
  dup.participants.push_back(dup.participants[0]);
  CHECK_THROWS_AS(validate_dataset(dup), error);

  auto bad_week = ok;
  bad_week.participants[0].rows[0].week = 0;
  CHECK_THROWS_AS(validate_dataset(bad_week), error);
}

TEST_CASE("date parsing is strict ISO") {
  CHECK(format_date(parse_date("2021-04-05")) == "2021-04-05");
  CHECK(parse_date("1970-01-01").days == 0);
  CHECK(parse_date("2021-03-01").days - parse_date("2021-02-28").days == 1);
  CHECK(parse_date("2020-03-01").days - parse_date("2020-02-28").days == 2);
  CHECK_THROWS_AS(parse_date("2021-4-05"), error);
  CHECK_THROWS_AS(parse_date("2021-13-01"), error);
  CHECK_THROWS_AS(parse_date("2021-02-30"), error);
  CHECK_THROWS_AS(parse_date("garbage"), error);
}
