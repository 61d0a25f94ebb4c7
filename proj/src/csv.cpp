#include "imputelab/csv.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <unordered_map>

#include "imputelab/error.hpp"

namespace imputelab {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      fields.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  if (!cur.empty() && cur.back() == '\r') cur.pop_back();
  fields.push_back(cur);
  return fields;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

bool is_missing_token(const std::string& tok, const WideCsvSchema& schema) {
  return std::find(schema.missing_tokens.begin(), schema.missing_tokens.end(), tok) !=
         schema.missing_tokens.end();
}

double parse_number(const std::string& tok, std::size_t line_no) {
  const char* begin = tok.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0' || !std::isfinite(v))
    raise(errc::malformed_row,
          "line " + std::to_string(line_no) + ": cannot parse '" + tok + "' as a number");
  return v;
}

LongitudinalDataset load_dataset_csv_impl(const std::string& path, const WideCsvSchema& schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(errc::io_error, "cannot open '" + path + "'");

  std::string line;
  if (!std::getline(in, line))
    raise(errc::malformed_row, "line 1: empty file, expected a header");
  auto header = split_csv_line(line);

  auto find_col = [&](const std::string& name) -> std::ptrdiff_t {
    auto it = std::find(header.begin(), header.end(), name);
    return it == header.end() ? -1 : it - header.begin();
  };

  const auto id_col = find_col(schema.id_column);
  if (id_col < 0) raise(errc::missing_column, "id column '" + schema.id_column + "' not in header");
  const auto date_col = find_col(schema.date_column);
  if (date_col < 0)
    raise(errc::missing_column, "date column '" + schema.date_column + "' not in header");
  // Week and label columns are optional in the file: a named column that is
  // absent simply means weeks are derived and labels are empty.
  std::ptrdiff_t week_col = -1, label_col = -1;
  if (!schema.week_column.empty()) week_col = find_col(schema.week_column);
  if (!schema.label_column.empty()) label_col = find_col(schema.label_column);

  LongitudinalDataset ds;
  std::vector<std::size_t> feature_cols;
  for (std::size_t j = 0; j < header.size(); ++j) {
    const auto sj = static_cast<std::ptrdiff_t>(j);
    if (sj == id_col || sj == date_col || sj == week_col || sj == label_col) continue;
    ds.feature_names.push_back(header[j]);
    feature_cols.push_back(j);
  }

  std::unordered_map<std::string, std::size_t> participant_slot;
  std::set<std::pair<std::string, std::int64_t>> seen_rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    auto fields = split_csv_line(line);
    if (fields.size() != header.size())
      raise(errc::malformed_row, "line " + std::to_string(line_no) + ": expected " +
                                     std::to_string(header.size()) + " fields, got " +
                                     std::to_string(fields.size()));
    const std::string& pid = fields[static_cast<std::size_t>(id_col)];
    if (pid.empty())
      raise(errc::malformed_row, "line " + std::to_string(line_no) + ": empty participant id");

    DayRow row;
    try {
      row.day = parse_date(fields[static_cast<std::size_t>(date_col)]);
    } catch (const error& e) {
      raise(errc::malformed_row, "line " + std::to_string(line_no) + ": " + e.what());
    }
    if (!seen_rows.emplace(pid, row.day.days).second)
      raise(errc::duplicate_row, "line " + std::to_string(line_no) + ": duplicate row for (" +
                                     pid + ", " + format_date(row.day) + ")");
    if (week_col >= 0) {
      const double w = parse_number(fields[static_cast<std::size_t>(week_col)], line_no);
      if (w < 1 || w != std::floor(w))
        raise(errc::malformed_row,
              "line " + std::to_string(line_no) + ": week must be an integer >= 1");
      row.week = static_cast<int>(w);
    }
    if (label_col >= 0) {
      const std::string& tok = fields[static_cast<std::size_t>(label_col)];
      if (!is_missing_token(tok, schema)) {
        const double v = parse_number(tok, line_no);
        if (v != 0.0 && v != 1.0)
          raise(errc::malformed_row, "line " + std::to_string(line_no) + ": label must be 0 or 1");
        row.label = static_cast<int>(v);
      }
    }
    row.values.reserve(feature_cols.size());
    for (std::size_t c : feature_cols) {
      const std::string& tok = fields[c];
      if (is_missing_token(tok, schema))
        row.values.emplace_back();
      else
        row.values.emplace_back(parse_number(tok, line_no));
    }

    auto it = participant_slot.find(pid);
    if (it == participant_slot.end()) {
      it = participant_slot.emplace(pid, ds.participants.size()).first;
      ds.participants.push_back(ParticipantSeries{pid, {}});
    }
    ds.participants[it->second].rows.push_back(std::move(row));
  }

  for (auto& p : ds.participants)
    std::sort(p.rows.begin(), p.rows.end(),
              [](const DayRow& a, const DayRow& b) { return a.day < b.day; });
  if (week_col < 0) derive_weeks(ds);
  validate_dataset(ds);
  return ds;
}

}  // namespace

LongitudinalDataset load_dataset_csv(const std::string& path, const WideCsvSchema& schema) {
  try {
    return load_dataset_csv_impl(path, schema);
  } catch (const error& e) {
    if (e.code() == errc::io_error) throw;
    raise(e.code(), "'" + path + "': " + e.what());
  }
}

void write_dataset_csv(const LongitudinalDataset& ds, const std::string& path,
                       bool include_labels) {
  bool any_label = false;
  if (include_labels)
    for (const auto& p : ds.participants)
      for (const auto& row : p.rows)
        if (row.label) any_label = true;

  std::ofstream out(path, std::ios::binary);
  if (!out) raise(errc::io_error, "cannot write '" + path + "'");
  out << "pid,date,week";
  if (any_label) out << ",label";
  for (const auto& f : ds.feature_names) out << ',' << f;
  out << '\n';
  for (const auto& p : ds.participants)
    for (const auto& row : p.rows) {
      out << p.participant_id << ',' << format_date(row.day) << ',' << row.week;
      if (any_label) {
        out << ',';
        if (row.label) out << *row.label;
      }
      for (const auto& c : row.values) {
        out << ',';
        if (c) out << format_double(*c);
      }
      out << '\n';
    }
  if (!out) raise(errc::io_error, "failed writing '" + path + "'");
}

}  // namespace imputelab
