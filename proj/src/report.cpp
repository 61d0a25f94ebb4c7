#include "imputelab/report.hpp"

#include <filesystem>
#include <fstream>

#include "imputelab/error.hpp"

namespace imputelab {

std::string tool_version() { return "imputelab 1.0.0"; }

namespace {

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) raise(errc::io_error, "cannot open '" + path + "' for writing");
  out << content;
  if (!out) raise(errc::io_error, "write to '" + path + "' failed");
}

std::string table_csv(const ReportTable& table) {
  std::string text;
  for (std::size_t j = 0; j < table.columns.size(); ++j) {
    if (j) text += ',';
    text += table.columns[j];
  }
  text += '\n';
  for (const auto& row : table.rows) {
    if (row.size() != table.columns.size())
      raise(errc::invalid_input, "table '" + table.name + "' has a ragged row");
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j) text += ',';
      text += row[j];
    }
    text += '\n';
  }
  return text;
}

}  // namespace

std::vector<std::string> write_report(const ReportDocument& report, const std::string& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) raise(errc::io_error, "cannot create output directory '" + out_dir + "'");

  std::vector<std::string> written;
  nlohmann::json doc;
  doc["tool_version"] = report.tool_version;
  doc["task"] = report.task;
  doc["config"] = report.config_echo;
  doc["summary"] = report.summary;
  doc["tables"] = nlohmann::json::object();
  for (const auto& table : report.tables) {
    nlohmann::json t;
    t["columns"] = table.columns;
    t["rows"] = table.rows;
    doc["tables"][table.name] = std::move(t);
  }
  const auto report_path = (std::filesystem::path(out_dir) / "report.json").string();
  write_text_file(report_path, doc.dump(2) + "\n");
  written.push_back(report_path);

  for (const auto& table : report.tables) {
    const auto path = (std::filesystem::path(out_dir) / (table.name + ".csv")).string();
    write_text_file(path, table_csv(table));
    written.push_back(path);
  }

  nlohmann::json meta = report.run_meta.is_object() ? report.run_meta : nlohmann::json::object();
  meta["runtime_seconds"] = report.runtime_seconds;
  meta["volatile"] = true;
  const auto meta_path = (std::filesystem::path(out_dir) / "run_meta.json").string();
  write_text_file(meta_path, meta.dump(2) + "\n");
  written.push_back(meta_path);
  return written;
}

}  // namespace imputelab
