#pragma once

#include <string>
#include <vector>

#include "json.hpp"

namespace imputelab {

struct ReportTable {
  std::string name;  // file stem; written as <name>.csv
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;  // cells pre-formatted (floats %.17g)
};

/// Deterministic run artifact: report.json mirrors the tables plus a config
/// echo and summary scalars. Wall-clock runtime is volatile and therefore
/// goes to a separate run_meta.json, excluded from byte-identity comparisons.
struct ReportDocument {
  std::string tool_version;
  std::string task;
  nlohmann::json config_echo;
  nlohmann::json summary;
  std::vector<ReportTable> tables;
  double runtime_seconds = 0.0;
  nlohmann::json run_meta;  // volatile extras for run_meta.json
};

/// Writes report.json, one CSV per table, and run_meta.json into out_dir
/// (created if needed); returns the written paths.
std::vector<std::string> write_report(const ReportDocument& report, const std::string& out_dir);

std::string tool_version();

}  // namespace imputelab
