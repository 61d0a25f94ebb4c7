#pragma once

#include <string>
#include <vector>

#include "imputelab/dataset.hpp"

namespace imputelab {

struct WideCsvSchema {
  std::string id_column = "pid";
  std::string date_column = "date";
  // Week/label columns are used when present in the header; a missing week
  // column derives weeks from dates. Set to "" to treat such a column as a
  // plain feature.
  std::string week_column = "week";
  std::string label_column = "label";
  std::vector<std::string> missing_tokens = {"", "NA", "NaN", "nan"};
};

/// Wide CSV: one row per participant-day; every non-schema column is a feature.
LongitudinalDataset load_dataset_csv(const std::string& path, const WideCsvSchema& schema = {});

/// Companion writer: emits pid,date,week[,label],<features...>; LF line ends.
void write_dataset_csv(const LongitudinalDataset& ds, const std::string& path,
                       bool include_labels = true);

/// Split one CSV line into fields (no quoting; trailing CR stripped).
std::vector<std::string> split_csv_line(const std::string& line);

std::string format_double(double v);

}  // namespace imputelab
