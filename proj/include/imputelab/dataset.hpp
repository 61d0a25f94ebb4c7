#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "imputelab/date.hpp"

namespace imputelab {

/// A cell is either Observed (engaged, finite) or Missing (nullopt).
using Cell = std::optional<double>;

struct DayRow {
  date day;
  int week = 0;  // 1-based; derived from dates when the input has no week column
  std::vector<Cell> values;
  std::optional<int> label;
};

struct ParticipantSeries {
  std::string participant_id;
  std::vector<DayRow> rows;  // strictly increasing by date
};

struct LongitudinalDataset {
  std::vector<std::string> feature_names;
  std::vector<ParticipantSeries> participants;
};

struct FeatureSet {
  std::vector<std::string> names;
};

struct AvailabilityReport {
  double overall_pct = 0.0;
  std::vector<std::pair<std::string, double>> per_feature_pct;
  std::vector<std::pair<std::string, double>> per_participant_pct;
};

/// Resolve feature names to column indices; unknown or duplicate names raise
/// feature_not_found / invalid_input.
std::vector<std::size_t> feature_indices(const LongitudinalDataset& ds, const FeatureSet& fs);

/// Checks dataset invariants: unique participant ids, strictly increasing
/// dates, consistent row widths, finite observed values, week >= 1.
void validate_dataset(const LongitudinalDataset& ds);

/// Fill week = 1 + floor(days_since_first_row / 7) for every participant.
void derive_weeks(LongitudinalDataset& ds);

AvailabilityReport availability(const LongitudinalDataset& ds, const FeatureSet& fs);

LongitudinalDataset select_features(const LongitudinalDataset& ds, const FeatureSet& fs);

/// Split one participant's rows by distinct weeks: the first
/// ceil(train_fraction * n_weeks) weeks go to train, the rest to test.
std::pair<ParticipantSeries, ParticipantSeries> chronological_split(const ParticipantSeries& s,
                                                                    double train_fraction);

/// Participant rows over the selected feature columns as a matrix, NaN = Missing.
Eigen::MatrixXd to_matrix(const ParticipantSeries& s, const std::vector<std::size_t>& cols);

/// Write a completed matrix back into the selected columns; NaN clears to Missing.
void from_matrix(ParticipantSeries& s, const std::vector<std::size_t>& cols,
                 const Eigen::MatrixXd& m);

}  // namespace imputelab
