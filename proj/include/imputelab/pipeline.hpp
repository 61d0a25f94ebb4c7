#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "imputelab/amputation.hpp"
#include "imputelab/dataset.hpp"
#include "imputelab/imputers.hpp"
#include "imputelab/little.hpp"
#include "imputelab/predictor.hpp"

namespace imputelab {

enum class leakage_mode { full, train_only };
enum class week_aggregation { mean, median };

std::string to_string(leakage_mode m);
leakage_mode leakage_mode_from_string(const std::string& s);
std::string to_string(week_aggregation a);
week_aggregation week_aggregation_from_string(const std::string& s);

/// Fit-and-complete every participant independently with the given strategy;
/// per-participant failures are logged, appended to `failures`, and leave that
/// participant unchanged.
LongitudinalDataset pldi(const LongitudinalDataset& ds, const FeatureSet& features,
                         const StrategySpec& strategy, unsigned jobs = 0,
                         std::vector<std::string>* failures = nullptr);

struct ParticipantReconstruction {
  std::string participant_id;
  std::optional<double> r_rmse;
  std::size_t n_removed = 0;
  std::size_t n_scored = 0;
  std::size_t n_declined = 0;  // removed cells the strategy left Missing
};

/// Score an imputed dataset against the amputation plan's originals,
/// restricted to removed cells the strategy actually filled.
std::vector<ParticipantReconstruction> score_reconstruction(const LongitudinalDataset& imputed,
                                                            const FeatureSet& features,
                                                            const AmputationPlan& plan);

struct ReconstructionEntry {
  std::string participant_id;
  std::string strategy;
  std::optional<double> r_rmse;
  std::size_t n_removed = 0, n_scored = 0, n_declined = 0;
  double availability_pct = 0.0;  // availability after amputation
};

struct ReconstructionResult {
  std::vector<ReconstructionEntry> entries;  // strategy-major, participant-minor
  struct Pooled {
    std::string strategy;
    std::optional<double> r_rmse;
    std::size_t n_scored = 0, n_declined = 0;
  };
  std::vector<Pooled> pooled;
  std::string amputation_kind_name;
  double realized_rate_pct = 0.0;
  std::vector<std::string> failures;
};

ReconstructionResult run_reconstruction(const LongitudinalDataset& ds, const FeatureSet& features,
                                        const std::vector<StrategySpec>& strategies,
                                        const AmputationConfig& amp, unsigned jobs = 0);

struct PredictionStrategyResult {
  std::string strategy;
  std::optional<double> pooled_auroc;
  std::optional<double> pooled_balanced_accuracy;
  std::vector<std::string> participant_ids;      // aligned across strategies
  std::vector<double> per_participant_accuracy;  // test-week accuracy
};

struct PredictionResult {
  std::vector<PredictionStrategyResult> strategies;
  std::vector<std::pair<std::string, std::string>> excluded;  // (pid, reason)
  leakage_mode mode = leakage_mode::train_only;
  std::string predictor_name;
};

PredictionResult run_prediction(const LongitudinalDataset& ds, const FeatureSet& features,
                                const std::vector<StrategySpec>& strategies,
                                const PredictorSpec& predictor, leakage_mode mode,
                                double train_fraction = 0.8,
                                week_aggregation aggregation = week_aggregation::mean,
                                unsigned jobs = 0);

struct RealtimeWeekMetric {
  int week = 0;
  std::string strategy;
  std::optional<double> auroc;
  std::optional<double> balanced_accuracy;
  std::size_t n_predictions = 0;
};

struct RealtimeSchedule {
  int start_week = 3;
  int end_week = 10;
  std::vector<RealtimeWeekMetric> per_week;  // strategy-major, week-minor
  std::vector<std::pair<std::string, std::string>> skipped;  // (pid, reason)
};

RealtimeSchedule run_realtime(const LongitudinalDataset& ds, const FeatureSet& features,
                              const std::vector<StrategySpec>& strategies,
                              const PredictorSpec& predictor,
                              week_aggregation aggregation = week_aggregation::mean,
                              unsigned jobs = 0);

/// Aggregate one participant's completed rows into per-week feature vectors
/// (NaN where a week has no value) and the week's label when present.
std::vector<WeeklyRow> aggregate_weeks(const ParticipantSeries& series,
                                       const Eigen::MatrixXd& completed,
                                       week_aggregation aggregation);

struct McarSweep {
  std::vector<McarTestResult> results;  // dataset participant order
  std::vector<char> reject_bh;          // aligned; 0 for skipped participants
  double alpha = 0.05;
};

/// Per-participant MCAR test over the selected features, with BH correction
/// across the non-skipped participants of this run.
McarSweep run_mcar_sweep(const LongitudinalDataset& ds, const FeatureSet& features, double alpha,
                         unsigned jobs = 0);

}  // namespace imputelab
