#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "imputelab/dataset.hpp"

namespace imputelab {

enum class amputation_kind { mcar, mnar_central, mnar_tails };

std::string to_string(amputation_kind k);
amputation_kind amputation_kind_from_string(const std::string& s);

struct AmputationConfig {
  amputation_kind kind = amputation_kind::mcar;
  double r = 10.0;  // percent of observed cells removed per (participant, feature)
  std::uint64_t seed = 0;
};

struct RemovedCell {
  std::string participant_id;
  date day;
  std::string feature;
  double original_value = 0.0;
};

struct AmputationPlan {
  std::vector<RemovedCell> removed;
  double realized_rate_pct = 0.0;
  std::vector<std::pair<std::string, std::string>> skipped;  // (pid, feature) with no observed cells
};

/// Removes m = round(r/100 * n_obs) observed cells per (participant, feature),
/// positions chosen by the configured mechanism; the input is untouched.
std::pair<LongitudinalDataset, AmputationPlan> ampute(const LongitudinalDataset& ds,
                                                      const FeatureSet& features,
                                                      const AmputationConfig& config);

double realized_rate(const AmputationPlan& plan, const LongitudinalDataset& source,
                     const FeatureSet& features);

/// Restore every removed cell's original value (inverse of ampute).
void apply_plan_originals(LongitudinalDataset& ds, const AmputationPlan& plan);

void write_plan_csv(const AmputationPlan& plan, const std::string& path);

}  // namespace imputelab
