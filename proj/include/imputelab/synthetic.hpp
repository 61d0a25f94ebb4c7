#pragma once

#include <cstdint>

#include "imputelab/amputation.hpp"
#include "imputelab/dataset.hpp"

namespace imputelab {

struct SyntheticConfig {
  std::size_t n_participants = 10;
  std::size_t n_weeks = 10;
  std::size_t n_features = 8;
  double missing_rate = 0.0;  // fraction in [0,1)
  amputation_kind mechanism = amputation_kind::mcar;
  std::uint64_t seed = 0;
  // Daily value: offset + trend_scale * shared AR(1) + feature_scale * own
  // AR(1) + noise_scale * white noise; weekly label thresholds the centered
  // week means of the first two features plus label noise.
  double phi = 0.8;
  double offset_scale = 25.0;
  double trend_scale = 2.2;
  double feature_scale = 0.4;
  double noise_scale = 0.5;
  double label_slope = 1.2;
  double label_noise = 3.0;
};

LongitudinalDataset generate_synthetic(const SyntheticConfig& cfg);

}  // namespace imputelab
