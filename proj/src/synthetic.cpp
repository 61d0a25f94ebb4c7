#include "imputelab/synthetic.hpp"

#include <cmath>
#include <cstdio>
#include <vector>

#include "imputelab/error.hpp"
#include "imputelab/rng.hpp"

namespace imputelab {

namespace {

std::vector<double> ar1(std::size_t n, double phi, rng& gen) {
  std::vector<double> x(n);
  x[0] = gen.normal() / std::sqrt(1.0 - phi * phi);
  for (std::size_t t = 1; t < n; ++t) x[t] = phi * x[t - 1] + gen.normal();
  return x;
}

}  // namespace

LongitudinalDataset generate_synthetic(const SyntheticConfig& cfg) {
  if (cfg.n_participants < 1 || cfg.n_weeks < 1 || cfg.n_features < 1)
    raise(errc::bad_config, "synthetic generator needs counts >= 1");
  if (!(cfg.missing_rate >= 0.0 && cfg.missing_rate < 1.0))
    raise(errc::bad_config, "missing_rate must be in [0,1)");

  const std::size_t n_days = 7 * cfg.n_weeks;
  const date start = parse_date("2021-01-04");

  LongitudinalDataset ds;
  ds.feature_names.reserve(cfg.n_features);
  for (std::size_t j = 0; j < cfg.n_features; ++j)
    ds.feature_names.push_back("f" + std::to_string(j));

  for (std::size_t pi = 0; pi < cfg.n_participants; ++pi) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "p%03zu", pi + 1);
    ParticipantSeries series;
    series.participant_id = buf;
    rng gen(seed_stream(cfg.seed, series.participant_id));

    const auto g = ar1(n_days, cfg.phi, gen);
    std::vector<double> offsets(cfg.n_features);
    for (auto& o : offsets) o = cfg.offset_scale * (1.0 + 0.5 * std::abs(gen.normal()));
    std::vector<std::vector<double>> x(cfg.n_features);
    for (std::size_t j = 0; j < cfg.n_features; ++j) {
      const auto h = ar1(n_days, cfg.phi, gen);
      x[j].resize(n_days);
      for (std::size_t t = 0; t < n_days; ++t)
        x[j][t] = offsets[j] + cfg.trend_scale * g[t] + cfg.feature_scale * h[t] +
                  cfg.noise_scale * gen.normal();
    }

    std::vector<int> labels(cfg.n_weeks);
    for (std::size_t w = 0; w < cfg.n_weeks; ++w) {
      double m0 = 0.0, m1 = 0.0;
      for (std::size_t t = 7 * w; t < 7 * w + 7; ++t) {
        m0 += x[0][t];
        if (cfg.n_features > 1) m1 += x[1][t];
      }
      m0 = m0 / 7.0 - offsets[0];
      m1 = cfg.n_features > 1 ? m1 / 7.0 - offsets[1] : 0.0;
      const double score = cfg.label_slope * (m0 + m1) + cfg.label_noise * gen.normal();
      labels[w] = score > 0.0 ? 1 : 0;
    }

    series.rows.reserve(n_days);
    for (std::size_t t = 0; t < n_days; ++t) {
      DayRow row;
      row.day = date{start.days + static_cast<std::int64_t>(t)};
      row.week = static_cast<int>(t / 7 + 1);
      row.values.reserve(cfg.n_features);
      for (std::size_t j = 0; j < cfg.n_features; ++j) row.values.emplace_back(x[j][t]);
      if (t % 7 == 6) row.label = labels[t / 7];
      series.rows.push_back(std::move(row));
    }
    ds.participants.push_back(std::move(series));
  }

  if (cfg.missing_rate > 0.0) {
    AmputationConfig amp;
    amp.kind = cfg.mechanism;
    amp.r = cfg.missing_rate * 100.0;
    amp.seed = mix64(cfg.seed ^ 0x5eedf00du);
    ds = ampute(ds, FeatureSet{ds.feature_names}, amp).first;
  }
  return ds;
}

}  // namespace imputelab
