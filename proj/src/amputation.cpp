#include "imputelab/amputation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <unordered_map>

#include "imputelab/csv.hpp"
#include "imputelab/error.hpp"
#include "imputelab/rng.hpp"

namespace imputelab {

std::string to_string(amputation_kind k) {
  switch (k) {
    case amputation_kind::mcar: return "MCAR";
    case amputation_kind::mnar_central: return "MNAR_CENTRAL";
    case amputation_kind::mnar_tails: return "MNAR_TAILS";
  }
  return "?";
}

amputation_kind amputation_kind_from_string(const std::string& s) {
  if (s == "MCAR" || s == "mcar") return amputation_kind::mcar;
  if (s == "MNAR_CENTRAL" || s == "mnar_central") return amputation_kind::mnar_central;
  if (s == "MNAR_TAILS" || s == "mnar_tails") return amputation_kind::mnar_tails;
  raise(errc::bad_config, "unknown amputation kind '" + s + "'");
}

namespace {

std::vector<std::size_t> pick_rows(amputation_kind kind, const std::vector<std::size_t>& obs_rows,
                                   const std::vector<double>& obs_vals, std::size_t m, rng& gen) {
  const std::size_t n = obs_rows.size();
  std::vector<std::size_t> chosen;
  if (kind == amputation_kind::mcar) {
    for (std::size_t slot : gen.sample_without_replacement(n, m))
      chosen.push_back(obs_rows[slot]);
  } else {
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if (obs_vals[a] != obs_vals[b]) return obs_vals[a] < obs_vals[b];
      return obs_rows[a] < obs_rows[b];
    });
    if (kind == amputation_kind::mnar_central) {
      const std::size_t start = (n - m) / 2;
      for (std::size_t i = start; i < start + m; ++i) chosen.push_back(obs_rows[order[i]]);
    } else {
      const std::size_t lo = m / 2;
      for (std::size_t i = 0; i < lo; ++i) chosen.push_back(obs_rows[order[i]]);
      for (std::size_t i = n - (m - lo); i < n; ++i) chosen.push_back(obs_rows[order[i]]);
    }
  }
  std::sort(chosen.begin(), chosen.end());
  return chosen;
}

}  // namespace

std::pair<LongitudinalDataset, AmputationPlan> ampute(const LongitudinalDataset& ds,
                                                      const FeatureSet& features,
                                                      const AmputationConfig& config) {
  if (!(config.r > 0.0 && config.r < 100.0))
    raise(errc::bad_config, "amputation rate must be in (0,100)");
  const auto cols = feature_indices(ds, features);
  LongitudinalDataset out = ds;
  AmputationPlan plan;
  std::size_t observed_total = 0;

  for (auto& p : out.participants) {
    for (std::size_t k = 0; k < cols.size(); ++k) {
      const std::size_t col = cols[k];
      std::vector<std::size_t> obs_rows;
      std::vector<double> obs_vals;
      for (std::size_t i = 0; i < p.rows.size(); ++i)
        if (p.rows[i].values[col]) {
          obs_rows.push_back(i);
          obs_vals.push_back(*p.rows[i].values[col]);
        }
      observed_total += obs_rows.size();
      if (obs_rows.empty()) {
        plan.skipped.emplace_back(p.participant_id, features.names[k]);
        continue;
      }
      const auto m = static_cast<std::size_t>(
          std::floor(config.r / 100.0 * static_cast<double>(obs_rows.size()) + 0.5));
      if (m == 0) continue;
      rng gen(seed_stream(config.seed, p.participant_id, features.names[k]));
      for (std::size_t row : pick_rows(config.kind, obs_rows, obs_vals, m, gen)) {
        plan.removed.push_back(
            RemovedCell{p.participant_id, p.rows[row].day, features.names[k],
                        *p.rows[row].values[col]});
        p.rows[row].values[col] = Cell{};
      }
    }
  }
  plan.realized_rate_pct =
      observed_total == 0
          ? 0.0
          : 100.0 * static_cast<double>(plan.removed.size()) / static_cast<double>(observed_total);
  return {std::move(out), std::move(plan)};
}

double realized_rate(const AmputationPlan& plan, const LongitudinalDataset& source,
                     const FeatureSet& features) {
  const auto cols = feature_indices(source, features);
  std::size_t observed_total = 0;
  for (const auto& p : source.participants)
    for (const auto& row : p.rows)
      for (std::size_t col : cols)
        if (row.values[col]) ++observed_total;
  if (observed_total == 0) return 0.0;
  return 100.0 * static_cast<double>(plan.removed.size()) / static_cast<double>(observed_total);
}

void apply_plan_originals(LongitudinalDataset& ds, const AmputationPlan& plan) {
  std::unordered_map<std::string, std::size_t> pidx;
  for (std::size_t i = 0; i < ds.participants.size(); ++i)
    pidx.emplace(ds.participants[i].participant_id, i);
  std::unordered_map<std::string, std::size_t> fidx;
  for (std::size_t j = 0; j < ds.feature_names.size(); ++j)
    fidx.emplace(ds.feature_names[j], j);
  for (const auto& cell : plan.removed) {
    auto pit = pidx.find(cell.participant_id);
    auto fit = fidx.find(cell.feature);
    if (pit == pidx.end() || fit == fidx.end())
      raise(errc::invalid_input, "plan entry does not match dataset");
    auto& rows = ds.participants[pit->second].rows;
    auto rit = std::lower_bound(rows.begin(), rows.end(), cell.day,
                                [](const DayRow& r, const date& d) { return r.day < d; });
    if (rit == rows.end() || !(rit->day == cell.day))
      raise(errc::invalid_input, "plan entry date not found in dataset");
    rit->values[fit->second] = cell.original_value;
  }
}

void write_plan_csv(const AmputationPlan& plan, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) raise(errc::io_error, "cannot write '" + path + "'");
  out << "pid,date,feature,original_value\n";
  for (const auto& cell : plan.removed)
    out << cell.participant_id << ',' << format_date(cell.day) << ',' << cell.feature << ','
        << format_double(cell.original_value) << '\n';
  if (!out) raise(errc::io_error, "failed writing '" + path + "'");
}

}  // namespace imputelab
