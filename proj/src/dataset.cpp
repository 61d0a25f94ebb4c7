#include "imputelab/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "imputelab/error.hpp"

namespace imputelab {

std::vector<std::size_t> feature_indices(const LongitudinalDataset& ds, const FeatureSet& fs) {
  if (fs.names.empty()) raise(errc::invalid_input, "feature set is empty");
  std::unordered_map<std::string, std::size_t> pos;
  for (std::size_t j = 0; j < ds.feature_names.size(); ++j) pos.emplace(ds.feature_names[j], j);
  std::vector<std::size_t> out;
  std::unordered_set<std::string> seen;
  out.reserve(fs.names.size());
  for (const auto& name : fs.names) {
    if (!seen.insert(name).second)
      raise(errc::invalid_input, "duplicate feature '" + name + "' in feature set");
    auto it = pos.find(name);
    if (it == pos.end()) raise(errc::feature_not_found, "feature '" + name + "' not in dataset");
    out.push_back(it->second);
  }
  return out;
}

void validate_dataset(const LongitudinalDataset& ds) {
  std::unordered_set<std::string> ids;
  for (const auto& p : ds.participants) {
    if (!ids.insert(p.participant_id).second)
      raise(errc::invalid_input, "duplicate participant id '" + p.participant_id + "'");
    for (std::size_t i = 0; i < p.rows.size(); ++i) {
      const auto& row = p.rows[i];
      if (row.values.size() != ds.feature_names.size())
        raise(errc::invalid_input,
              "row width mismatch for participant '" + p.participant_id + "'");
      if (i > 0 && !(p.rows[i - 1].day < row.day))
        raise(errc::invalid_input,
              "dates not strictly increasing for participant '" + p.participant_id + "'");
      if (row.week < 1)
        raise(errc::invalid_input, "week index < 1 for participant '" + p.participant_id + "'");
      for (const auto& c : row.values)
        if (c && !std::isfinite(*c))
          raise(errc::invalid_input,
                "non-finite observed value for participant '" + p.participant_id + "'");
      if (row.label && *row.label != 0 && *row.label != 1)
        raise(errc::invalid_input, "label must be 0 or 1");
    }
  }
}

void derive_weeks(LongitudinalDataset& ds) {
  for (auto& p : ds.participants) {
    if (p.rows.empty()) continue;
    const std::int64_t first = p.rows.front().day.days;
    for (auto& row : p.rows)
      row.week = static_cast<int>(1 + (row.day.days - first) / 7);
  }
}

AvailabilityReport availability(const LongitudinalDataset& ds, const FeatureSet& fs) {
  const auto cols = feature_indices(ds, fs);
  AvailabilityReport rep;
  std::vector<std::size_t> feat_obs(cols.size(), 0), feat_tot(cols.size(), 0);
  std::size_t all_obs = 0, all_tot = 0;
  for (const auto& p : ds.participants) {
    std::size_t p_obs = 0, p_tot = 0;
    for (const auto& row : p.rows) {
      for (std::size_t k = 0; k < cols.size(); ++k) {
        ++feat_tot[k];
        ++p_tot;
        if (row.values[cols[k]]) {
          ++feat_obs[k];
          ++p_obs;
        }
      }
    }
    all_obs += p_obs;
    all_tot += p_tot;
    rep.per_participant_pct.emplace_back(
        p.participant_id,
        p_tot == 0 ? 0.0 : 100.0 * static_cast<double>(p_obs) / static_cast<double>(p_tot));
  }
  for (std::size_t k = 0; k < cols.size(); ++k)
    rep.per_feature_pct.emplace_back(
        fs.names[k], feat_tot[k] == 0
                         ? 0.0
                         : 100.0 * static_cast<double>(feat_obs[k]) /
                               static_cast<double>(feat_tot[k]));
  rep.overall_pct =
      all_tot == 0 ? 0.0 : 100.0 * static_cast<double>(all_obs) / static_cast<double>(all_tot);
  return rep;
}

LongitudinalDataset select_features(const LongitudinalDataset& ds, const FeatureSet& fs) {
  const auto cols = feature_indices(ds, fs);
  LongitudinalDataset out;
  out.feature_names = fs.names;
  out.participants.reserve(ds.participants.size());
  for (const auto& p : ds.participants) {
    ParticipantSeries q;
    q.participant_id = p.participant_id;
    q.rows.reserve(p.rows.size());
    for (const auto& row : p.rows) {
      DayRow r;
      r.day = row.day;
      r.week = row.week;
      r.label = row.label;
      r.values.reserve(cols.size());
      for (std::size_t c : cols) r.values.push_back(row.values[c]);
      q.rows.push_back(std::move(r));
    }
    out.participants.push_back(std::move(q));
  }
  return out;
}

std::pair<ParticipantSeries, ParticipantSeries> chronological_split(const ParticipantSeries& s,
                                                                    double train_fraction) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    raise(errc::invalid_input, "train_fraction must be in (0,1)");
  if (s.rows.empty())
    raise(errc::invalid_input, "cannot split empty series '" + s.participant_id + "'");
  std::set<int> weeks;
  for (const auto& row : s.rows) weeks.insert(row.week);
  const auto n_weeks = weeks.size();
  const auto n_train = static_cast<std::size_t>(
      std::ceil(train_fraction * static_cast<double>(n_weeks)));
  if (n_train >= n_weeks)
    raise(errc::split_infeasible,
          "participant '" + s.participant_id + "' has too few weeks to split");
  auto it = weeks.begin();
  std::advance(it, static_cast<std::ptrdiff_t>(n_train) - 1);
  const int last_train_week = *it;
  ParticipantSeries train, test;
  train.participant_id = s.participant_id;
  test.participant_id = s.participant_id;
  for (const auto& row : s.rows)
    (row.week <= last_train_week ? train : test).rows.push_back(row);
  return {std::move(train), std::move(test)};
}

Eigen::MatrixXd to_matrix(const ParticipantSeries& s, const std::vector<std::size_t>& cols) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(s.rows.size()),
                    static_cast<Eigen::Index>(cols.size()));
  for (std::size_t i = 0; i < s.rows.size(); ++i)
    for (std::size_t k = 0; k < cols.size(); ++k) {
      const auto& c = s.rows[i].values[cols[k]];
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
          c ? *c : std::numeric_limits<double>::quiet_NaN();
    }
  return m;
}

void from_matrix(ParticipantSeries& s, const std::vector<std::size_t>& cols,
                 const Eigen::MatrixXd& m) {
  if (m.rows() != static_cast<Eigen::Index>(s.rows.size()) ||
      m.cols() != static_cast<Eigen::Index>(cols.size()))
    raise(errc::invalid_input, "matrix shape does not match series");
  for (std::size_t i = 0; i < s.rows.size(); ++i)
    for (std::size_t k = 0; k < cols.size(); ++k) {
      const double v = m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k));
      s.rows[i].values[cols[k]] = std::isnan(v) ? Cell{} : Cell{v};
    }
}

}  // namespace imputelab
