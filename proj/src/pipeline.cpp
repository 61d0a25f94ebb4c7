#include "imputelab/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <set>
#include <thread>

#include "imputelab/error.hpp"
#include "imputelab/log.hpp"
#include "imputelab/matrixutil.hpp"
#include "imputelab/rng.hpp"
#include "imputelab/stats.hpp"

namespace imputelab {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

unsigned resolve_jobs(unsigned jobs, std::size_t n) {
  if (jobs == 0) jobs = std::thread::hardware_concurrency();
  if (jobs == 0) jobs = 1;
  if (n > 0 && static_cast<std::size_t>(jobs) > n) jobs = static_cast<unsigned>(n);
  return jobs;
}

/// Runs fn(0..n-1) across worker threads; every fn(i) writes only to its own
/// pre-sized slot, so results are independent of the worker count.
template <typename Fn>
void parallel_for(std::size_t n, unsigned jobs, Fn&& fn) {
  jobs = resolve_jobs(jobs, n);
  if (jobs <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex mu;
  std::exception_ptr first;
  std::vector<std::thread> workers;
  workers.reserve(jobs);
  for (unsigned t = 0; t < jobs; ++t) {
    workers.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= n) return;
        try {
          fn(i);
        } catch (...) {
          const std::lock_guard<std::mutex> lock(mu);
          if (!first) first = std::current_exception();
        }
      }
    });
  }
  for (auto& w : workers) w.join();
  if (first) std::rethrow_exception(first);
}

}  // namespace

std::string to_string(leakage_mode m) {
  return m == leakage_mode::full ? "full" : "train_only";
}

leakage_mode leakage_mode_from_string(const std::string& s) {
  if (s == "full" || s == "FULL") return leakage_mode::full;
  if (s == "train_only" || s == "train-only" || s == "TRAIN_ONLY") return leakage_mode::train_only;
  raise(errc::bad_config, "unknown leakage mode: " + s);
}

std::string to_string(week_aggregation a) {
  return a == week_aggregation::mean ? "mean" : "median";
}

week_aggregation week_aggregation_from_string(const std::string& s) {
  if (s == "mean") return week_aggregation::mean;
  if (s == "median") return week_aggregation::median;
  raise(errc::bad_config, "unknown week aggregation: " + s);
}

LongitudinalDataset pldi(const LongitudinalDataset& ds, const FeatureSet& features,
                         const StrategySpec& strategy, unsigned jobs,
                         std::vector<std::string>* failures) {
  const auto cols = feature_indices(ds, features);
  LongitudinalDataset out = ds;
  const std::size_t n = out.participants.size();
  std::vector<std::string> errs(n);
  std::vector<char> empty(n, 0);
  parallel_for(n, jobs, [&](std::size_t i) {
    auto& part = out.participants[i];
    if (part.rows.empty()) {
      empty[i] = 1;
      return;
    }
    StrategySpec local = strategy;
    local.seed = seed_stream(strategy.seed, part.participant_id);
    try {
      auto imputer = make_imputer(local);
      const Eigen::MatrixXd m = to_matrix(part, cols);
      imputer->fit(m);
      from_matrix(part, cols, imputer->transform_fitted());
    } catch (const error& e) {
      errs[i] = e.what();
    }
  });
  for (std::size_t i = 0; i < n; ++i) {
    const auto& pid = out.participants[i].participant_id;
    if (empty[i]) {
      log_warn("pldi: participant " + pid + " has no rows, passes through unchanged");
      continue;
    }
    if (errs[i].empty()) continue;
    log_warn("pldi: participant " + pid + " passes through un-imputed: " + errs[i]);
    if (failures) failures->push_back(pid + ": " + errs[i]);
  }
  return out;
}

std::vector<ParticipantReconstruction> score_reconstruction(const LongitudinalDataset& imputed,
                                                            const FeatureSet& features,
                                                            const AmputationPlan& plan) {
  feature_indices(imputed, features);
  std::map<std::string, std::size_t> participant_index;
  for (std::size_t i = 0; i < imputed.participants.size(); ++i)
    participant_index[imputed.participants[i].participant_id] = i;
  std::map<std::string, std::size_t> feature_index;
  for (std::size_t j = 0; j < imputed.feature_names.size(); ++j)
    feature_index[imputed.feature_names[j]] = j;

  std::vector<ParticipantReconstruction> out(imputed.participants.size());
  std::vector<double> sq_sum(out.size(), 0.0);
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i].participant_id = imputed.participants[i].participant_id;

  for (const auto& cell : plan.removed) {
    const auto pit = participant_index.find(cell.participant_id);
    if (pit == participant_index.end())
      raise(errc::invalid_input, "plan references unknown participant " + cell.participant_id);
    const auto fit = feature_index.find(cell.feature);
    if (fit == feature_index.end())
      raise(errc::feature_not_found, "plan references unknown feature " + cell.feature);
    const auto& part = imputed.participants[pit->second];
    const auto rit =
        std::lower_bound(part.rows.begin(), part.rows.end(), cell.day,
                         [](const DayRow& r, const date& d) { return r.day < d; });
    if (rit == part.rows.end() || rit->day != cell.day)
      raise(errc::invalid_input,
            "plan references a row absent from participant " + cell.participant_id);
    auto& rec = out[pit->second];
    ++rec.n_removed;
    const Cell& value = rit->values[fit->second];
    if (!value.has_value()) {
      ++rec.n_declined;
    } else {
      ++rec.n_scored;
      const double d = *value - cell.original_value;
      sq_sum[pit->second] += d * d;
    }
  }
  for (std::size_t i = 0; i < out.size(); ++i)
    if (out[i].n_scored > 0)
      out[i].r_rmse = std::sqrt(sq_sum[i] / static_cast<double>(out[i].n_scored));
  return out;
}

ReconstructionResult run_reconstruction(const LongitudinalDataset& ds, const FeatureSet& features,
                                        const std::vector<StrategySpec>& strategies,
                                        const AmputationConfig& amp, unsigned jobs) {
  if (strategies.empty()) raise(errc::bad_config, "no strategies given");
  auto [amputed, plan] = ampute(ds, features, amp);
  const auto avail = availability(amputed, features);

  ReconstructionResult result;
  result.amputation_kind_name = to_string(amp.kind);
  result.realized_rate_pct = plan.realized_rate_pct;
  for (const auto& strategy : strategies) {
    std::vector<std::string> failures;
    const LongitudinalDataset imputed = pldi(amputed, features, strategy, jobs, &failures);
    for (auto& f : failures) result.failures.push_back(strategy.name() + "/" + f);

    const auto per_participant = score_reconstruction(imputed, features, plan);
    double pooled_sq = 0.0;
    ReconstructionResult::Pooled pooled;
    pooled.strategy = strategy.name();
    for (std::size_t i = 0; i < per_participant.size(); ++i) {
      const auto& p = per_participant[i];
      ReconstructionEntry entry;
      entry.participant_id = p.participant_id;
      entry.strategy = strategy.name();
      entry.r_rmse = p.r_rmse;
      entry.n_removed = p.n_removed;
      entry.n_scored = p.n_scored;
      entry.n_declined = p.n_declined;
      entry.availability_pct = avail.per_participant_pct[i].second;
      result.entries.push_back(std::move(entry));
      if (p.r_rmse) pooled_sq += *p.r_rmse * *p.r_rmse * static_cast<double>(p.n_scored);
      pooled.n_scored += p.n_scored;
      pooled.n_declined += p.n_declined;
    }
    if (pooled.n_scored > 0)
      pooled.r_rmse = std::sqrt(pooled_sq / static_cast<double>(pooled.n_scored));
    result.pooled.push_back(std::move(pooled));
  }
  return result;
}

std::vector<WeeklyRow> aggregate_weeks(const ParticipantSeries& series,
                                       const Eigen::MatrixXd& completed,
                                       week_aggregation aggregation) {
  if (completed.rows() != static_cast<Eigen::Index>(series.rows.size()))
    raise(errc::invalid_input, "completed matrix does not match the series row count");
  std::map<int, std::vector<Eigen::Index>> weeks;
  for (std::size_t i = 0; i < series.rows.size(); ++i)
    weeks[series.rows[i].week].push_back(static_cast<Eigen::Index>(i));

  const auto p = static_cast<std::size_t>(completed.cols());
  std::vector<WeeklyRow> out;
  out.reserve(weeks.size());
  for (const auto& [week, rows] : weeks) {
    WeeklyRow w;
    w.participant_id = series.participant_id;
    w.week = week;
    w.features.assign(p, kNaN);
    for (std::size_t j = 0; j < p; ++j) {
      std::vector<double> vals;
      for (const Eigen::Index r : rows) {
        const double v = completed(r, static_cast<Eigen::Index>(j));
        if (!std::isnan(v)) vals.push_back(v);
      }
      if (vals.empty()) continue;
      if (aggregation == week_aggregation::mean) {
        double sum = 0.0;
        for (const double v : vals) sum += v;
        w.features[j] = sum / static_cast<double>(vals.size());
      } else {
        w.features[j] = median_of(std::move(vals));
      }
    }
    for (const Eigen::Index r : rows) {
      const auto& label = series.rows[static_cast<std::size_t>(r)].label;
      if (label) w.label = label;
    }
    out.push_back(std::move(w));
  }
  return out;
}

namespace {

/// Residual Missing after imputation and aggregation is filled with the
/// train-side weekly feature median (0 when a feature has no train values).
void fill_residual(std::vector<WeeklyRow>& train, std::vector<WeeklyRow>& test) {
  if (train.empty()) return;
  const std::size_t p = train.front().features.size();
  std::vector<double> med(p, 0.0);
  for (std::size_t j = 0; j < p; ++j) {
    std::vector<double> vals;
    for (const auto& r : train)
      if (!std::isnan(r.features[j])) vals.push_back(r.features[j]);
    if (!vals.empty()) {
      const double m = median_of(std::move(vals));
      med[j] = std::isnan(m) ? 0.0 : m;
    }
  }
  const auto fill = [&](std::vector<WeeklyRow>& rows) {
    for (auto& r : rows)
      for (std::size_t j = 0; j < p; ++j)
        if (std::isnan(r.features[j])) r.features[j] = med[j];
  };
  fill(train);
  fill(test);
}

std::map<int, int> weekly_labels(const ParticipantSeries& s) {
  std::map<int, int> labels;
  for (const auto& r : s.rows)
    if (r.label) labels[r.week] = *r.label;
  return labels;
}

struct SplitPrep {
  bool included = false;
  std::string reason;
  ParticipantSeries train, test;
  std::set<int> train_weeks;
};

SplitPrep prepare_split(const ParticipantSeries& part, double train_fraction) {
  SplitPrep prep;
  if (part.rows.empty()) {
    prep.reason = "no rows";
    return prep;
  }
  try {
    auto [train, test] = chronological_split(part, train_fraction);
    prep.train = std::move(train);
    prep.test = std::move(test);
  } catch (const error& e) {
    if (e.code() == errc::split_infeasible) {
      prep.reason = "split infeasible";
      return prep;
    }
    throw;
  }
  for (const auto& r : prep.train.rows) prep.train_weeks.insert(r.week);
  const auto train_labels = weekly_labels(prep.train);
  if (train_labels.empty()) {
    prep.reason = "no labeled train weeks";
    return prep;
  }
  int n0 = 0, n1 = 0;
  for (const auto& [week, label] : train_labels) (label == 0 ? n0 : n1) += 1;
  if (n0 == 0 || n1 == 0) {
    prep.reason = "single-class train labels";
    return prep;
  }
  if (weekly_labels(prep.test).empty()) {
    prep.reason = "no labeled test weeks";
    return prep;
  }
  prep.included = true;
  return prep;
}

struct ParticipantWeekly {
  std::vector<WeeklyRow> train, test;
};

ParticipantWeekly complete_and_aggregate(const ParticipantSeries& part, const SplitPrep& prep,
                                         const std::vector<std::size_t>& cols,
                                         const StrategySpec& strategy, leakage_mode mode,
                                         week_aggregation aggregation) {
  StrategySpec local = strategy;
  local.seed = seed_stream(strategy.seed, part.participant_id);
  ParticipantWeekly weekly;
  if (mode == leakage_mode::full) {
    const Eigen::MatrixXd m = to_matrix(part, cols);
    Eigen::MatrixXd completed;
    try {
      auto imputer = make_imputer(local);
      imputer->fit(m);
      completed = imputer->transform_fitted();
    } catch (const error& e) {
      log_warn("prediction: " + local.name() + "/" + part.participant_id +
               " passes through un-imputed: " + e.what());
      completed = m;
    }
    for (auto& row : aggregate_weeks(part, completed, aggregation)) {
      if (prep.train_weeks.count(row.week))
        weekly.train.push_back(std::move(row));
      else
        weekly.test.push_back(std::move(row));
    }
  } else {
    const Eigen::MatrixXd m_train = to_matrix(prep.train, cols);
    const Eigen::MatrixXd m_test = to_matrix(prep.test, cols);
    Eigen::MatrixXd c_train, c_test;
    try {
      auto imputer = make_imputer(local);
      imputer->fit(m_train);
      c_train = imputer->transform_fitted();
      c_test = imputer->transform(m_test);
    } catch (const error& e) {
      log_warn("prediction: " + local.name() + "/" + part.participant_id +
               " passes through un-imputed: " + e.what());
      c_train = m_train;
      c_test = m_test;
    }
    weekly.train = aggregate_weeks(prep.train, c_train, aggregation);
    weekly.test = aggregate_weeks(prep.test, c_test, aggregation);
  }
  fill_residual(weekly.train, weekly.test);
  return weekly;
}

std::pair<Eigen::MatrixXd, std::vector<int>> labeled_matrix(const std::vector<WeeklyRow>& rows,
                                                            std::size_t p) {
  std::vector<const WeeklyRow*> keep;
  for (const auto& r : rows)
    if (r.label) keep.push_back(&r);
  Eigen::MatrixXd x(static_cast<Eigen::Index>(keep.size()), static_cast<Eigen::Index>(p));
  std::vector<int> y(keep.size());
  for (std::size_t i = 0; i < keep.size(); ++i) {
    y[i] = *keep[i]->label;
    for (std::size_t j = 0; j < p; ++j)
      x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = keep[i]->features[j];
  }
  return {std::move(x), std::move(y)};
}

std::optional<double> safe_balanced_accuracy(const std::vector<int>& preds,
                                             const std::vector<int>& labels) {
  if (preds.empty()) return std::nullopt;
  try {
    return balanced_accuracy(preds, labels);
  } catch (const error& e) {
    if (e.code() == errc::undefined_metric) return std::nullopt;
    throw;
  }
}

}  // namespace

PredictionResult run_prediction(const LongitudinalDataset& ds, const FeatureSet& features,
                                const std::vector<StrategySpec>& strategies,
                                const PredictorSpec& predictor, leakage_mode mode,
                                double train_fraction, week_aggregation aggregation,
                                unsigned jobs) {
  if (strategies.empty()) raise(errc::bad_config, "no strategies given");
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    raise(errc::bad_config, "train_fraction must lie in (0, 1)");
  const auto cols = feature_indices(ds, features);
  const std::size_t p = cols.size();

  PredictionResult result;
  result.mode = mode;
  result.predictor_name = predictor.name();

  const std::size_t n = ds.participants.size();
  std::vector<SplitPrep> preps(n);
  parallel_for(n, jobs,
               [&](std::size_t i) { preps[i] = prepare_split(ds.participants[i], train_fraction); });

  std::vector<std::size_t> included;
  for (std::size_t i = 0; i < n; ++i) {
    if (preps[i].included)
      included.push_back(i);
    else
      result.excluded.emplace_back(ds.participants[i].participant_id, preps[i].reason);
  }
  if (included.empty()) raise(errc::invalid_input, "no participant is eligible for prediction");

  for (const auto& strategy : strategies) {
    PredictionStrategyResult sr;
    sr.strategy = strategy.name();
    sr.participant_ids.resize(included.size());
    sr.per_participant_accuracy.assign(included.size(), 0.0);
    for (std::size_t k = 0; k < included.size(); ++k)
      sr.participant_ids[k] = ds.participants[included[k]].participant_id;

    std::vector<ParticipantWeekly> weekly(included.size());
    parallel_for(included.size(), jobs, [&](std::size_t k) {
      const std::size_t i = included[k];
      weekly[k] = complete_and_aggregate(ds.participants[i], preps[i], cols, strategy, mode,
                                         aggregation);
    });

    std::vector<double> pooled_scores;
    std::vector<int> pooled_preds, pooled_labels;
    if (predictor.kind == predictor_kind::baseline_logistic) {
      std::vector<std::vector<double>> scores_k(included.size());
      std::vector<std::vector<int>> preds_k(included.size()), labels_k(included.size());
      parallel_for(included.size(), jobs, [&](std::size_t k) {
        auto [train_x, train_y] = labeled_matrix(weekly[k].train, p);
        auto [test_x, test_y] = labeled_matrix(weekly[k].test, p);
        auto [scores, preds] = fit_predict_baseline(train_x, train_y, test_x, predictor);
        scores_k[k] = std::move(scores);
        preds_k[k] = std::move(preds);
        labels_k[k] = std::move(test_y);
      });
      for (std::size_t k = 0; k < included.size(); ++k) {
        std::size_t correct = 0;
        for (std::size_t t = 0; t < labels_k[k].size(); ++t) {
          pooled_scores.push_back(scores_k[k][t]);
          pooled_preds.push_back(preds_k[k][t]);
          pooled_labels.push_back(labels_k[k][t]);
          if (preds_k[k][t] == labels_k[k][t]) ++correct;
        }
        sr.per_participant_accuracy[k] =
            labels_k[k].empty() ? 0.0
                                : static_cast<double>(correct) /
                                      static_cast<double>(labels_k[k].size());
      }
    } else {
      std::vector<WeeklyRow> train_rows, test_rows;
      std::vector<std::pair<std::size_t, int>> owners;  // (included slot, label)
      for (std::size_t k = 0; k < included.size(); ++k) {
        for (const auto& r : weekly[k].train)
          if (r.label) train_rows.push_back(r);
        for (const auto& r : weekly[k].test)
          if (r.label) {
            owners.emplace_back(k, *r.label);
            test_rows.push_back(r);
          }
      }
      const auto scores = run_external_predictor(train_rows, test_rows, features.names, predictor);
      std::vector<std::size_t> correct(included.size(), 0), total(included.size(), 0);
      for (std::size_t t = 0; t < test_rows.size(); ++t) {
        const int pred = scores[t] >= 0.5 ? 1 : 0;
        const auto [k, label] = owners[t];
        pooled_scores.push_back(scores[t]);
        pooled_preds.push_back(pred);
        pooled_labels.push_back(label);
        ++total[k];
        if (pred == label) ++correct[k];
      }
      for (std::size_t k = 0; k < included.size(); ++k)
        sr.per_participant_accuracy[k] =
            total[k] == 0 ? 0.0
                          : static_cast<double>(correct[k]) / static_cast<double>(total[k]);
    }

    sr.pooled_auroc = auroc(pooled_scores, pooled_labels);
    sr.pooled_balanced_accuracy = safe_balanced_accuracy(pooled_preds, pooled_labels);
    result.strategies.push_back(std::move(sr));
  }
  return result;
}

McarSweep run_mcar_sweep(const LongitudinalDataset& ds, const FeatureSet& features, double alpha,
                         unsigned jobs) {
  if (!(alpha > 0.0 && alpha < 1.0)) raise(errc::bad_config, "alpha must lie in (0, 1)");
  const auto cols = feature_indices(ds, features);
  McarSweep sweep;
  sweep.alpha = alpha;
  const std::size_t n = ds.participants.size();
  sweep.results.resize(n);
  sweep.reject_bh.assign(n, 0);
  parallel_for(n, jobs, [&](std::size_t i) {
    const auto& part = ds.participants[i];
    McarTestResult res;
    if (part.rows.empty()) {
      res.skipped = true;
      res.skip_reason = "no rows";
    } else {
      res = little_mcar_test(to_matrix(part, cols));
    }
    res.participant_id = part.participant_id;
    sweep.results[i] = std::move(res);
  });

  std::vector<double> p_values;
  std::vector<std::size_t> tested;
  for (std::size_t i = 0; i < n; ++i)
    if (!sweep.results[i].skipped) {
      p_values.push_back(sweep.results[i].p_value);
      tested.push_back(i);
    }
  if (!p_values.empty()) {
    const auto bh = benjamini_hochberg(p_values, alpha);
    for (std::size_t k = 0; k < tested.size(); ++k)
      sweep.reject_bh[tested[k]] = bh.reject[k] ? 1 : 0;
  }
  return sweep;
}

namespace {

struct RtWeekItem {
  int week = 0;
  std::vector<WeeklyRow> train;  // residual-filled history weekly rows
  WeeklyRow current;             // residual-filled week-n row, label present
};

ParticipantSeries rows_in_weeks(const ParticipantSeries& part, int lo, int hi) {
  ParticipantSeries out;
  out.participant_id = part.participant_id;
  for (const auto& r : part.rows)
    if (r.week >= lo && r.week <= hi) out.rows.push_back(r);
  return out;
}

}  // namespace

RealtimeSchedule run_realtime(const LongitudinalDataset& ds, const FeatureSet& features,
                              const std::vector<StrategySpec>& strategies,
                              const PredictorSpec& predictor, week_aggregation aggregation,
                              unsigned jobs) {
  if (strategies.empty()) raise(errc::bad_config, "no strategies given");
  const auto cols = feature_indices(ds, features);
  const std::size_t p = cols.size();

  RealtimeSchedule sched;
  int max_week = 0;
  for (const auto& part : ds.participants)
    for (const auto& r : part.rows) max_week = std::max(max_week, r.week);
  sched.start_week = 3;
  sched.end_week = std::min(10, max_week);
  if (sched.end_week < sched.start_week)
    raise(errc::invalid_input, "real-time evaluation needs data through week 3");

  std::vector<std::size_t> eligible;
  for (std::size_t i = 0; i < ds.participants.size(); ++i) {
    const auto labels = weekly_labels(ds.participants[i]);
    if (labels.size() >= 3)
      eligible.push_back(i);
    else
      sched.skipped.emplace_back(ds.participants[i].participant_id, "fewer than 3 labeled weeks");
  }

  // Feasibility per (participant, week) depends only on labels, so every
  // strategy evaluates the identical participant-week set.
  std::vector<std::vector<int>> feasible(eligible.size());
  for (std::size_t k = 0; k < eligible.size(); ++k) {
    const auto& part = ds.participants[eligible[k]];
    const auto labels = weekly_labels(part);
    for (int week = sched.start_week; week <= sched.end_week; ++week) {
      bool has_rows = false;
      for (const auto& r : part.rows)
        if (r.week == week) {
          has_rows = true;
          break;
        }
      const std::string tag = "week " + std::to_string(week);
      if (!has_rows) {
        sched.skipped.emplace_back(part.participant_id, tag + ": no data");
        continue;
      }
      if (!labels.count(week)) {
        sched.skipped.emplace_back(part.participant_id, tag + ": unlabeled");
        continue;
      }
      int n0 = 0, n1 = 0;
      for (const auto& [w, label] : labels)
        if (w < week) (label == 0 ? n0 : n1) += 1;
      if (n0 + n1 == 0) {
        sched.skipped.emplace_back(part.participant_id, tag + ": no labeled history weeks");
        continue;
      }
      if (n0 == 0 || n1 == 0) {
        sched.skipped.emplace_back(part.participant_id, tag + ": single-class history labels");
        continue;
      }
      feasible[k].push_back(week);
    }
  }

  for (const auto& strategy : strategies) {
    std::vector<std::vector<RtWeekItem>> items(eligible.size());
    parallel_for(eligible.size(), jobs, [&](std::size_t k) {
      const auto& part = ds.participants[eligible[k]];
      StrategySpec local = strategy;
      local.seed = seed_stream(strategy.seed, part.participant_id);
      const auto labels = weekly_labels(part);
      for (const int week : feasible[k]) {
        const ParticipantSeries history = rows_in_weeks(part, 1, week - 1);
        const ParticipantSeries current = rows_in_weeks(part, week, week);
        const Eigen::MatrixXd m_hist = to_matrix(history, cols);
        const Eigen::MatrixXd m_cur = to_matrix(current, cols);
        Eigen::MatrixXd c_hist, c_cur;
        try {
          auto imputer = make_imputer(local);
          imputer->fit(m_hist);
          c_hist = imputer->transform_fitted();
          c_cur = imputer->transform(m_cur);
        } catch (const error& e) {
          log_warn("realtime: " + local.name() + "/" + part.participant_id + " week " +
                   std::to_string(week) + " passes through un-imputed: " + e.what());
          c_hist = m_hist;
          c_cur = m_cur;
        }
        RtWeekItem item;
        item.week = week;
        item.train = aggregate_weeks(history, c_hist, aggregation);
        auto current_rows = aggregate_weeks(current, c_cur, aggregation);
        item.current = std::move(current_rows.front());
        item.current.label = labels.at(week);
        std::vector<WeeklyRow> current_only{item.current};
        fill_residual(item.train, current_only);
        item.current = std::move(current_only.front());
        items[k].push_back(std::move(item));
      }
    });

    // One (score, label) per feasible participant-week, pooled per week.
    std::map<int, std::vector<std::pair<double, int>>> by_week;
    if (predictor.kind == predictor_kind::baseline_logistic) {
      std::vector<std::vector<std::pair<int, double>>> scored(eligible.size());
      parallel_for(eligible.size(), jobs, [&](std::size_t k) {
        for (const auto& item : items[k]) {
          auto [train_x, train_y] = labeled_matrix(item.train, p);
          Eigen::MatrixXd test_x(1, static_cast<Eigen::Index>(p));
          for (std::size_t j = 0; j < p; ++j)
            test_x(0, static_cast<Eigen::Index>(j)) = item.current.features[j];
          auto [scores, preds] = fit_predict_baseline(train_x, train_y, test_x, predictor);
          (void)preds;
          scored[k].emplace_back(item.week, scores[0]);
        }
      });
      for (std::size_t k = 0; k < eligible.size(); ++k)
        for (std::size_t t = 0; t < scored[k].size(); ++t)
          by_week[scored[k][t].first].emplace_back(scored[k][t].second,
                                                   *items[k][t].current.label);
    } else {
      for (int week = sched.start_week; week <= sched.end_week; ++week) {
        std::vector<WeeklyRow> train_rows, test_rows;
        std::vector<int> labels;
        for (std::size_t k = 0; k < eligible.size(); ++k)
          for (const auto& item : items[k]) {
            if (item.week != week) continue;
            for (const auto& r : item.train)
              if (r.label) train_rows.push_back(r);
            test_rows.push_back(item.current);
            labels.push_back(*item.current.label);
          }
        if (test_rows.empty()) continue;
        const auto scores =
            run_external_predictor(train_rows, test_rows, features.names, predictor);
        for (std::size_t t = 0; t < scores.size(); ++t)
          by_week[week].emplace_back(scores[t], labels[t]);
      }
    }

    for (int week = sched.start_week; week <= sched.end_week; ++week) {
      RealtimeWeekMetric metric;
      metric.week = week;
      metric.strategy = strategy.name();
      const auto it = by_week.find(week);
      if (it != by_week.end() && !it->second.empty()) {
        std::vector<double> scores;
        std::vector<int> preds, labels;
        for (const auto& [score, label] : it->second) {
          scores.push_back(score);
          preds.push_back(score >= 0.5 ? 1 : 0);
          labels.push_back(label);
        }
        metric.n_predictions = scores.size();
        metric.auroc = auroc(scores, labels);
        metric.balanced_accuracy = safe_balanced_accuracy(preds, labels);
      }
      sched.per_week.push_back(std::move(metric));
    }
  }
  return sched;
}

}  // namespace imputelab
