#include "imputelab/imputers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "imputelab/error.hpp"
#include "imputelab/log.hpp"
#include "imputelab/matrixutil.hpp"

namespace imputelab {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Eigen::MatrixXd restore_observed(const Eigen::MatrixXd& original, Eigen::MatrixXd completed) {
  for (Eigen::Index i = 0; i < original.rows(); ++i)
    for (Eigen::Index j = 0; j < original.cols(); ++j)
      if (!std::isnan(original(i, j))) completed(i, j) = original(i, j);
  return completed;
}

}  // namespace

std::string to_string(strategy_kind k) {
  switch (k) {
    case strategy_kind::median: return "median";
    case strategy_kind::windowed_median: return "windowed_median";
    case strategy_kind::globem_c_proxy: return "globem_c_proxy";
    case strategy_kind::simple_knn: return "simple_knn";
    case strategy_kind::bounded_knn: return "bounded_knn";
    case strategy_kind::mice: return "mice";
    case strategy_kind::soft_impute: return "soft_impute";
    case strategy_kind::autoencoder: return "autoencoder";
  }
  return "?";
}

strategy_kind strategy_kind_from_string(const std::string& s) {
  if (s == "median") return strategy_kind::median;
  if (s == "windowed_median") return strategy_kind::windowed_median;
  if (s == "globem_c_proxy") return strategy_kind::globem_c_proxy;
  if (s == "simple_knn") return strategy_kind::simple_knn;
  if (s == "bounded_knn") return strategy_kind::bounded_knn;
  if (s == "mice") return strategy_kind::mice;
  if (s == "soft_impute") return strategy_kind::soft_impute;
  if (s == "autoencoder") return strategy_kind::autoencoder;
  raise(errc::bad_config, "unknown strategy kind '" + s + "'");
}

std::string StrategySpec::name() const {
  if (!display_name.empty()) return display_name;
  if (kind == strategy_kind::autoencoder)
    return ae.initial_imputer == ae_initial::median ? "autoencoder_median" : "autoencoder_knn";
  return to_string(kind);
}

// ---------------------------------------------------------------- median

void MedianImputer::fit(const Eigen::MatrixXd& m) {
  fitted_ = m;
  medians_ = col_medians(m);
}

Eigen::MatrixXd MedianImputer::transform(const Eigen::MatrixXd& m) const {
  Eigen::MatrixXd out = m;
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    const double med = medians_[static_cast<std::size_t>(j)];
    if (std::isnan(med)) continue;
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      if (std::isnan(out(i, j))) out(i, j) = med;
  }
  return restore_observed(m, std::move(out));
}

Eigen::MatrixXd MedianImputer::transform_fitted() const { return transform(fitted_); }

// -------------------------------------------------------- windowed median

namespace {

Eigen::MatrixXd complete_blocks(const Eigen::MatrixXd& m, int window) {
  Eigen::MatrixXd out = m;
  const Eigen::Index n = m.rows();
  for (Eigen::Index start = 0; start < n; start += window) {
    const Eigen::Index stop = std::min(n, start + window);
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      std::vector<double> vals;
      for (Eigen::Index i = start; i < stop; ++i)
        if (!std::isnan(m(i, j))) vals.push_back(m(i, j));
      const double fill = vals.empty() ? 0.0 : median_of(std::move(vals));
      for (Eigen::Index i = start; i < stop; ++i)
        if (std::isnan(out(i, j))) out(i, j) = fill;
    }
  }
  return out;
}

}  // namespace

void WindowedMedianImputer::fit(const Eigen::MatrixXd& m) {
  if (window_ < 1) raise(errc::bad_config, "window must be >= 1");
  fitted_ = m;
}

Eigen::MatrixXd WindowedMedianImputer::transform_fitted() const {
  return complete_blocks(fitted_, window_);
}

Eigen::MatrixXd WindowedMedianImputer::transform(const Eigen::MatrixXd& m) const {
  return complete_blocks(m, window_);
}

// -------------------------------------------------------- globem-c proxy

void GlobemCProxyImputer::fit(const Eigen::MatrixXd& m) {
  fitted_ = m;
  dropped_rows_.clear();
  dropped_cols_.clear();
  const auto n = static_cast<double>(m.rows());
  std::vector<bool> col_kept(static_cast<std::size_t>(m.cols()), false);
  std::vector<Eigen::Index> kept_cols;
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    const auto missing = n - static_cast<double>(col_observed_count(m, j));
    if (n > 0 && missing / n > col_thresh_) {
      dropped_cols_.push_back(j);
    } else {
      col_kept[static_cast<std::size_t>(j)] = true;
      kept_cols.push_back(j);
    }
  }
  std::vector<bool> row_kept(static_cast<std::size_t>(m.rows()), false);
  std::vector<Eigen::Index> kept_rows;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    std::size_t missing = 0;
    for (Eigen::Index j : kept_cols)
      if (std::isnan(m(i, j))) ++missing;
    if (!kept_cols.empty() &&
        static_cast<double>(missing) / static_cast<double>(kept_cols.size()) > row_thresh_) {
      dropped_rows_.push_back(i);
    } else {
      row_kept[static_cast<std::size_t>(i)] = true;
      kept_rows.push_back(i);
    }
  }
  if (kept_cols.empty() || kept_rows.empty())
    raise(errc::all_data_dropped, "no rows or columns survive missingness filtering");

  means_.assign(static_cast<std::size_t>(m.cols()), kNaN);
  for (Eigen::Index j : kept_cols) {
    double sum = 0.0;
    std::size_t cnt = 0;
    for (Eigen::Index i : kept_rows)
      if (!std::isnan(m(i, j))) {
        sum += m(i, j);
        ++cnt;
      }
    if (cnt > 0) means_[static_cast<std::size_t>(j)] = sum / static_cast<double>(cnt);
  }
}

Eigen::MatrixXd GlobemCProxyImputer::transform(const Eigen::MatrixXd& m) const {
  Eigen::MatrixXd out = m;
  std::vector<Eigen::Index> usable_cols;
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    if (!std::isnan(means_[static_cast<std::size_t>(j)])) usable_cols.push_back(j);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    std::size_t missing = 0;
    for (Eigen::Index j : usable_cols)
      if (std::isnan(m(i, j))) ++missing;
    if (usable_cols.empty() ||
        static_cast<double>(missing) / static_cast<double>(usable_cols.size()) > row_thresh_)
      continue;
    for (Eigen::Index j : usable_cols)
      if (std::isnan(out(i, j))) out(i, j) = means_[static_cast<std::size_t>(j)];
  }
  return restore_observed(m, std::move(out));
}

Eigen::MatrixXd GlobemCProxyImputer::transform_fitted() const {
  Eigen::MatrixXd out = fitted_;
  std::vector<bool> row_dropped(static_cast<std::size_t>(fitted_.rows()), false);
  for (Eigen::Index i : dropped_rows_) row_dropped[static_cast<std::size_t>(i)] = true;
  for (Eigen::Index i = 0; i < fitted_.rows(); ++i) {
    if (row_dropped[static_cast<std::size_t>(i)]) continue;
    for (Eigen::Index j = 0; j < fitted_.cols(); ++j) {
      const double mean = means_[static_cast<std::size_t>(j)];
      if (std::isnan(out(i, j)) && !std::isnan(mean)) out(i, j) = mean;
    }
  }
  return restore_observed(fitted_, std::move(out));
}

// ------------------------------------------------------------------- kNN

namespace {

struct KnnParams {
  const Eigen::MatrixXd* fit = nullptr;          // values used for imputation
  const Eigen::MatrixXd* fit_distance = nullptr;  // values used for distances
  const std::vector<double>* stddev = nullptr;
  int max_neighbors = 5;
  int min_neighbors = 0;  // below this, decline to impute
  const std::vector<double>* fallback_medians = nullptr;
};

/// query_dist holds the query row in the same (possibly clipped) domain as
/// fit_distance. A row is never a candidate for its own missing cell: any
/// candidate must have feature f observed, which the querying row does not.
double knn_impute_cell(const KnnParams& prm, const Eigen::RowVectorXd& query_dist,
                       Eigen::Index f) {
  const Eigen::MatrixXd& fit = *prm.fit;
  const Eigen::MatrixXd& fit_dist = *prm.fit_distance;
  const auto p = static_cast<double>(fit.cols());
  std::vector<std::pair<double, Eigen::Index>> candidates;
  for (Eigen::Index i = 0; i < fit.rows(); ++i) {
    if (std::isnan(fit(i, f))) continue;
    double acc = 0.0;
    int n_co = 0;
    for (Eigen::Index g = 0; g < fit.cols(); ++g) {
      if (std::isnan(query_dist(g)) || std::isnan(fit_dist(i, g))) continue;
      const double d = (query_dist(g) - fit_dist(i, g)) / (*prm.stddev)[static_cast<std::size_t>(g)];
      acc += d * d;
      ++n_co;
    }
    if (n_co == 0) continue;
    candidates.emplace_back(std::sqrt(acc * p / static_cast<double>(n_co)), i);
  }
  if (static_cast<int>(candidates.size()) < std::max(prm.min_neighbors, 1)) {
    if (prm.fallback_medians) return (*prm.fallback_medians)[static_cast<std::size_t>(f)];
    return kNaN;
  }
  std::sort(candidates.begin(), candidates.end());
  const auto take = std::min<std::size_t>(candidates.size(),
                                          static_cast<std::size_t>(prm.max_neighbors));
  double sum = 0.0;
  for (std::size_t t = 0; t < take; ++t) sum += fit(candidates[t].second, f);
  return sum / static_cast<double>(take);
}

Eigen::MatrixXd knn_complete(const KnnParams& prm, const Eigen::MatrixXd& query,
                             const Eigen::MatrixXd& query_dist) {
  Eigen::MatrixXd out = query;
  for (Eigen::Index r = 0; r < query.rows(); ++r) {
    const Eigen::RowVectorXd qd = query_dist.row(r);
    for (Eigen::Index f = 0; f < query.cols(); ++f)
      if (std::isnan(query(r, f))) out(r, f) = knn_impute_cell(prm, qd, f);
  }
  return restore_observed(query, std::move(out));
}

}  // namespace

void SimpleKnnImputer::fit(const Eigen::MatrixXd& m) {
  if (k_ < 1) raise(errc::bad_config, "k must be >= 1");
  fitted_ = m;
  const auto scale = observed_column_scale(m);
  mean_ = scale.mean;
  stddev_ = scale.stddev;
  medians_ = col_medians(m);
}

Eigen::MatrixXd SimpleKnnImputer::transform(const Eigen::MatrixXd& m) const {
  KnnParams prm;
  prm.fit = &fitted_;
  prm.fit_distance = &fitted_;
  prm.stddev = &stddev_;
  prm.max_neighbors = k_;
  prm.fallback_medians = &medians_;
  return knn_complete(prm, m, m);
}

Eigen::MatrixXd SimpleKnnImputer::transform_fitted() const { return transform(fitted_); }

void BoundedKnnImputer::fit(const Eigen::MatrixXd& m) {
  if (cfg_.l < 1 || cfg_.u < cfg_.l) raise(errc::bad_config, "bounded kNN needs 1 <= l <= u");
  fitted_ = m;
  const auto scale = observed_column_scale(m);
  mean_ = scale.mean;
  stddev_ = scale.stddev;
  clip_lo_.assign(static_cast<std::size_t>(m.cols()), kNaN);
  clip_hi_.assign(static_cast<std::size_t>(m.cols()), kNaN);
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    std::vector<double> vals;
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      if (!std::isnan(m(i, j))) vals.push_back(m(i, j));
    if (vals.empty()) continue;
    clip_lo_[static_cast<std::size_t>(j)] = percentile_of(vals, cfg_.clip_lo_pct);
    clip_hi_[static_cast<std::size_t>(j)] = percentile_of(std::move(vals), cfg_.clip_hi_pct);
  }
  clipped_ = fitted_;
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    const double lo = clip_lo_[static_cast<std::size_t>(j)];
    const double hi = clip_hi_[static_cast<std::size_t>(j)];
    if (std::isnan(lo)) continue;
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      if (!std::isnan(clipped_(i, j))) clipped_(i, j) = std::clamp(clipped_(i, j), lo, hi);
  }
}

Eigen::MatrixXd BoundedKnnImputer::transform(const Eigen::MatrixXd& m) const {
  Eigen::MatrixXd query_dist = m;
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    const double lo = clip_lo_[static_cast<std::size_t>(j)];
    const double hi = clip_hi_[static_cast<std::size_t>(j)];
    if (std::isnan(lo)) continue;
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      if (!std::isnan(query_dist(i, j))) query_dist(i, j) = std::clamp(query_dist(i, j), lo, hi);
  }
  KnnParams prm;
  prm.fit = &fitted_;
  prm.fit_distance = &clipped_;
  prm.stddev = &stddev_;
  prm.max_neighbors = cfg_.u;
  prm.min_neighbors = cfg_.l;
  return knn_complete(prm, m, query_dist);
}

Eigen::MatrixXd BoundedKnnImputer::transform_fitted() const {
  KnnParams prm;
  prm.fit = &fitted_;
  prm.fit_distance = &clipped_;
  prm.stddev = &stddev_;
  prm.max_neighbors = cfg_.u;
  prm.min_neighbors = cfg_.l;
  return knn_complete(prm, fitted_, clipped_);
}

// ------------------------------------------------------------------ MICE

void MiceImputer::fit(const Eigen::MatrixXd& m) {
  if (cfg_.n_iterations < 1 || cfg_.ridge_lambda < 0.0)
    raise(errc::bad_config, "mice needs n_iterations >= 1 and ridge_lambda >= 0");
  fitted_ = m;
  rounds_.clear();
  model_cols_.clear();
  whole_median_fallback_ = false;
  means_.assign(static_cast<std::size_t>(m.cols()), kNaN);
  medians_ = col_medians(m);
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    double sum = 0.0;
    std::size_t cnt = 0;
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      if (!std::isnan(m(i, j))) {
        sum += m(i, j);
        ++cnt;
      }
    if (cnt > 0) {
      means_[static_cast<std::size_t>(j)] = sum / static_cast<double>(cnt);
      model_cols_.push_back(j);
    }
  }
  if (model_cols_.size() < 2) {
    whole_median_fallback_ = true;
    MedianImputer med;
    med.fit(m);
    completed_ = med.transform_fitted();
    return;
  }

  Eigen::MatrixXd w = m;
  for (Eigen::Index j : model_cols_)
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      if (std::isnan(w(i, j))) w(i, j) = means_[static_cast<std::size_t>(j)];

  const std::size_t n_slots = model_cols_.size();
  for (int round = 0; round < cfg_.n_iterations; ++round) {
    std::vector<RoundModel> models(n_slots);
    for (std::size_t s = 0; s < n_slots; ++s) {
      const Eigen::Index f = model_cols_[s];
      std::vector<Eigen::Index> obs_rows, mis_rows;
      for (Eigen::Index i = 0; i < m.rows(); ++i)
        (std::isnan(m(i, f)) ? mis_rows : obs_rows).push_back(i);
      const auto n_reg = static_cast<Eigen::Index>(n_slots) - 1;
      Eigen::MatrixXd x(static_cast<Eigen::Index>(obs_rows.size()), n_reg + 1);
      Eigen::VectorXd y(static_cast<Eigen::Index>(obs_rows.size()));
      for (std::size_t a = 0; a < obs_rows.size(); ++a) {
        x(static_cast<Eigen::Index>(a), 0) = 1.0;
        Eigen::Index col = 1;
        for (std::size_t t = 0; t < n_slots; ++t) {
          if (t == s) continue;
          x(static_cast<Eigen::Index>(a), col++) = w(obs_rows[a], model_cols_[t]);
        }
        y(static_cast<Eigen::Index>(a)) = m(obs_rows[a], f);
      }
      Eigen::MatrixXd gram = x.transpose() * x;
      for (Eigen::Index d = 1; d <= n_reg; ++d) gram(d, d) += cfg_.ridge_lambda;
      const Eigen::VectorXd beta = Eigen::LDLT<Eigen::MatrixXd>(gram).solve(x.transpose() * y);
      if (!beta.allFinite()) {
        log_warn("mice: singular system for feature column " + std::to_string(f) +
                 ", using median");
        models[s].median_fallback = true;
        for (Eigen::Index i : mis_rows) w(i, f) = medians_[static_cast<std::size_t>(f)];
        continue;
      }
      models[s].beta = beta;
      for (Eigen::Index i : mis_rows) {
        double pred = beta(0);
        Eigen::Index col = 1;
        for (std::size_t t = 0; t < n_slots; ++t) {
          if (t == s) continue;
          pred += beta(col++) * w(i, model_cols_[t]);
        }
        w(i, f) = pred;
      }
    }
    rounds_.push_back(std::move(models));
  }
  completed_ = restore_observed(m, std::move(w));
}

Eigen::MatrixXd MiceImputer::replay(const Eigen::MatrixXd& m) const {
  if (whole_median_fallback_) {
    Eigen::MatrixXd out = m;
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      const double med = j < static_cast<Eigen::Index>(medians_.size())
                             ? medians_[static_cast<std::size_t>(j)]
                             : kNaN;
      if (std::isnan(med)) continue;
      for (Eigen::Index i = 0; i < m.rows(); ++i)
        if (std::isnan(out(i, j))) out(i, j) = med;
    }
    return restore_observed(m, std::move(out));
  }
  Eigen::MatrixXd w = m;
  for (Eigen::Index j : model_cols_)
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      if (std::isnan(w(i, j))) w(i, j) = means_[static_cast<std::size_t>(j)];
  const std::size_t n_slots = model_cols_.size();
  for (const auto& models : rounds_) {
    for (std::size_t s = 0; s < n_slots; ++s) {
      const Eigen::Index f = model_cols_[s];
      for (Eigen::Index i = 0; i < m.rows(); ++i) {
        if (!std::isnan(m(i, f))) continue;
        if (models[s].median_fallback) {
          w(i, f) = medians_[static_cast<std::size_t>(f)];
          continue;
        }
        double pred = models[s].beta(0);
        Eigen::Index col = 1;
        for (std::size_t t = 0; t < n_slots; ++t) {
          if (t == s) continue;
          pred += models[s].beta(col++) * w(i, model_cols_[t]);
        }
        w(i, f) = pred;
      }
    }
  }
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    if (std::find(model_cols_.begin(), model_cols_.end(), j) != model_cols_.end()) continue;
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      if (std::isnan(m(i, j))) w(i, j) = kNaN;
  }
  return restore_observed(m, std::move(w));
}

Eigen::MatrixXd MiceImputer::transform_fitted() const { return completed_; }

Eigen::MatrixXd MiceImputer::transform(const Eigen::MatrixXd& m) const { return replay(m); }

// --------------------------------------------------------------- wrappers

Eigen::MatrixXd impute_median(const Eigen::MatrixXd& m) {
  MedianImputer imp;
  imp.fit(m);
  return imp.transform_fitted();
}

Eigen::MatrixXd impute_windowed_median(const Eigen::MatrixXd& m, int window) {
  WindowedMedianImputer imp(window);
  imp.fit(m);
  return imp.transform_fitted();
}

GlobemCResult impute_globem_c_proxy(const Eigen::MatrixXd& m, double row_thresh,
                                    double col_thresh) {
  GlobemCProxyImputer imp(row_thresh, col_thresh);
  imp.fit(m);
  return GlobemCResult{imp.transform_fitted(), imp.dropped_rows(), imp.dropped_cols()};
}

Eigen::MatrixXd impute_simple_knn(const Eigen::MatrixXd& m, int k) {
  SimpleKnnImputer imp(k);
  imp.fit(m);
  return imp.transform_fitted();
}

Eigen::MatrixXd impute_bounded_knn(const Eigen::MatrixXd& m, const BoundedKnnConfig& cfg) {
  BoundedKnnImputer imp(cfg);
  imp.fit(m);
  return imp.transform_fitted();
}

Eigen::MatrixXd impute_mice(const Eigen::MatrixXd& m, const MiceConfig& cfg) {
  MiceImputer imp(cfg);
  imp.fit(m);
  return imp.transform_fitted();
}

Eigen::MatrixXd impute_soft_impute(const Eigen::MatrixXd& m, const SoftImputeConfig& cfg) {
  SoftImputeImputer imp(cfg);
  imp.fit(m);
  return imp.transform_fitted();
}

std::pair<Eigen::MatrixXd, AutoencoderModel> impute_autoencoder(const Eigen::MatrixXd& m,
                                                                const AutoencoderConfig& cfg,
                                                                std::uint64_t seed) {
  AutoencoderImputer imp(cfg, seed);
  imp.fit(m);
  return {imp.transform_fitted(), imp.model()};
}

std::unique_ptr<Imputer> make_imputer(const StrategySpec& spec) {
  switch (spec.kind) {
    case strategy_kind::median: return std::make_unique<MedianImputer>();
    case strategy_kind::windowed_median:
      return std::make_unique<WindowedMedianImputer>(spec.window);
    case strategy_kind::globem_c_proxy:
      return std::make_unique<GlobemCProxyImputer>(spec.row_thresh, spec.col_thresh);
    case strategy_kind::simple_knn: return std::make_unique<SimpleKnnImputer>(spec.knn_k);
    case strategy_kind::bounded_knn: return std::make_unique<BoundedKnnImputer>(spec.bounded);
    case strategy_kind::mice: return std::make_unique<MiceImputer>(spec.mice);
    case strategy_kind::soft_impute: return std::make_unique<SoftImputeImputer>(spec.soft);
    case strategy_kind::autoencoder:
      return std::make_unique<AutoencoderImputer>(spec.ae, spec.seed);
  }
  raise(errc::bad_config, "unknown strategy kind");
}

}  // namespace imputelab
