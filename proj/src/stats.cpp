#include "imputelab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>

#include "imputelab/error.hpp"

namespace imputelab {

namespace {

double gamma_p_series(double a, double x) {
  double term = 1.0 / a;
  double sum = term;
  double ap = a;
  for (int i = 0; i < 2000; ++i) {
    ap += 1.0;
    term *= x / ap;
    sum += term;
    if (std::abs(term) < std::abs(sum) * 1e-16) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

double gamma_q_continued_fraction(double a, double x) {
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 2000; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

}  // namespace

double chi_square_sf(double x, int df) {
  if (df < 1) raise(errc::invalid_df, "chi-square df must be >= 1");
  if (!std::isfinite(x) || x < 0.0)
    raise(errc::invalid_input, "chi-square statistic must be finite and >= 0");
  if (x == 0.0) return 1.0;
  const double a = static_cast<double>(df) / 2.0;
  const double xx = x / 2.0;
  if (xx < a + 1.0) return std::min(1.0, std::max(0.0, 1.0 - gamma_p_series(a, xx)));
  return std::min(1.0, std::max(0.0, gamma_q_continued_fraction(a, xx)));
}

BhOutcome benjamini_hochberg(const std::vector<double>& p_values, double alpha) {
  for (double p : p_values)
    if (!(p >= 0.0 && p <= 1.0)) raise(errc::invalid_input, "p-values must lie in [0,1]");
  BhOutcome out;
  out.p_values = p_values;
  out.alpha = alpha;
  out.reject.assign(p_values.size(), false);
  if (p_values.empty()) return out;
  std::vector<double> sorted = p_values;
  std::sort(sorted.begin(), sorted.end());
  const auto m = static_cast<double>(sorted.size());
  double threshold = -1.0;
  for (std::size_t i = sorted.size(); i >= 1; --i) {
    if (sorted[i - 1] <= static_cast<double>(i) / m * alpha) {
      threshold = sorted[i - 1];
      break;
    }
  }
  if (threshold >= 0.0)
    for (std::size_t i = 0; i < p_values.size(); ++i) out.reject[i] = p_values[i] <= threshold;
  return out;
}

std::optional<double> auroc(const std::vector<double>& scores, const std::vector<int>& labels) {
  if (scores.size() != labels.size())
    raise(errc::invalid_input, "scores and labels differ in length");
  if (scores.empty()) raise(errc::invalid_input, "need at least one score");
  std::size_t n_pos = 0, n_neg = 0;
  for (int l : labels) (l == 1 ? n_pos : n_neg) += 1;
  if (n_pos == 0 || n_neg == 0) return std::nullopt;

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double rank_sum_pos = 0.0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && scores[order[j + 1]] == scores[order[i]]) ++j;
    const double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (std::size_t k = i; k <= j; ++k)
      if (labels[order[k]] == 1) rank_sum_pos += avg_rank;
    i = j + 1;
  }
  const double np = static_cast<double>(n_pos), nn = static_cast<double>(n_neg);
  return (rank_sum_pos - np * (np + 1.0) / 2.0) / (np * nn);
}

double balanced_accuracy(const std::vector<int>& preds, const std::vector<int>& labels) {
  if (preds.size() != labels.size())
    raise(errc::invalid_input, "preds and labels differ in length");
  if (preds.empty()) raise(errc::invalid_input, "need at least one prediction");
  std::size_t tp = 0, fn = 0, tn = 0, fp = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (labels[i] == 1)
      (preds[i] == 1 ? tp : fn) += 1;
    else
      (preds[i] == 0 ? tn : fp) += 1;
  }
  if (tp + fn == 0 || tn + fp == 0)
    raise(errc::undefined_metric, "balanced accuracy needs both classes in labels");
  const double tpr = static_cast<double>(tp) / static_cast<double>(tp + fn);
  const double tnr = static_cast<double>(tn) / static_cast<double>(tn + fp);
  return (tpr + tnr) / 2.0;
}

WilcoxonResult wilcoxon_signed_rank(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) raise(errc::invalid_input, "paired samples differ in length");
  if (a.empty()) raise(errc::invalid_input, "need at least one pair");
  std::vector<double> diffs;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    if (d != 0.0) diffs.push_back(d);
  }
  if (diffs.empty()) raise(errc::degenerate_pairs, "all paired differences are zero");

  const std::size_t n = diffs.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    return std::abs(diffs[x]) < std::abs(diffs[y]);
  });
  std::vector<double> ranks(n, 0.0);
  double tie_correction = 0.0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && std::abs(diffs[order[j + 1]]) == std::abs(diffs[order[i]])) ++j;
    const double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    const double t = static_cast<double>(j - i + 1);
    tie_correction += t * t * t - t;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg_rank;
    i = j + 1;
  }

  double w_plus = 0.0, w_minus = 0.0;
  for (std::size_t k = 0; k < n; ++k) (diffs[k] > 0.0 ? w_plus : w_minus) += ranks[k];
  const double w = std::min(w_plus, w_minus);

  WilcoxonResult res;
  res.statistic = w;
  res.n_used = n;
  if (n <= 20) {
    res.exact = true;
    // Doubled mid-ranks are integers, enabling an exact subset-sum count.
    std::vector<std::int64_t> r2(n);
    std::int64_t total2 = 0;
    for (std::size_t k = 0; k < n; ++k) {
      r2[k] = std::llround(2.0 * ranks[k]);
      total2 += r2[k];
    }
    std::vector<std::uint64_t> ways(static_cast<std::size_t>(total2) + 1, 0);
    ways[0] = 1;
    std::int64_t reach = 0;
    for (std::size_t k = 0; k < n; ++k) {
      reach += r2[k];
      for (std::int64_t s = reach; s >= r2[k]; --s)
        ways[static_cast<std::size_t>(s)] += ways[static_cast<std::size_t>(s - r2[k])];
    }
    const std::int64_t w2 = std::llround(2.0 * w);
    std::uint64_t hits = 0;
    for (std::int64_t s = 0; s <= total2; ++s)
      if (s <= w2 || s >= total2 - w2) hits += ways[static_cast<std::size_t>(s)];
    res.p_value = static_cast<double>(hits) / std::ldexp(1.0, static_cast<int>(n));
  } else {
    const double nn = static_cast<double>(n);
    const double mean = nn * (nn + 1.0) / 4.0;
    const double var = nn * (nn + 1.0) * (2.0 * nn + 1.0) / 24.0 - tie_correction / 48.0;
    const double z = (w - mean + 0.5) / std::sqrt(var);
    res.p_value = std::min(1.0, 2.0 * normal_cdf(z));
  }
  return res;
}

}  // namespace imputelab
