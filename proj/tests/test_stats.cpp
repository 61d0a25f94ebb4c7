#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "imputelab/error.hpp"
#include "imputelab/rng.hpp"
#include "imputelab/stats.hpp"

using namespace imputelab;

namespace {

/// Closed-form upper tail for even df: exp(-x/2) * sum_{k<df/2} (x/2)^k / k!.
double chi_sf_even_df(double x, int df) {
  const double h = x / 2.0;
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k < df / 2; ++k) {
    term *= h / k;
    sum += term;
  }
  return std::exp(-h) * sum;
}

/// Pairwise-count AUC: correct pairs get 1, ties get 1/2.
double auroc_pairwise(const std::vector<double>& scores, const std::vector<int>& labels) {
  double num = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] != 1) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[j] != 0) continue;
      ++pairs;
      if (scores[i] > scores[j])
        num += 1.0;
      else if (scores[i] == scores[j])
        num += 0.5;
    }
  }
  return num / static_cast<double>(pairs);
}

/// Step-up reference built independently: adjusted threshold scan over a
/// sorted copy, decisions mapped back by value comparison.
std::vector<bool> bh_reference(const std::vector<double>& p, double alpha) {
  const std::size_t m = p.size();
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return p[a] < p[b]; });
  std::size_t cutoff = 0;  // number of rejections
  for (std::size_t i = m; i >= 1; --i) {
    if (p[order[i - 1]] <= static_cast<double>(i) / static_cast<double>(m) * alpha) {
      cutoff = i;
      break;
    }
  }
  std::vector<bool> reject(m, false);
  for (std::size_t i = 0; i < cutoff; ++i) reject[order[i]] = true;
  return reject;
}

struct BruteWilcoxon {
  double w = 0.0;
  double p = 1.0;
};

/// Exact enumeration over all 2^n sign assignments of the |d| mid-ranks.
BruteWilcoxon wilcoxon_brute_force(const std::vector<double>& d) {
  const std::size_t n = d.size();
  std::vector<double> abs_d(n);
  for (std::size_t i = 0; i < n; ++i) abs_d[i] = std::abs(d[i]);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return abs_d[a] < abs_d[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && abs_d[order[j + 1]] == abs_d[order[i]]) ++j;
    const double r = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  double w_plus = 0.0, total = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    total += ranks[k];
    if (d[k] > 0.0) w_plus += ranks[k];
  }
  const double w_obs = std::min(w_plus, total - w_plus);

  std::size_t hits = 0;
  const std::size_t assignments = std::size_t{1} << n;
  for (std::size_t bits = 0; bits < assignments; ++bits) {
    double wp = 0.0;
    for (std::size_t k = 0; k < n; ++k)
      if (bits & (std::size_t{1} << k)) wp += ranks[k];
    if (wp <= w_obs + 1e-9 || wp >= total - w_obs - 1e-9) ++hits;
  }
  return {w_obs, static_cast<double>(hits) / static_cast<double>(assignments)};
}

}  // namespace

TEST_CASE("chi_square_sf matches closed forms") {
  CHECK(chi_square_sf(0.0, 1) == 1.0);
  CHECK(chi_square_sf(0.0, 7) == 1.0);
  CHECK(chi_square_sf(2.0, 2) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
  CHECK(chi_square_sf(3.841459, 1) == doctest::Approx(0.05).epsilon(2e-3));
  CHECK(std::abs(chi_square_sf(3.841459, 1) - 0.05) < 1e-4);
  for (int df : {2, 4, 10, 40, 100, 500}) {
    for (double x : {0.5, 1.0, 5.0, 20.0, 80.0, 300.0, 700.0}) {
      CHECK(std::abs(chi_square_sf(x, df) - chi_sf_even_df(x, df)) < 1e-10);
    }
  }
  for (double x : {0.1, 1.0, 4.0, 15.0})
    CHECK(std::abs(chi_square_sf(x, 1) - std::erfc(std::sqrt(x / 2.0))) < 1e-12);
}

TEST_CASE("chi_square_sf error contracts") {
  CHECK_THROWS_AS(chi_square_sf(1.0, 0), error);
  try {
    chi_square_sf(1.0, 0);
  } catch (const error& e) {
    CHECK(e.code() == errc::invalid_df);
  }
  CHECK_THROWS_AS(chi_square_sf(-1.0, 1), error);
}

TEST_CASE("benjamini_hochberg examples") {
  auto all = benjamini_hochberg({0.01, 0.02, 0.03, 0.04}, 0.05);
  CHECK(all.reject == std::vector<bool>{true, true, true, true});
  auto none = benjamini_hochberg({0.5, 0.9}, 0.05);
  CHECK(none.reject == std::vector<bool>{false, false});
  auto empty = benjamini_hochberg({}, 0.05);
  CHECK(empty.reject.empty());
}

TEST_CASE("benjamini_hochberg matches a step-up reference on random inputs") {
  rng gen(101);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t m = 1 + gen.uniform_below(12);
    std::vector<double> p(m);
    for (auto& v : p) v = gen.uniform01();
    const double alpha = 0.01 + 0.2 * gen.uniform01();
    const auto got = benjamini_hochberg(p, alpha);
    const auto want = bh_reference(p, alpha);
    CHECK(got.reject == want);
  }
}

TEST_CASE("benjamini_hochberg rejections form a sorted prefix and grow with alpha") {
  rng gen(202);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> p(8);
    for (auto& v : p) v = gen.uniform01();
    const auto lo = benjamini_hochberg(p, 0.05);
    const auto hi = benjamini_hochberg(p, 0.20);
    double max_rejected = -1.0, min_kept = 2.0;
    std::size_t n_lo = 0, n_hi = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (lo.reject[i]) {
        max_rejected = std::max(max_rejected, p[i]);
        ++n_lo;
      } else {
        min_kept = std::min(min_kept, p[i]);
      }
      if (hi.reject[i]) ++n_hi;
    }
    if (max_rejected >= 0.0 && min_kept <= 1.0) CHECK(max_rejected <= min_kept);
    CHECK(n_hi >= n_lo);
  }
}

TEST_CASE("auroc examples") {
  CHECK(*auroc({0.9, 0.8, 0.3, 0.2}, {1, 1, 0, 0}) == 1.0);
  CHECK(*auroc({0.9, 0.8, 0.3, 0.2}, {1, 0, 1, 0}) == doctest::Approx(0.75));
  CHECK(*auroc({0.5, 0.5, 0.5, 0.5}, {1, 0, 1, 0}) == doctest::Approx(0.5));
  CHECK(!auroc({0.9, 0.2}, {1, 1}).has_value());
  CHECK_THROWS_AS(auroc({0.9}, {1, 0}), error);
  CHECK_THROWS_AS(auroc({}, {}), error);
}

TEST_CASE("auroc matches the pairwise-count oracle on random instances") {
  rng gen(303);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 2 + gen.uniform_below(30);
    std::vector<double> scores(n);
    std::vector<int> labels(n);
    bool has0 = false, has1 = false;
    for (std::size_t i = 0; i < n; ++i) {
      // coarse grid makes score ties common
      scores[i] = static_cast<double>(gen.uniform_below(8)) / 8.0;
      labels[i] = gen.uniform01() < 0.5 ? 0 : 1;
      (labels[i] == 1 ? has1 : has0) = true;
    }
    if (!has0 || !has1) {
      CHECK(!auroc(scores, labels).has_value());
      continue;
    }
    CHECK(*auroc(scores, labels) ==
          doctest::Approx(auroc_pairwise(scores, labels)).epsilon(1e-12));
  }
}

TEST_CASE("auroc complement and monotone-transform properties") {
  rng gen(404);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 4 + gen.uniform_below(20);
    std::vector<double> scores(n);
    std::vector<int> labels(n), flipped(n);
    bool has0 = false, has1 = false;
    for (std::size_t i = 0; i < n; ++i) {
      scores[i] = gen.normal();  // continuous, ties have probability zero
      labels[i] = gen.uniform01() < 0.5 ? 0 : 1;
      flipped[i] = 1 - labels[i];
      (labels[i] == 1 ? has1 : has0) = true;
    }
    if (!has0 || !has1) continue;
    CHECK(*auroc(scores, labels) + *auroc(scores, flipped) == doctest::Approx(1.0));
    std::vector<double> warped(n);
    for (std::size_t i = 0; i < n; ++i) warped[i] = std::exp(2.0 * scores[i]) + 3.0;
    CHECK(*auroc(warped, labels) == doctest::Approx(*auroc(scores, labels)).epsilon(1e-12));
  }
}

TEST_CASE("balanced_accuracy examples") {
  CHECK(balanced_accuracy({1, 1, 0, 0}, {1, 1, 0, 0}) == 1.0);
  CHECK(balanced_accuracy({1, 0, 0, 0}, {1, 1, 0, 0}) == doctest::Approx(0.75));
  CHECK_THROWS_AS(balanced_accuracy({1, 1, 1, 1}, {1, 1, 1, 1}), error);
  try {
    balanced_accuracy({1, 1}, {1, 1});
  } catch (const error& e) {
    CHECK(e.code() == errc::undefined_metric);
  }
  CHECK_THROWS_AS(balanced_accuracy({1}, {1, 0}), error);
}

TEST_CASE("wilcoxon examples") {
  auto all_pos = wilcoxon_signed_rank({2, 3, 4, 5, 6}, {1, 1, 1, 1, 1});
  CHECK(all_pos.statistic == 0.0);
  CHECK(all_pos.exact);
  CHECK(all_pos.p_value == doctest::Approx(0.0625).epsilon(1e-12));

  CHECK_THROWS_AS(wilcoxon_signed_rank({1, 2, 3}, {1, 2, 3}), error);
  try {
    wilcoxon_signed_rank({1.0}, {1.0});
  } catch (const error& e) {
    CHECK(e.code() == errc::degenerate_pairs);
  }

  auto tied = wilcoxon_signed_rank({0.0, 2.0}, {1.0, 1.0});
  CHECK(tied.statistic == doctest::Approx(1.5));
  CHECK(tied.p_value == doctest::Approx(1.0));
}

TEST_CASE("wilcoxon exact p matches brute-force sign enumeration") {
  rng gen(505);
  int checked = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + gen.uniform_below(12);
    std::vector<double> a(n), b(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      // small integer grid provokes tied |d| and repeated magnitudes
      a[i] = static_cast<double>(static_cast<int>(gen.uniform_below(9)) - 4);
    }
    bool all_zero = true;
    for (double v : a)
      if (v != 0.0) all_zero = false;
    if (all_zero) {
      CHECK_THROWS_AS(wilcoxon_signed_rank(a, b), error);
      continue;
    }
    std::vector<double> d;
    for (double v : a)
      if (v != 0.0) d.push_back(v);
    const auto want = wilcoxon_brute_force(d);
    const auto got = wilcoxon_signed_rank(a, b);
    CHECK(got.exact);
    CHECK(got.n_used == d.size());
    CHECK(got.statistic == doctest::Approx(want.w).epsilon(1e-12));
    CHECK(got.p_value == doctest::Approx(want.p).epsilon(1e-12));
    ++checked;
  }
  CHECK(checked > 800);
}

TEST_CASE("wilcoxon normal approximation is close to exact near the crossover") {
  rng gen(606);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> a(21), b(21, 0.0);
    for (auto& v : a) v = gen.normal() + 0.3;
    const auto approx = wilcoxon_signed_rank(a, b);
    CHECK(!approx.exact);
    CHECK(approx.p_value >= 0.0);
    CHECK(approx.p_value <= 1.0);
  }
  // shifted pairs should reject soundly under the approximation
  std::vector<double> big(30), base(30, 0.0);
  for (std::size_t i = 0; i < big.size(); ++i) big[i] = 1.0 + 0.01 * static_cast<double>(i);
  CHECK(wilcoxon_signed_rank(big, base).p_value < 1e-4);
}
