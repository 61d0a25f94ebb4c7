#pragma once

#include <optional>
#include <vector>

namespace imputelab {

/// Upper-tail chi-square probability Q(df/2, x/2) via the regularized
/// incomplete gamma function.
double chi_square_sf(double x, int df);

struct BhOutcome {
  std::vector<double> p_values;
  std::vector<bool> reject;
  double alpha = 0.05;
};

BhOutcome benjamini_hochberg(const std::vector<double>& p_values, double alpha = 0.05);

/// Rank-statistic AUC with half credit for ties; nullopt when only one class
/// is present.
std::optional<double> auroc(const std::vector<double>& scores, const std::vector<int>& labels);

double balanced_accuracy(const std::vector<int>& preds, const std::vector<int>& labels);

struct WilcoxonResult {
  double statistic = 0.0;  // min(W+, W-)
  double p_value = 1.0;
  std::size_t n_used = 0;  // pairs remaining after dropping zero differences
  bool exact = false;
};

/// Two-sided signed-rank test: exact enumeration for n <= 20, normal
/// approximation with tie and continuity correction beyond.
WilcoxonResult wilcoxon_signed_rank(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace imputelab
