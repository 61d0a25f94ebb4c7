#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <vector>

namespace imputelab {

/// Matrices use NaN for missing cells throughout.
inline bool is_missing(double v) { return std::isnan(v); }

std::size_t observed_count(const Eigen::MatrixXd& m);
std::size_t col_observed_count(const Eigen::MatrixXd& m, Eigen::Index j);

/// Median with even counts averaged over the two central order statistics.
/// NaN when the input is empty.
double median_of(std::vector<double> values);
double col_median(const Eigen::MatrixXd& m, Eigen::Index j);
std::vector<double> col_medians(const Eigen::MatrixXd& m);

/// Percentile in [0,100] by linear interpolation between order statistics.
double percentile_of(std::vector<double> values, double p);

struct ColumnScale {
  std::vector<double> mean;
  std::vector<double> stddev;  // population std over observed cells; 0 -> 1
};

ColumnScale observed_column_scale(const Eigen::MatrixXd& m);

struct MinMaxScale {
  std::vector<double> lo;
  std::vector<double> hi;
};

/// Observed per-column min/max; constant or empty columns get lo == hi.
MinMaxScale observed_min_max(const Eigen::MatrixXd& m);

/// Map observed cells to [0,1] given scale; lo == hi columns map to 0.5.
Eigen::MatrixXd apply_min_max(const Eigen::MatrixXd& m, const MinMaxScale& s);
Eigen::MatrixXd invert_min_max(const Eigen::MatrixXd& m, const MinMaxScale& s);

}  // namespace imputelab
