#include "imputelab/matrixutil.hpp"

#include <algorithm>
#include <limits>

namespace imputelab {

std::size_t observed_count(const Eigen::MatrixXd& m) {
  std::size_t n = 0;
  for (Eigen::Index j = 0; j < m.cols(); ++j) n += col_observed_count(m, j);
  return n;
}

std::size_t col_observed_count(const Eigen::MatrixXd& m, Eigen::Index j) {
  std::size_t n = 0;
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    if (!is_missing(m(i, j))) ++n;
  return n;
}

double median_of(std::vector<double> values) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  if (n % 2 == 1) return values[n / 2];
  return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

double col_median(const Eigen::MatrixXd& m, Eigen::Index j) {
  std::vector<double> vals;
  vals.reserve(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    if (!is_missing(m(i, j))) vals.push_back(m(i, j));
  return median_of(std::move(vals));
}

std::vector<double> col_medians(const Eigen::MatrixXd& m) {
  std::vector<double> out(static_cast<std::size_t>(m.cols()));
  for (Eigen::Index j = 0; j < m.cols(); ++j) out[static_cast<std::size_t>(j)] = col_median(m, j);
  return out;
}

double percentile_of(std::vector<double> values, double p) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(values.begin(), values.end());
  if (values.size() == 1) return values[0];
  const double pos = p / 100.0 * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = static_cast<std::size_t>(std::ceil(pos));
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

ColumnScale observed_column_scale(const Eigen::MatrixXd& m) {
  ColumnScale s;
  s.mean.assign(static_cast<std::size_t>(m.cols()), 0.0);
  s.stddev.assign(static_cast<std::size_t>(m.cols()), 1.0);
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    double sum = 0.0;
    std::size_t n = 0;
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      if (!is_missing(m(i, j))) {
        sum += m(i, j);
        ++n;
      }
    if (n == 0) continue;
    const double mean = sum / static_cast<double>(n);
    double ss = 0.0;
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      if (!is_missing(m(i, j))) {
        const double d = m(i, j) - mean;
        ss += d * d;
      }
    const double sd = std::sqrt(ss / static_cast<double>(n));
    s.mean[static_cast<std::size_t>(j)] = mean;
    s.stddev[static_cast<std::size_t>(j)] = sd > 0.0 ? sd : 1.0;
  }
  return s;
}

MinMaxScale observed_min_max(const Eigen::MatrixXd& m) {
  MinMaxScale s;
  s.lo.assign(static_cast<std::size_t>(m.cols()), 0.0);
  s.hi.assign(static_cast<std::size_t>(m.cols()), 0.0);
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    bool any = false;
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      if (!is_missing(m(i, j))) {
        lo = std::min(lo, m(i, j));
        hi = std::max(hi, m(i, j));
        any = true;
      }
    if (!any) {
      lo = 0.0;
      hi = 0.0;
    }
    s.lo[static_cast<std::size_t>(j)] = lo;
    s.hi[static_cast<std::size_t>(j)] = hi;
  }
  return s;
}

Eigen::MatrixXd apply_min_max(const Eigen::MatrixXd& m, const MinMaxScale& s) {
  Eigen::MatrixXd out = m;
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    const double lo = s.lo[static_cast<std::size_t>(j)];
    const double span = s.hi[static_cast<std::size_t>(j)] - lo;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      if (is_missing(m(i, j))) continue;
      out(i, j) = span > 0.0 ? (m(i, j) - lo) / span : 0.5;
    }
  }
  return out;
}

Eigen::MatrixXd invert_min_max(const Eigen::MatrixXd& m, const MinMaxScale& s) {
  Eigen::MatrixXd out = m;
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    const double lo = s.lo[static_cast<std::size_t>(j)];
    const double hi = s.hi[static_cast<std::size_t>(j)];
    const double span = hi - lo;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      if (is_missing(m(i, j))) continue;
      out(i, j) = span > 0.0 ? m(i, j) * span + lo : lo;
    }
  }
  return out;
}

}  // namespace imputelab
