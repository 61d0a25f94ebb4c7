#include <Eigen/SVD>
#include <cmath>

#include "imputelab/error.hpp"
#include "imputelab/imputers.hpp"
#include "imputelab/matrixutil.hpp"

namespace imputelab {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Eigen::MatrixXd mean_fill_scaled(const Eigen::MatrixXd& s) {
  Eigen::MatrixXd out = s;
  for (Eigen::Index j = 0; j < s.cols(); ++j) {
    double sum = 0.0;
    Eigen::Index cnt = 0;
    for (Eigen::Index i = 0; i < s.rows(); ++i)
      if (!std::isnan(s(i, j))) {
        sum += s(i, j);
        ++cnt;
      }
    const double fill = cnt > 0 ? sum / static_cast<double>(cnt) : 0.0;
    for (Eigen::Index i = 0; i < s.rows(); ++i)
      if (std::isnan(out(i, j))) out(i, j) = fill;
  }
  return out;
}

}  // namespace

void SoftImputeImputer::fit(const Eigen::MatrixXd& m) {
  if (cfg_.max_iters < 1) raise(errc::bad_config, "soft impute needs max_iters >= 1");
  if (cfg_.tol <= 0.0) raise(errc::bad_config, "soft impute needs tol > 0");
  if (cfg_.lambda && *cfg_.lambda < 0.0) raise(errc::bad_config, "soft impute needs lambda >= 0");
  fitted_ = m;
  objective_.clear();
  const auto mm = observed_min_max(m);
  scale_lo_ = mm.lo;
  scale_hi_ = mm.hi;

  if (observed_count(m) == 0) {
    z_ = Eigen::MatrixXd::Zero(m.rows(), m.cols());
    v_ = Eigen::MatrixXd::Zero(m.cols(), 0);
    sigma_ = Eigen::VectorXd::Zero(0);
    lambda_ = cfg_.lambda.value_or(0.0);
    return;
  }

  const Eigen::MatrixXd s = apply_min_max(m, mm);
  Eigen::MatrixXd z = mean_fill_scaled(s);
  if (cfg_.lambda) {
    lambda_ = *cfg_.lambda;
  } else {
    Eigen::JacobiSVD<Eigen::MatrixXd> probe(z);
    lambda_ = 0.1 * probe.singularValues()(0);
  }

  Eigen::MatrixXd u_last, v_last;
  Eigen::VectorXd sig_last;
  for (int iter = 0; iter < cfg_.max_iters; ++iter) {
    Eigen::MatrixXd working = z;
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index j = 0; j < m.cols(); ++j)
        if (!std::isnan(s(i, j))) working(i, j) = s(i, j);
    Eigen::BDCSVD<Eigen::MatrixXd> svd(working, Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (svd.info() != Eigen::Success)
      raise(errc::soft_impute_failed, "singular value decomposition did not converge");
    Eigen::VectorXd shrunk = svd.singularValues();
    for (Eigen::Index k = 0; k < shrunk.size(); ++k) shrunk(k) = std::max(shrunk(k) - lambda_, 0.0);
    const Eigen::MatrixXd z_new =
        svd.matrixU() * shrunk.asDiagonal() * svd.matrixV().transpose();

    double fit_term = 0.0;
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index j = 0; j < m.cols(); ++j)
        if (!std::isnan(s(i, j))) {
          const double d = s(i, j) - z_new(i, j);
          fit_term += d * d;
        }
    objective_.push_back(0.5 * fit_term + lambda_ * shrunk.sum());

    double delta = 0.0, base = 0.0;
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index j = 0; j < m.cols(); ++j)
        if (std::isnan(s(i, j))) {
          const double d = z_new(i, j) - z(i, j);
          delta += d * d;
          base += z(i, j) * z(i, j);
        }
    z = z_new;
    u_last = svd.matrixU();
    v_last = svd.matrixV();
    sig_last = shrunk;
    if (std::sqrt(delta) < cfg_.tol * std::max(std::sqrt(base), 1e-12)) break;
  }

  z_ = z;
  Eigen::Index rank = 0;
  for (Eigen::Index k = 0; k < sig_last.size(); ++k)
    if (sig_last(k) > 0.0) ++rank;
  v_ = v_last.leftCols(rank);
  sigma_ = sig_last.head(rank);
}

Eigen::MatrixXd SoftImputeImputer::transform_fitted() const {
  Eigen::MatrixXd out = fitted_;
  for (Eigen::Index j = 0; j < fitted_.cols(); ++j) {
    if (col_observed_count(fitted_, j) == 0) continue;
    const double lo = scale_lo_[static_cast<std::size_t>(j)];
    const double span = scale_hi_[static_cast<std::size_t>(j)] - lo;
    for (Eigen::Index i = 0; i < fitted_.rows(); ++i)
      if (std::isnan(fitted_(i, j))) out(i, j) = span > 0.0 ? z_(i, j) * span + lo : lo;
  }
  return out;
}

Eigen::MatrixXd SoftImputeImputer::transform(const Eigen::MatrixXd& m) const {
  if (m.cols() != fitted_.cols())
    raise(errc::invalid_input, "column count differs from the fitted matrix");
  Eigen::MatrixXd out = m;
  std::vector<bool> usable(static_cast<std::size_t>(m.cols()), false);
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    usable[static_cast<std::size_t>(j)] = col_observed_count(fitted_, j) > 0;

  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    std::vector<Eigen::Index> obs, mis;
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (!usable[static_cast<std::size_t>(j)]) continue;
      (std::isnan(m(i, j)) ? mis : obs).push_back(j);
    }
    if (mis.empty()) continue;
    Eigen::VectorXd w = Eigen::VectorXd::Zero(v_.cols());
    if (!obs.empty() && v_.cols() > 0) {
      Eigen::MatrixXd vo(static_cast<Eigen::Index>(obs.size()), v_.cols());
      Eigen::VectorXd xo(static_cast<Eigen::Index>(obs.size()));
      for (std::size_t a = 0; a < obs.size(); ++a) {
        vo.row(static_cast<Eigen::Index>(a)) = v_.row(obs[a]);
        const double lo = scale_lo_[static_cast<std::size_t>(obs[a])];
        const double span = scale_hi_[static_cast<std::size_t>(obs[a])] - lo;
        xo(static_cast<Eigen::Index>(a)) = span > 0.0 ? (m(i, obs[a]) - lo) / span : 0.5;
      }
      Eigen::MatrixXd gram = vo.transpose() * vo;
      gram.diagonal().array() += 1e-12;
      w = Eigen::LDLT<Eigen::MatrixXd>(gram).solve(vo.transpose() * xo);
    } else if (obs.empty()) {
      continue;  // nothing to project from; cells stay missing
    }
    for (Eigen::Index j : mis) {
      const double zhat = v_.cols() > 0 ? v_.row(j).dot(w) : 0.0;
      const double lo = scale_lo_[static_cast<std::size_t>(j)];
      const double span = scale_hi_[static_cast<std::size_t>(j)] - lo;
      out(i, j) = span > 0.0 ? zhat * span + lo : lo;
    }
  }
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      if (!std::isnan(m(i, j))) out(i, j) = m(i, j);
  return out;
}

}  // namespace imputelab
