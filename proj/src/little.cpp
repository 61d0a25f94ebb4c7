#include "imputelab/little.hpp"

#include <cmath>
#include <map>
#include <vector>

#include "imputelab/stats.hpp"

namespace imputelab {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

struct PatternGroup {
  std::vector<Eigen::Index> observed_cols;
  std::vector<Eigen::Index> missing_cols;
  std::vector<Eigen::Index> rows;
};

std::vector<PatternGroup> group_patterns(const Eigen::MatrixXd& m) {
  std::map<std::vector<bool>, std::size_t> slot;
  std::vector<PatternGroup> groups;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    std::vector<bool> mask(static_cast<std::size_t>(m.cols()));
    for (Eigen::Index j = 0; j < m.cols(); ++j) mask[static_cast<std::size_t>(j)] = !std::isnan(m(i, j));
    auto it = slot.find(mask);
    if (it == slot.end()) {
      it = slot.emplace(mask, groups.size()).first;
      PatternGroup g;
      for (Eigen::Index j = 0; j < m.cols(); ++j)
        (mask[static_cast<std::size_t>(j)] ? g.observed_cols : g.missing_cols).push_back(j);
      groups.push_back(std::move(g));
    }
    groups[it->second].rows.push_back(i);
  }
  return groups;
}

Eigen::MatrixXd submatrix(const Eigen::MatrixXd& m, const std::vector<Eigen::Index>& ri,
                          const std::vector<Eigen::Index>& ci) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(ri.size()), static_cast<Eigen::Index>(ci.size()));
  for (std::size_t a = 0; a < ri.size(); ++a)
    for (std::size_t b = 0; b < ci.size(); ++b)
      out(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = m(ri[a], ci[b]);
  return out;
}

Eigen::VectorXd subvector(const Eigen::VectorXd& v, const std::vector<Eigen::Index>& idx) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t a = 0; a < idx.size(); ++a) out(static_cast<Eigen::Index>(a)) = v(idx[a]);
  return out;
}

}  // namespace

EmEstimate em_mvn_estimate(const Eigen::MatrixXd& m, int max_iters, double rel_tol) {
  const Eigen::Index n = m.rows();
  const Eigen::Index p = m.cols();
  EmEstimate est;
  est.mean = Eigen::VectorXd::Zero(p);
  est.cov = Eigen::MatrixXd::Identity(p, p);
  if (n == 0 || p == 0) return est;

  for (Eigen::Index j = 0; j < p; ++j) {
    double sum = 0.0, ss = 0.0;
    Eigen::Index cnt = 0;
    for (Eigen::Index i = 0; i < n; ++i)
      if (!std::isnan(m(i, j))) {
        sum += m(i, j);
        ++cnt;
      }
    const double mu = cnt > 0 ? sum / static_cast<double>(cnt) : 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
      if (!std::isnan(m(i, j))) {
        const double d = m(i, j) - mu;
        ss += d * d;
      }
    est.mean(j) = mu;
    const double var = cnt > 0 ? ss / static_cast<double>(cnt) : 1.0;
    est.cov(j, j) = var > 0.0 ? var : 1.0;
  }

  const auto groups = group_patterns(m);
  double prev_ll = -std::numeric_limits<double>::infinity();
  for (int iter = 0; iter < max_iters; ++iter) {
    Eigen::VectorXd s1 = Eigen::VectorXd::Zero(p);
    Eigen::MatrixXd s2 = Eigen::MatrixXd::Zero(p, p);
    double ll = 0.0;
    for (const auto& g : groups) {
      const auto& oc = g.observed_cols;
      const auto& mc = g.missing_cols;
      Eigen::MatrixXd cond_cov;     // Sigma_mm - Sigma_mo Sigma_oo^-1 Sigma_om
      Eigen::MatrixXd regression;   // Sigma_mo Sigma_oo^-1
      Eigen::LDLT<Eigen::MatrixXd> ldlt;
      double logdet = 0.0;
      if (!oc.empty()) {
        const Eigen::MatrixXd cov_oo = submatrix(est.cov, oc, oc);
        ldlt.compute(cov_oo);
        for (Eigen::Index k = 0; k < ldlt.vectorD().size(); ++k)
          logdet += std::log(std::max(ldlt.vectorD()(k), 1e-300));
        if (!mc.empty()) {
          const Eigen::MatrixXd cov_mo = submatrix(est.cov, mc, oc);
          regression = ldlt.solve(cov_mo.transpose()).transpose();
          cond_cov = submatrix(est.cov, mc, mc) - regression * cov_mo.transpose();
        }
      } else if (!mc.empty()) {
        cond_cov = submatrix(est.cov, mc, mc);
      }
      for (Eigen::Index row : g.rows) {
        Eigen::VectorXd xhat(p);
        if (!oc.empty()) {
          Eigen::VectorXd xo(static_cast<Eigen::Index>(oc.size()));
          for (std::size_t a = 0; a < oc.size(); ++a)
            xo(static_cast<Eigen::Index>(a)) = m(row, oc[a]);
          const Eigen::VectorXd delta = xo - subvector(est.mean, oc);
          const Eigen::VectorXd solved = ldlt.solve(delta);
          ll += -0.5 * (static_cast<double>(oc.size()) * kLog2Pi + logdet + delta.dot(solved));
          for (std::size_t a = 0; a < oc.size(); ++a) xhat(oc[a]) = xo(static_cast<Eigen::Index>(a));
          if (!mc.empty()) {
            const Eigen::VectorXd xm = subvector(est.mean, mc) + regression * delta;
            for (std::size_t a = 0; a < mc.size(); ++a) xhat(mc[a]) = xm(static_cast<Eigen::Index>(a));
          }
        } else {
          for (std::size_t a = 0; a < mc.size(); ++a) xhat(mc[a]) = est.mean(mc[a]);
        }
        s1 += xhat;
        s2 += xhat * xhat.transpose();
        for (std::size_t a = 0; a < mc.size(); ++a)
          for (std::size_t b = 0; b < mc.size(); ++b)
            s2(mc[a], mc[b]) += cond_cov(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
      }
    }
    est.mean = s1 / static_cast<double>(n);
    est.cov = s2 / static_cast<double>(n) - est.mean * est.mean.transpose();
    est.cov = ((est.cov + est.cov.transpose()) / 2.0).eval();
    est.loglik_per_iter.push_back(ll);
    if (std::isfinite(prev_ll) &&
        std::abs(ll - prev_ll) <= rel_tol * (std::abs(prev_ll) + 1e-12)) {
      est.converged = true;
      break;
    }
    prev_ll = ll;
  }
  return est;
}

McarTestResult little_mcar_test(const Eigen::MatrixXd& m) {
  McarTestResult res;

  std::vector<Eigen::Index> keep_rows, keep_cols;
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    bool any = false;
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      if (!std::isnan(m(i, j))) any = true;
    if (any) keep_cols.push_back(j);
  }
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    bool any = false;
    for (Eigen::Index j : keep_cols)
      if (!std::isnan(m(i, j))) any = true;
    if (any) keep_rows.push_back(i);
  }
  if (keep_rows.empty() || keep_cols.empty()) {
    res.skipped = true;
    res.skip_reason = "no observed data";
    return res;
  }
  Eigen::MatrixXd x = submatrix(m, keep_rows, keep_cols);
  const Eigen::Index n = x.rows();
  const Eigen::Index p = x.cols();
  if (n < p + 2) {
    res.skipped = true;
    res.skip_reason = "too few rows";
    return res;
  }

  const auto groups = group_patterns(x);
  res.n_patterns = static_cast<int>(groups.size());
  long df = 0;
  for (const auto& g : groups) df += static_cast<long>(g.observed_cols.size());
  df -= static_cast<long>(p);
  res.df = static_cast<int>(df);
  if (df <= 0) {
    res.skipped = true;
    res.skip_reason = "df<=0";
    return res;
  }

  const EmEstimate est = em_mvn_estimate(x);
  if (!est.mean.allFinite() || !est.cov.allFinite()) {
    res.skipped = true;
    res.skip_reason = "singular covariance";
    return res;
  }
  Eigen::MatrixXd cov = est.cov;
  cov.diagonal().array() += 1e-8 * cov.trace() / static_cast<double>(p);

  double d2 = 0.0;
  for (const auto& g : groups) {
    const auto& oc = g.observed_cols;
    if (oc.empty()) continue;
    Eigen::VectorXd mean_obs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(oc.size()));
    for (Eigen::Index row : g.rows)
      for (std::size_t a = 0; a < oc.size(); ++a)
        mean_obs(static_cast<Eigen::Index>(a)) += x(row, oc[a]);
    mean_obs /= static_cast<double>(g.rows.size());
    const Eigen::VectorXd delta = mean_obs - subvector(est.mean, oc);
    const Eigen::MatrixXd cov_oo = submatrix(cov, oc, oc);
    Eigen::LDLT<Eigen::MatrixXd> ldlt(cov_oo);
    const Eigen::VectorXd solved = ldlt.solve(delta);
    const double q = delta.dot(solved);
    if (!std::isfinite(q) || q < -1e-9) {
      res.skipped = true;
      res.skip_reason = "singular covariance";
      return res;
    }
    d2 += static_cast<double>(g.rows.size()) * std::max(q, 0.0);
  }
  res.d2 = d2;
  res.p_value = chi_square_sf(d2, res.df);
  return res;
}

}  // namespace imputelab
