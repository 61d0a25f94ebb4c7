#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace imputelab {

struct McarTestResult {
  std::string participant_id;
  double d2 = 0.0;
  int df = 0;
  double p_value = 1.0;
  int n_patterns = 0;
  bool skipped = false;
  std::string skip_reason;
};

struct EmEstimate {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;  // ML estimate, normalized by N
  std::vector<double> loglik_per_iter;
  bool converged = false;
};

/// ML mean/covariance of a multivariate normal with missing cells (NaN), via
/// EM over rows grouped by missingness pattern.
EmEstimate em_mvn_estimate(const Eigen::MatrixXd& m, int max_iters = 100, double rel_tol = 1e-6);

/// Little's chi-square test of MCAR on one participant matrix (NaN = missing).
McarTestResult little_mcar_test(const Eigen::MatrixXd& m);

}  // namespace imputelab
