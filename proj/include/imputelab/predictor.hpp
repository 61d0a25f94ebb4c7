#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace imputelab {

enum class predictor_kind { baseline_logistic, external };

struct PredictorSpec {
  predictor_kind kind = predictor_kind::baseline_logistic;
  double learning_rate = 0.1;
  int iterations = 500;
  double l2_lambda = 1e-3;
  std::string command;   // external predictor shell command
  std::string work_dir;  // where the external file exchange happens

  std::string name() const {
    return kind == predictor_kind::baseline_logistic ? "baseline_logistic" : "external";
  }
};

/// L2-regularized logistic regression on standardized features, trained by
/// full-batch gradient descent. The bias is unpenalized.
class BaselinePredictor {
public:
  explicit BaselinePredictor(const PredictorSpec& spec = {}) : spec_(spec) {}
  void fit(const Eigen::MatrixXd& x, const std::vector<int>& y);
  std::vector<double> score(const Eigen::MatrixXd& x) const;
  const Eigen::VectorXd& weights() const { return w_; }
  double bias() const { return b_; }
  const std::vector<double>& loss_per_iter() const { return losses_; }

private:
  PredictorSpec spec_;
  Eigen::VectorXd w_;
  double b_ = 0.0;
  std::vector<double> mean_, stddev_;
  std::vector<double> losses_;
};

std::pair<std::vector<double>, std::vector<int>> fit_predict_baseline(
    const Eigen::MatrixXd& train_x, const std::vector<int>& train_y,
    const Eigen::MatrixXd& test_x, const PredictorSpec& spec = {});

struct WeeklyRow {
  std::string participant_id;
  int week = 0;
  std::optional<int> label;
  std::vector<double> features;
};

/// File contract: writes train.csv (pid,week,label,features) and test.csv
/// (pid,week,features) into work_dir, runs the command there, reads
/// scores.csv (pid,week,score) back; returns scores aligned with test rows.
std::vector<double> run_external_predictor(const std::vector<WeeklyRow>& train,
                                           const std::vector<WeeklyRow>& test,
                                           const std::vector<std::string>& feature_names,
                                           const PredictorSpec& spec);

}  // namespace imputelab
