#include "imputelab/predictor.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>

#include "imputelab/csv.hpp"
#include "imputelab/error.hpp"

namespace imputelab {

void BaselinePredictor::fit(const Eigen::MatrixXd& x, const std::vector<int>& y) {
  if (spec_.learning_rate <= 0.0 || spec_.iterations < 1 || spec_.l2_lambda < 0.0)
    raise(errc::bad_config, "baseline predictor hyperparameters must be positive");
  if (x.rows() != static_cast<Eigen::Index>(y.size()))
    raise(errc::invalid_input, "feature rows and labels differ in length");
  bool has_pos = false, has_neg = false;
  for (int v : y) (v == 1 ? has_pos : has_neg) = true;
  if (!has_pos || !has_neg)
    raise(errc::single_class_train, "training labels contain a single class");

  const Eigen::Index n = x.rows(), p = x.cols();
  mean_.assign(static_cast<std::size_t>(p), 0.0);
  stddev_.assign(static_cast<std::size_t>(p), 1.0);
  for (Eigen::Index j = 0; j < p; ++j) {
    const double mu = x.col(j).mean();
    const double var = (x.col(j).array() - mu).square().sum() / static_cast<double>(n);
    mean_[static_cast<std::size_t>(j)] = mu;
    stddev_[static_cast<std::size_t>(j)] = var > 0.0 ? std::sqrt(var) : 1.0;
  }
  Eigen::MatrixXd z = x;
  for (Eigen::Index j = 0; j < p; ++j)
    z.col(j) = (x.col(j).array() - mean_[static_cast<std::size_t>(j)]) /
               stddev_[static_cast<std::size_t>(j)];
  Eigen::VectorXd yv(n);
  for (Eigen::Index i = 0; i < n; ++i) yv(i) = y[static_cast<std::size_t>(i)];

  w_ = Eigen::VectorXd::Zero(p);
  b_ = 0.0;
  losses_.clear();
  losses_.reserve(static_cast<std::size_t>(spec_.iterations));
  for (int it = 0; it < spec_.iterations; ++it) {
    const Eigen::VectorXd logits = (z * w_).array() + b_;
    const Eigen::VectorXd prob = (1.0 + (-logits.array()).exp()).inverse().matrix();
    double loss = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double pr = std::min(std::max(prob(i), 1e-12), 1.0 - 1e-12);
      loss += yv(i) > 0.5 ? -std::log(pr) : -std::log(1.0 - pr);
    }
    loss = loss / static_cast<double>(n) + 0.5 * spec_.l2_lambda * w_.squaredNorm();
    losses_.push_back(loss);
    const Eigen::VectorXd grad =
        z.transpose() * (prob - yv) / static_cast<double>(n) + spec_.l2_lambda * w_;
    const double grad_b = (prob - yv).mean();
    w_ -= spec_.learning_rate * grad;
    b_ -= spec_.learning_rate * grad_b;
  }
}

std::vector<double> BaselinePredictor::score(const Eigen::MatrixXd& x) const {
  std::vector<double> out(static_cast<std::size_t>(x.rows()));
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    double logit = b_;
    for (Eigen::Index j = 0; j < x.cols(); ++j)
      logit += w_(j) * (x(i, j) - mean_[static_cast<std::size_t>(j)]) /
               stddev_[static_cast<std::size_t>(j)];
    out[static_cast<std::size_t>(i)] = 1.0 / (1.0 + std::exp(-logit));
  }
  return out;
}

std::pair<std::vector<double>, std::vector<int>> fit_predict_baseline(
    const Eigen::MatrixXd& train_x, const std::vector<int>& train_y,
    const Eigen::MatrixXd& test_x, const PredictorSpec& spec) {
  BaselinePredictor model(spec);
  model.fit(train_x, train_y);
  auto scores = model.score(test_x);
  std::vector<int> preds(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) preds[i] = scores[i] >= 0.5 ? 1 : 0;
  return {std::move(scores), std::move(preds)};
}

std::vector<double> run_external_predictor(const std::vector<WeeklyRow>& train,
                                           const std::vector<WeeklyRow>& test,
                                           const std::vector<std::string>& feature_names,
                                           const PredictorSpec& spec) {
  if (spec.command.empty()) raise(errc::bad_config, "external predictor needs a command");
  const std::string dir = spec.work_dir.empty() ? "." : spec.work_dir;
  if (dir != ".") {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) raise(errc::io_error, "cannot create work directory '" + dir + "'");
  }
  {
    std::ofstream out(dir + "/train.csv", std::ios::binary);
    if (!out) raise(errc::io_error, "cannot write '" + dir + "/train.csv'");
    out << "pid,week,label";
    for (const auto& f : feature_names) out << ',' << f;
    out << '\n';
    for (const auto& row : train) {
      if (!row.label) continue;
      out << row.participant_id << ',' << row.week << ',' << *row.label;
      for (double v : row.features) out << ',' << format_double(v);
      out << '\n';
    }
  }
  {
    std::ofstream out(dir + "/test.csv", std::ios::binary);
    if (!out) raise(errc::io_error, "cannot write '" + dir + "/test.csv'");
    out << "pid,week";
    for (const auto& f : feature_names) out << ',' << f;
    out << '\n';
    for (const auto& row : test) {
      out << row.participant_id << ',' << row.week;
      for (double v : row.features) out << ',' << format_double(v);
      out << '\n';
    }
  }
  const std::string cmd = "cd '" + dir + "' && " + spec.command;
  const int status = std::system(cmd.c_str());
  if (status != 0)
    raise(errc::invalid_input,
          "external predictor exited with status " + std::to_string(status));

  std::ifstream in(dir + "/scores.csv", std::ios::binary);
  if (!in) raise(errc::io_error, "external predictor produced no scores.csv");
  std::string line;
  if (!std::getline(in, line)) raise(errc::invalid_input, "scores.csv is empty");
  std::map<std::pair<std::string, int>, double> scores;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != 3)
      raise(errc::malformed_row,
            "scores.csv line " + std::to_string(line_no) + ": expected pid,week,score");
    scores[{fields[0], std::stoi(fields[1])}] = std::stod(fields[2]);
  }
  std::vector<double> out;
  out.reserve(test.size());
  for (const auto& row : test) {
    auto it = scores.find({row.participant_id, row.week});
    if (it == scores.end())
      raise(errc::invalid_input, "external predictor returned no score for (" +
                                     row.participant_id + ", week " +
                                     std::to_string(row.week) + ")");
    out.push_back(it->second);
  }
  return out;
}

}  // namespace imputelab
