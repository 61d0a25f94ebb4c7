#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace imputelab {

enum class strategy_kind {
  median,
  windowed_median,
  globem_c_proxy,
  simple_knn,
  bounded_knn,
  mice,
  soft_impute,
  autoencoder
};

std::string to_string(strategy_kind k);
strategy_kind strategy_kind_from_string(const std::string& s);

struct BoundedKnnConfig {
  int l = 2;
  int u = 6;
  double clip_lo_pct = 5.0;
  double clip_hi_pct = 95.0;
};

struct MiceConfig {
  int n_iterations = 10;
  double ridge_lambda = 1e-3;
};

struct SoftImputeConfig {
  std::optional<double> lambda;  // default: 0.1 * sigma_max of the mean-filled matrix
  int max_iters = 200;
  double tol = 1e-5;
};

enum class ae_activation { relu, sigmoid };
enum class ae_initial { median, simple_knn };

struct AutoencoderConfig {
  int hidden_dim = 20;
  ae_activation activation = ae_activation::relu;
  int epochs = 10;
  double learning_rate = 1e-3;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  ae_initial initial_imputer = ae_initial::median;
};

struct AutoencoderModel {
  Eigen::MatrixXd w1;  // hidden_dim x n_features
  Eigen::VectorXd b1;
  Eigen::MatrixXd w2;  // n_features x hidden_dim
  Eigen::VectorXd b2;
  std::vector<double> scale_lo, scale_hi;
  int best_epoch = -1;
  bool converged = false;
};

struct StrategySpec {
  strategy_kind kind = strategy_kind::median;
  std::uint64_t seed = 0;
  std::string display_name;  // optional override for reports
  int knn_k = 5;
  int window = 28;
  double row_thresh = 0.5;
  double col_thresh = 0.5;
  BoundedKnnConfig bounded;
  MiceConfig mice;
  SoftImputeConfig soft;
  AutoencoderConfig ae;

  std::string name() const;
};

/// Completion model: fit on one participant's matrix (NaN = Missing), read the
/// completed fit matrix, or complete new rows using only fitted parameters.
/// Every completion keeps observed cells bit-identical and leaves features the
/// fit saw no values for as Missing (windowed_median's zero fallback excepted).
class Imputer {
public:
  virtual ~Imputer() = default;
  virtual void fit(const Eigen::MatrixXd& m) = 0;
  virtual Eigen::MatrixXd transform_fitted() const = 0;
  virtual Eigen::MatrixXd transform(const Eigen::MatrixXd& m) const = 0;
};

std::unique_ptr<Imputer> make_imputer(const StrategySpec& spec);

Eigen::MatrixXd impute_median(const Eigen::MatrixXd& m);
Eigen::MatrixXd impute_windowed_median(const Eigen::MatrixXd& m, int window = 28);

struct GlobemCResult {
  Eigen::MatrixXd completed;
  std::vector<Eigen::Index> dropped_rows;
  std::vector<Eigen::Index> dropped_cols;
};
GlobemCResult impute_globem_c_proxy(const Eigen::MatrixXd& m, double row_thresh = 0.5,
                                    double col_thresh = 0.5);

Eigen::MatrixXd impute_simple_knn(const Eigen::MatrixXd& m, int k = 5);
Eigen::MatrixXd impute_bounded_knn(const Eigen::MatrixXd& m, const BoundedKnnConfig& cfg = {});
Eigen::MatrixXd impute_mice(const Eigen::MatrixXd& m, const MiceConfig& cfg = {});

class SoftImputeImputer;
Eigen::MatrixXd impute_soft_impute(const Eigen::MatrixXd& m, const SoftImputeConfig& cfg = {});

std::pair<Eigen::MatrixXd, AutoencoderModel> impute_autoencoder(const Eigen::MatrixXd& m,
                                                                const AutoencoderConfig& cfg,
                                                                std::uint64_t seed);

/// Single-hidden-layer autoencoder exposed for gradient verification.
struct AeNet {
  Eigen::MatrixXd w1;
  Eigen::VectorXd b1;
  Eigen::MatrixXd w2;
  Eigen::VectorXd b2;
  ae_activation activation = ae_activation::relu;

  /// rows of x are samples; returns reconstructed rows
  Eigen::MatrixXd forward(const Eigen::MatrixXd& x) const;
  /// mean squared error over cells where mask is true
  double masked_loss(const Eigen::MatrixXd& x, const Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>& mask) const;
  struct Grads {
    Eigen::MatrixXd w1;
    Eigen::VectorXd b1;
    Eigen::MatrixXd w2;
    Eigen::VectorXd b2;
  };
  Grads gradients(const Eigen::MatrixXd& x,
                  const Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>& mask) const;
};

class SoftImputeImputerState;

class MedianImputer : public Imputer {
public:
  void fit(const Eigen::MatrixXd& m) override;
  Eigen::MatrixXd transform_fitted() const override;
  Eigen::MatrixXd transform(const Eigen::MatrixXd& m) const override;
  const std::vector<double>& medians() const { return medians_; }

private:
  Eigen::MatrixXd fitted_;
  std::vector<double> medians_;
};

class WindowedMedianImputer : public Imputer {
public:
  explicit WindowedMedianImputer(int window = 28) : window_(window) {}
  void fit(const Eigen::MatrixXd& m) override;
  Eigen::MatrixXd transform_fitted() const override;
  Eigen::MatrixXd transform(const Eigen::MatrixXd& m) const override;

private:
  int window_;
  Eigen::MatrixXd fitted_;
};

class GlobemCProxyImputer : public Imputer {
public:
  GlobemCProxyImputer(double row_thresh = 0.5, double col_thresh = 0.5)
      : row_thresh_(row_thresh), col_thresh_(col_thresh) {}
  void fit(const Eigen::MatrixXd& m) override;
  Eigen::MatrixXd transform_fitted() const override;
  Eigen::MatrixXd transform(const Eigen::MatrixXd& m) const override;
  const std::vector<Eigen::Index>& dropped_rows() const { return dropped_rows_; }
  const std::vector<Eigen::Index>& dropped_cols() const { return dropped_cols_; }

private:
  double row_thresh_, col_thresh_;
  Eigen::MatrixXd fitted_;
  std::vector<Eigen::Index> dropped_rows_, dropped_cols_;
  std::vector<double> means_;  // per feature over retained rows; NaN when column dropped
};

class SimpleKnnImputer : public Imputer {
public:
  explicit SimpleKnnImputer(int k = 5) : k_(k) {}
  void fit(const Eigen::MatrixXd& m) override;
  Eigen::MatrixXd transform_fitted() const override;
  Eigen::MatrixXd transform(const Eigen::MatrixXd& m) const override;

private:
  int k_;
  Eigen::MatrixXd fitted_;
  std::vector<double> mean_, stddev_, medians_;
};

class BoundedKnnImputer : public Imputer {
public:
  explicit BoundedKnnImputer(const BoundedKnnConfig& cfg = {}) : cfg_(cfg) {}
  void fit(const Eigen::MatrixXd& m) override;
  Eigen::MatrixXd transform_fitted() const override;
  Eigen::MatrixXd transform(const Eigen::MatrixXd& m) const override;

private:
  BoundedKnnConfig cfg_;
  Eigen::MatrixXd fitted_, clipped_;
  std::vector<double> mean_, stddev_, clip_lo_, clip_hi_;
};

class MiceImputer : public Imputer {
public:
  explicit MiceImputer(const MiceConfig& cfg = {}) : cfg_(cfg) {}
  void fit(const Eigen::MatrixXd& m) override;
  Eigen::MatrixXd transform_fitted() const override;
  Eigen::MatrixXd transform(const Eigen::MatrixXd& m) const override;

private:
  struct RoundModel {
    bool median_fallback = false;
    Eigen::VectorXd beta;  // intercept followed by one weight per regressor
  };
  MiceConfig cfg_;
  Eigen::MatrixXd fitted_, completed_;
  std::vector<double> means_, medians_;
  std::vector<Eigen::Index> model_cols_;  // features with observed values in fit
  std::vector<std::vector<RoundModel>> rounds_;  // [round][feature-slot]
  bool whole_median_fallback_ = false;

  Eigen::MatrixXd replay(const Eigen::MatrixXd& m) const;
};

class SoftImputeImputer : public Imputer {
public:
  explicit SoftImputeImputer(const SoftImputeConfig& cfg = {}) : cfg_(cfg) {}
  void fit(const Eigen::MatrixXd& m) override;
  Eigen::MatrixXd transform_fitted() const override;
  Eigen::MatrixXd transform(const Eigen::MatrixXd& m) const override;
  const std::vector<double>& objective_per_iter() const { return objective_; }
  double lambda_used() const { return lambda_; }

private:
  SoftImputeConfig cfg_;
  Eigen::MatrixXd fitted_, z_;  // z_ in scaled domain
  std::vector<double> scale_lo_, scale_hi_;
  Eigen::MatrixXd v_;           // right singular vectors of retained rank
  Eigen::VectorXd sigma_;       // shrunk singular values > 0
  std::vector<double> objective_;
  double lambda_ = 0.0;
};

class AutoencoderImputer : public Imputer {
public:
  AutoencoderImputer(const AutoencoderConfig& cfg, std::uint64_t seed)
      : cfg_(cfg), seed_(seed) {}
  void fit(const Eigen::MatrixXd& m) override;
  Eigen::MatrixXd transform_fitted() const override;
  Eigen::MatrixXd transform(const Eigen::MatrixXd& m) const override;
  const AutoencoderModel& model() const { return model_; }
  /// test hook: overrides the configured learning rate before fit
  void override_learning_rate(double lr) { lr_override_ = lr; }

private:
  AutoencoderConfig cfg_;
  std::uint64_t seed_;
  std::optional<double> lr_override_;
  Eigen::MatrixXd fitted_, initial_filled_;
  std::vector<bool> col_observed_;
  AutoencoderModel model_;
  AeNet net_;
  std::unique_ptr<Imputer> initial_;   // fitted initial imputer for new rows
  std::unique_ptr<Imputer> fallback_;  // simple kNN used when training fails

  Eigen::MatrixXd complete(const Eigen::MatrixXd& original,
                           const Eigen::MatrixXd& initial_filled) const;
};

}  // namespace imputelab
