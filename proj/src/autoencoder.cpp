#include <cmath>
#include <limits>

#include "imputelab/error.hpp"
#include "imputelab/imputers.hpp"
#include "imputelab/matrixutil.hpp"
#include "imputelab/rng.hpp"

namespace imputelab {

namespace {

using BoolMatrix = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;

Eigen::MatrixXd sigmoid(const Eigen::MatrixXd& z) {
  return (1.0 + (-z.array()).exp()).inverse().matrix();
}

struct AdamState {
  Eigen::MatrixXd m_w1, v_w1, m_w2, v_w2;
  Eigen::VectorXd m_b1, v_b1, m_b2, v_b2;
  long t = 0;

  explicit AdamState(const AeNet& net)
      : m_w1(Eigen::MatrixXd::Zero(net.w1.rows(), net.w1.cols())),
        v_w1(Eigen::MatrixXd::Zero(net.w1.rows(), net.w1.cols())),
        m_w2(Eigen::MatrixXd::Zero(net.w2.rows(), net.w2.cols())),
        v_w2(Eigen::MatrixXd::Zero(net.w2.rows(), net.w2.cols())),
        m_b1(Eigen::VectorXd::Zero(net.b1.size())),
        v_b1(Eigen::VectorXd::Zero(net.b1.size())),
        m_b2(Eigen::VectorXd::Zero(net.b2.size())),
        v_b2(Eigen::VectorXd::Zero(net.b2.size())) {}

  template <typename T>
  static void step_one(T& param, const T& grad, T& m, T& v, double lr, double b1, double b2,
                       double eps, long t) {
    m = b1 * m + (1.0 - b1) * grad;
    v = (b2 * v.array() + (1.0 - b2) * grad.array().square()).matrix();
    const double bc1 = 1.0 - std::pow(b1, static_cast<double>(t));
    const double bc2 = 1.0 - std::pow(b2, static_cast<double>(t));
    param = (param.array() -
             lr * (m.array() / bc1) / ((v.array() / bc2).sqrt() + eps))
                .matrix();
  }

  void step(AeNet& net, const AeNet::Grads& g, const AutoencoderConfig& cfg, double lr) {
    ++t;
    step_one(net.w1, g.w1, m_w1, v_w1, lr, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps, t);
    step_one(net.b1, g.b1, m_b1, v_b1, lr, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps, t);
    step_one(net.w2, g.w2, m_w2, v_w2, lr, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps, t);
    step_one(net.b2, g.b2, m_b2, v_b2, lr, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps, t);
  }
};

}  // namespace

Eigen::MatrixXd AeNet::forward(const Eigen::MatrixXd& x) const {
  const Eigen::MatrixXd z1 = (x * w1.transpose()).rowwise() + b1.transpose();
  const Eigen::MatrixXd h =
      activation == ae_activation::relu ? z1.cwiseMax(0.0).eval() : sigmoid(z1);
  const Eigen::MatrixXd z2 = (h * w2.transpose()).rowwise() + b2.transpose();
  return activation == ae_activation::relu ? z2 : sigmoid(z2);
}

double AeNet::masked_loss(const Eigen::MatrixXd& x, const BoolMatrix& mask) const {
  const Eigen::MatrixXd out = forward(x);
  double acc = 0.0;
  long n = 0;
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    for (Eigen::Index j = 0; j < x.cols(); ++j)
      if (mask(i, j)) {
        const double d = out(i, j) - x(i, j);
        acc += d * d;
        ++n;
      }
  return n > 0 ? acc / static_cast<double>(n) : 0.0;
}

AeNet::Grads AeNet::gradients(const Eigen::MatrixXd& x, const BoolMatrix& mask) const {
  const Eigen::MatrixXd z1 = (x * w1.transpose()).rowwise() + b1.transpose();
  const Eigen::MatrixXd h =
      activation == ae_activation::relu ? z1.cwiseMax(0.0).eval() : sigmoid(z1);
  const Eigen::MatrixXd z2 = (h * w2.transpose()).rowwise() + b2.transpose();
  const Eigen::MatrixXd out = activation == ae_activation::relu ? z2 : sigmoid(z2);

  long n_obs = 0;
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    for (Eigen::Index j = 0; j < x.cols(); ++j)
      if (mask(i, j)) ++n_obs;

  Eigen::MatrixXd d_out = Eigen::MatrixXd::Zero(x.rows(), x.cols());
  if (n_obs > 0)
    for (Eigen::Index i = 0; i < x.rows(); ++i)
      for (Eigen::Index j = 0; j < x.cols(); ++j)
        if (mask(i, j)) d_out(i, j) = 2.0 * (out(i, j) - x(i, j)) / static_cast<double>(n_obs);

  Eigen::MatrixXd d_z2 = d_out;
  if (activation == ae_activation::sigmoid)
    d_z2 = (d_out.array() * out.array() * (1.0 - out.array())).matrix();

  Grads g;
  g.w2 = d_z2.transpose() * h;
  g.b2 = d_z2.colwise().sum().transpose();
  Eigen::MatrixXd d_h = d_z2 * w2;
  Eigen::MatrixXd d_z1;
  if (activation == ae_activation::relu)
    d_z1 = (d_h.array() * (z1.array() > 0.0).cast<double>()).matrix();
  else
    d_z1 = (d_h.array() * h.array() * (1.0 - h.array())).matrix();
  g.w1 = d_z1.transpose() * x;
  g.b1 = d_z1.colwise().sum().transpose();
  return g;
}

void AutoencoderImputer::fit(const Eigen::MatrixXd& m) {
  if (cfg_.hidden_dim < 1 || cfg_.epochs < 1 || cfg_.learning_rate <= 0.0)
    raise(errc::bad_config, "autoencoder needs hidden_dim >= 1, epochs >= 1, learning_rate > 0");
  fitted_ = m;
  const Eigen::Index p = m.cols();

  if (cfg_.initial_imputer == ae_initial::median)
    initial_ = std::make_unique<MedianImputer>();
  else
    initial_ = std::make_unique<SimpleKnnImputer>(5);
  initial_->fit(m);
  initial_filled_ = initial_->transform_fitted();

  auto knn = std::make_unique<SimpleKnnImputer>(5);
  knn->fit(m);
  fallback_ = std::move(knn);

  const auto mm = observed_min_max(m);
  model_ = AutoencoderModel{};
  model_.scale_lo = mm.lo;
  model_.scale_hi = mm.hi;
  col_observed_.assign(static_cast<std::size_t>(p), false);
  for (Eigen::Index j = 0; j < p; ++j)
    col_observed_[static_cast<std::size_t>(j)] = col_observed_count(m, j) > 0;

  Eigen::MatrixXd x = apply_min_max(initial_filled_, mm);
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    for (Eigen::Index j = 0; j < x.cols(); ++j)
      if (std::isnan(x(i, j))) x(i, j) = 0.5;
  BoolMatrix mask(m.rows(), p);
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < p; ++j) mask(i, j) = !std::isnan(m(i, j));

  rng gen(seed_);
  const double bound1 = 1.0 / std::sqrt(static_cast<double>(p));
  const double bound2 = 1.0 / std::sqrt(static_cast<double>(cfg_.hidden_dim));
  net_.activation = cfg_.activation;
  net_.w1.resize(cfg_.hidden_dim, p);
  net_.b1.resize(cfg_.hidden_dim);
  net_.w2.resize(p, cfg_.hidden_dim);
  net_.b2.resize(p);
  for (Eigen::Index i = 0; i < net_.w1.rows(); ++i)
    for (Eigen::Index j = 0; j < net_.w1.cols(); ++j)
      net_.w1(i, j) = (2.0 * gen.uniform01() - 1.0) * bound1;
  for (Eigen::Index i = 0; i < net_.b1.size(); ++i)
    net_.b1(i) = (2.0 * gen.uniform01() - 1.0) * bound1;
  for (Eigen::Index i = 0; i < net_.w2.rows(); ++i)
    for (Eigen::Index j = 0; j < net_.w2.cols(); ++j)
      net_.w2(i, j) = (2.0 * gen.uniform01() - 1.0) * bound2;
  for (Eigen::Index i = 0; i < net_.b2.size(); ++i)
    net_.b2(i) = (2.0 * gen.uniform01() - 1.0) * bound2;

  const double lr = lr_override_.value_or(cfg_.learning_rate);
  const double initial_loss = net_.masked_loss(x, mask);
  AdamState adam(net_);

  AeNet best = net_;
  double best_loss = std::numeric_limits<double>::infinity();
  int best_epoch = -1;
  bool any_nonfinite = !std::isfinite(initial_loss);

  for (int epoch = 0; epoch < cfg_.epochs && !any_nonfinite; ++epoch) {
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      bool row_has_obs = false;
      for (Eigen::Index j = 0; j < p; ++j)
        if (mask(i, j)) row_has_obs = true;
      if (!row_has_obs) continue;
      const Eigen::MatrixXd xi = x.row(i);
      const BoolMatrix mi = mask.row(i);
      adam.step(net_, net_.gradients(xi, mi), cfg_, lr);
    }
    const double epoch_loss = net_.masked_loss(x, mask);
    if (!std::isfinite(epoch_loss)) {
      any_nonfinite = true;
      break;
    }
    if (epoch_loss < best_loss) {
      best_loss = epoch_loss;
      best = net_;
      best_epoch = epoch;
    }
  }

  if (any_nonfinite || best_loss > initial_loss) {
    model_.converged = false;
    model_.best_epoch = -1;
    return;
  }
  net_ = best;
  model_.w1 = best.w1;
  model_.b1 = best.b1;
  model_.w2 = best.w2;
  model_.b2 = best.b2;
  model_.best_epoch = best_epoch;
  model_.converged = true;
}

Eigen::MatrixXd AutoencoderImputer::complete(const Eigen::MatrixXd& original,
                                             const Eigen::MatrixXd& initial_filled) const {
  MinMaxScale mm{model_.scale_lo, model_.scale_hi};
  Eigen::MatrixXd x = apply_min_max(initial_filled, mm);
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    for (Eigen::Index j = 0; j < x.cols(); ++j)
      if (std::isnan(x(i, j))) x(i, j) = 0.5;
  const Eigen::MatrixXd out_scaled = net_.forward(x);
  Eigen::MatrixXd out = original;
  for (Eigen::Index i = 0; i < original.rows(); ++i)
    for (Eigen::Index j = 0; j < original.cols(); ++j) {
      if (!std::isnan(original(i, j)) || !col_observed_[static_cast<std::size_t>(j)]) continue;
      const double lo = model_.scale_lo[static_cast<std::size_t>(j)];
      const double span = model_.scale_hi[static_cast<std::size_t>(j)] - lo;
      out(i, j) = span > 0.0 ? out_scaled(i, j) * span + lo : lo;
    }
  return out;
}

Eigen::MatrixXd AutoencoderImputer::transform_fitted() const {
  if (!model_.converged) return fallback_->transform_fitted();
  return complete(fitted_, initial_filled_);
}

Eigen::MatrixXd AutoencoderImputer::transform(const Eigen::MatrixXd& m) const {
  if (!model_.converged) return fallback_->transform(m);
  return complete(m, initial_->transform(m));
}

}  // namespace imputelab
