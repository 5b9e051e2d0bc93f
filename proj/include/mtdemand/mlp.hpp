#pragma once

// Rectifier MLP mapping an input vector to a parameter pair Theta_hat, its
// exact reverse-mode gradient under the weighted demand loss
//   sum_t w_t (D_t - (1, p_t)' Theta_hat)^2,
// and an Adam optimizer over the same parameter layout.

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "mtdemand/error.hpp"
#include "mtdemand/info_design.hpp"
#include "mtdemand/rng.hpp"

namespace mtdemand {

struct DenseLayer {
  Eigen::MatrixXd weights;  // out x in
  Eigen::VectorXd bias;     // out
};

struct MlpModel {
  std::vector<DenseLayer> layers;

  std::size_t input_dim() const { return layers.empty() ? 0 : layers.front().weights.cols(); }
  std::size_t output_dim() const { return layers.empty() ? 0 : layers.back().weights.rows(); }
  std::size_t depth() const { return layers.empty() ? 0 : layers.size() - 1; }
  std::size_t hidden_width() const { return layers.size() < 2 ? 0 : layers.front().weights.rows(); }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (const auto& l : layers) n += l.weights.size() + l.bias.size();
    return n;
  }

  /// `depth` hidden rectifier layers of size `width`, then a linear layer to 2.
  /// Weights ~ U(+-sqrt(6 / (fan_in + fan_out))), biases zero.
  static MlpModel create(std::size_t input_dim, std::size_t width, std::size_t depth, Rng& rng) {
    MlpModel m;
    std::size_t fan_in = input_dim;
    for (std::size_t l = 0; l <= depth; ++l) {
      const std::size_t fan_out = l == depth ? 2 : width;
      const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
      DenseLayer layer;
      layer.weights.resize(static_cast<Eigen::Index>(fan_out), static_cast<Eigen::Index>(fan_in));
      for (Eigen::Index i = 0; i < layer.weights.rows(); ++i)
        for (Eigen::Index j = 0; j < layer.weights.cols(); ++j)
          layer.weights(i, j) = rng.uniform(-limit, limit);
      layer.bias = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(fan_out));
      m.layers.push_back(std::move(layer));
      fan_in = fan_out;
    }
    return m;
  }

  static MlpModel zeros(std::size_t input_dim, std::size_t width, std::size_t depth) {
    Rng unused(0);
    MlpModel m = create(input_dim, width, depth, unused);
    for (auto& l : m.layers) l.weights.setZero();
    return m;
  }

  bool all_finite() const {
    for (const auto& l : layers)
      if (!l.weights.allFinite() || !l.bias.allFinite()) return false;
    return true;
  }
};

/// Gradient with the same shapes as the model.
using MlpGradient = MlpModel;

inline MlpGradient zero_gradient_like(const MlpModel& m) {
  MlpGradient g = m;
  for (auto& l : g.layers) {
    l.weights.setZero();
    l.bias.setZero();
  }
  return g;
}

namespace detail {

struct ForwardCache {
  std::vector<Eigen::MatrixXd> pre;   // pre-activations per layer
  std::vector<Eigen::MatrixXd> post;  // post[0] = input, post[l+1] = activation of layer l
};

inline void check_input(const MlpModel& m, Eigen::Index rows) {
  if (m.layers.empty()) throw Error(ErrorKind::DimensionMismatch, "empty network");
  if (rows != m.layers.front().weights.cols())
    throw Error(ErrorKind::DimensionMismatch,
                "input has " + std::to_string(rows) + " entries, network expects " +
                    std::to_string(m.layers.front().weights.cols()));
}

inline ForwardCache forward_cached(const MlpModel& m, const Eigen::MatrixXd& x) {
  check_input(m, x.rows());
  ForwardCache c;
  c.post.push_back(x);
  for (std::size_t l = 0; l < m.layers.size(); ++l) {
    Eigen::MatrixXd z = m.layers[l].weights * c.post.back();
    z.colwise() += m.layers[l].bias;
    c.pre.push_back(z);
    if (l + 1 < m.layers.size())
      c.post.push_back(z.cwiseMax(0.0));
    else
      c.post.push_back(std::move(z));
  }
  return c;
}

}  // namespace detail

/// Columns of `x` are inputs; returns a 2 x batch matrix.
inline Eigen::MatrixXd mlp_forward_batch(const MlpModel& model, const Eigen::MatrixXd& x) {
  detail::check_input(model, x.rows());
  Eigen::MatrixXd a = x;
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    Eigen::MatrixXd z = model.layers[l].weights * a;
    z.colwise() += model.layers[l].bias;
    a = l + 1 < model.layers.size() ? Eigen::MatrixXd(z.cwiseMax(0.0)) : z;
  }
  return a;
}

inline Eigen::Vector2d mlp_forward(const MlpModel& model, const Eigen::VectorXd& x) {
  if (model.output_dim() != 2) throw Error(ErrorKind::DimensionMismatch, "output must be 2-d");
  const Eigen::MatrixXd out = mlp_forward_batch(model, x);
  return out.col(0);
}

inline double weighted_demand_loss(const Eigen::Vector2d& theta,
                                   std::span<const SupervisionTarget> targets) {
  double loss = 0;
  for (const auto& t : targets) {
    const double r = t.demand - theta(0) - theta(1) * t.price;
    loss += t.weight * r * r;
  }
  return loss;
}

/// Adds scale * d(loss)/d(params) for a batch to `grad` and returns
/// scale * loss. Column j of `x` is supervised by targets[j].
inline double accumulate_gradient(const MlpModel& model, const Eigen::MatrixXd& x,
                                  std::span<const std::vector<SupervisionTarget>> targets,
                                  double scale, MlpGradient& grad) {
  if (static_cast<std::size_t>(x.cols()) != targets.size())
    throw Error(ErrorKind::DimensionMismatch, "one target list per input column required");
  const auto cache = detail::forward_cached(model, x);
  const Eigen::MatrixXd& out = cache.post.back();
  Eigen::MatrixXd delta(2, x.cols());
  double loss = 0;
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    double g0 = 0, g1 = 0;
    for (const auto& t : targets[static_cast<std::size_t>(j)]) {
      const double r = t.demand - out(0, j) - out(1, j) * t.price;
      loss += t.weight * r * r;
      g0 += -2.0 * t.weight * r;
      g1 += -2.0 * t.weight * r * t.price;
    }
    delta(0, j) = scale * g0;
    delta(1, j) = scale * g1;
  }
  for (std::size_t l = model.layers.size(); l-- > 0;) {
    grad.layers[l].weights.noalias() += delta * cache.post[l].transpose();
    grad.layers[l].bias += delta.rowwise().sum();
    if (l > 0) {
      Eigen::MatrixXd back = model.layers[l].weights.transpose() * delta;
      delta = back.cwiseProduct((cache.pre[l - 1].array() > 0.0).cast<double>().matrix());
    }
  }
  return scale * loss;
}

struct LossAndGradient {
  double loss = 0;
  MlpGradient gradient;
};

/// Exact gradient of sum_t w_t (D_t - P_t' f(x))^2 for one input.
inline LossAndGradient mlp_backward(const MlpModel& model, const Eigen::VectorXd& x,
                                    std::span<const SupervisionTarget> targets) {
  if (model.output_dim() != 2) throw Error(ErrorKind::DimensionMismatch, "output must be 2-d");
  LossAndGradient out{0, zero_gradient_like(model)};
  const std::vector<std::vector<SupervisionTarget>> one{
      std::vector<SupervisionTarget>(targets.begin(), targets.end())};
  out.loss = accumulate_gradient(model, x, one, 1.0, out.gradient);
  return out;
}

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

class AdamOptimizer {
 public:
  AdamOptimizer(const MlpModel& shape, AdamConfig config)
      : config_(config), m_(zero_gradient_like(shape)), v_(zero_gradient_like(shape)) {}

  void step(MlpModel& model, const MlpGradient& grad) {
    ++t_;
    const double c1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
    const double lr = config_.learning_rate * std::sqrt(c2) / c1;
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
      update(model.layers[l].weights, grad.layers[l].weights, m_.layers[l].weights,
             v_.layers[l].weights, lr);
      update(model.layers[l].bias, grad.layers[l].bias, m_.layers[l].bias, v_.layers[l].bias, lr);
    }
  }

  long steps() const { return t_; }

 private:
  template <class P, class G>
  void update(P& param, const G& g, P& m, P& v, double lr) const {
    m = config_.beta1 * m + (1.0 - config_.beta1) * g;
    v = config_.beta2 * v + (1.0 - config_.beta2) * g.cwiseProduct(g);
    param.array() -= lr * m.array() / (v.array().sqrt() + config_.epsilon);
  }

  AdamConfig config_;
  MlpGradient m_;
  MlpGradient v_;
  long t_ = 0;
};

}  // namespace mtdemand
