#pragma once

// Meta-learners g: information set -> Theta_hat.
//
//  * SymmetricLinearModel  theta_j = a_j (p_1 + p_2) + c_j, closed-form DCMOML
//  * AffineMetaModel       theta = A x + c on the flattened info vector, fitted
//                          by minimum-norm least squares (META-LINEAR is the
//                          outcome-based estimator A [p_1, D_1]' + B)
//  * MetaModel             rectifier MLP trained with Adam and early stopping

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <istream>
#include <limits>
#include <numeric>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "mtdemand/demand.hpp"
#include "mtdemand/error.hpp"
#include "mtdemand/info_design.hpp"
#include "mtdemand/mlp.hpp"
#include "mtdemand/rng.hpp"

namespace mtdemand {

using ParamPredictor = std::function<DemandParams(const MaskedInfoSet&)>;

// ---------------------------------------------------------------------------
// Symmetric linear DCMOML learner (K = 2).

struct SymmetricLinearModel {
  Eigen::Vector2d a = Eigen::Vector2d::Zero();
  Eigen::Vector2d c = Eigen::Vector2d::Zero();

  DemandParams predict(double p1, double p2) const {
    const double s = p1 + p2;
    return {a(0) * s + c(0), a(1) * s + c(1)};
  }

  DemandParams predict(const MaskedInfoSet& info) const {
    if (info.prices.size() != 2)
      throw Error(ErrorKind::DimensionMismatch, "symmetric linear model takes two prices");
    return predict(info.prices[0], info.prices[1]);
  }
};

/// Minimizes the averaged DCMOML loss
///   sum_i 1/2 sum_k (D_ik - theta0(s_i) - theta1(s_i) p_ik)^2,  s_i = p_i1 + p_i2,
/// over (a, c): a 4-unknown least-squares problem.
inline SymmetricLinearModel symmetric_linear_fit(const std::vector<TaskPanel>& panels) {
  if (panels.empty()) throw Error(ErrorKind::SingularDesign, "no panels");
  const auto n = static_cast<Eigen::Index>(panels.size());
  Eigen::MatrixXd design(2 * n, 4);
  Eigen::VectorXd y(2 * n);
  const double w = std::sqrt(0.5);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& p = panels[static_cast<std::size_t>(i)];
    if (p.size() != 2) throw Error(ErrorKind::InvalidConfig, "symmetric linear fit needs K = 2");
    if (p.prices[0] == p.prices[1])
      throw Error(ErrorKind::SingularDesign, "task with two equal prices");
    const double s = p.prices[0] + p.prices[1];
    for (Eigen::Index k = 0; k < 2; ++k) {
      const double pk = p.prices[static_cast<std::size_t>(k)];
      design.row(2 * i + k) << w * s, w, w * pk * s, w * pk;
      y(2 * i + k) = w * p.demands[static_cast<std::size_t>(k)];
    }
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  if (qr.rank() < 4) throw Error(ErrorKind::SingularDesign, "normal matrix is singular");
  const Eigen::Vector4d sol = qr.solve(y);
  SymmetricLinearModel m;
  m.a << sol(0), sol(2);
  m.c << sol(1), sol(3);
  return m;
}

// ---------------------------------------------------------------------------
// Training sets shared by the affine and MLP learners.

struct TrainingExample {
  std::size_t group = 0;  // task position; train/validation split is by group
  std::vector<double> input;
  std::vector<SupervisionTarget> targets;
};

struct TrainingSet {
  std::optional<InputLayout> layout;
  std::size_t input_dim = 0;
  std::size_t n_groups = 0;
  std::vector<TrainingExample> examples;
  std::vector<std::int64_t> group_task_ids;
  std::size_t dropped = 0;
};

inline QueryAssignment assignment_for(const TaskPanel& panel, Design design, std::uint64_t seed) {
  return randomizes_query(design) ? assign_query(panel, seed) : final_index_assignment(panel);
}

/// One example per task. Tasks without two distinct prices are dropped (and
/// counted) for the designs that need k_star.
inline TrainingSet build_training_set(const std::vector<TaskPanel>& panels, Design design,
                                      LossMode mode, std::uint64_t query_seed,
                                      bool exposure_inputs = false) {
  if (panels.empty()) throw Error(ErrorKind::EmptyTrainSet, "no panels");
  TrainingSet set;
  InputLayout layout{design, panels.front().context.size(), panels.front().size(), exposure_inputs};
  set.layout = layout;
  set.input_dim = layout.dimension();
  for (const auto& panel : panels) {
    try {
      const QueryAssignment a = assignment_for(panel, design, query_seed);
      TrainingExample ex;
      ex.group = set.n_groups;
      ex.input = flatten(build_info_set(panel, design, a), layout);
      ex.targets = supervision_targets(panel, design, a, mode);
      set.examples.push_back(std::move(ex));
      set.group_task_ids.push_back(panel.task_id);
      ++set.n_groups;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::AllPricesEqual) throw;
      ++set.dropped;
    }
  }
  return set;
}

// ---------------------------------------------------------------------------
// Affine learner: theta = A x + c, fitted by minimum-norm least squares so
// that rank-deficient designs (DCML) still return a well-defined minimizer.

struct AffineMetaModel {
  InputLayout layout;
  Eigen::MatrixXd gain;  // 2 x d
  Eigen::Vector2d offset = Eigen::Vector2d::Zero();

  DemandParams predict_input(const std::vector<double>& x) const {
    if (static_cast<Eigen::Index>(x.size()) != gain.cols())
      throw Error(ErrorKind::DimensionMismatch, "affine model input size");
    const Eigen::Vector2d t =
        gain * Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size())) +
        offset;
    return {t(0), t(1)};
  }

  DemandParams predict(const MaskedInfoSet& info) const {
    return predict_input(flatten(info, layout));
  }
};

inline AffineMetaModel affine_meta_fit(const TrainingSet& set) {
  if (set.examples.empty()) throw Error(ErrorKind::EmptyTrainSet, "no examples");
  const auto d = static_cast<Eigen::Index>(set.input_dim);
  Eigen::Index rows = 0;
  for (const auto& ex : set.examples) rows += static_cast<Eigen::Index>(ex.targets.size());
  // Unknowns: [A row 0 | c0 | A row 1 | c1]; prediction D = theta0 + p theta1.
  Eigen::MatrixXd design(rows, 2 * (d + 1));
  Eigen::VectorXd y(rows);
  Eigen::Index r = 0;
  for (const auto& ex : set.examples) {
    Eigen::VectorXd x1(d + 1);
    for (Eigen::Index j = 0; j < d; ++j) x1(j) = ex.input[static_cast<std::size_t>(j)];
    x1(d) = 1.0;
    for (const auto& t : ex.targets) {
      const double w = std::sqrt(t.weight);
      design.row(r).head(d + 1) = w * x1.transpose();
      design.row(r).tail(d + 1) = w * t.price * x1.transpose();
      y(r) = w * t.demand;
      ++r;
    }
  }
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(design);
  const Eigen::VectorXd sol = cod.solve(y);
  AffineMetaModel m;
  if (set.layout) m.layout = *set.layout;
  m.gain.resize(2, d);
  m.gain.row(0) = sol.head(d).transpose();
  m.gain.row(1) = sol.segment(d + 1, d).transpose();
  m.offset << sol(d), sol(2 * d + 1);
  return m;
}

// ---------------------------------------------------------------------------
// MLP meta-learner.

struct TrainConfig {
  double learning_rate = 1e-3;
  std::size_t batch_size = 256;
  std::size_t max_epochs = 500;
  std::size_t patience = 20;
  double validation_fraction = 0.2;
  Design design = Design::DCMOML;
  LossMode loss_mode = LossMode::Averaged;
  std::uint64_t seed = 0;
  std::size_t hidden_width = 64;
  std::size_t depth = 2;
  bool exposure_inputs = false;

  /// Synthetic-experiment architecture from the design-alternatives study.
  static TrainConfig wide_synthetic() {
    TrainConfig c;
    c.hidden_width = 128;
    c.depth = 4;
    return c;
  }
  /// Retail architecture: Linear(d,256)-ReLU-Linear(256,256)-ReLU-Linear(256,2).
  static TrainConfig retail() {
    TrainConfig c;
    c.hidden_width = 256;
    c.depth = 2;
    return c;
  }

  void validate() const {
    if (!(validation_fraction > 0.0 && validation_fraction < 1.0))
      throw Error(ErrorKind::InvalidConfig, "validation_fraction must lie in (0, 1)");
    if (patience < 1) throw Error(ErrorKind::InvalidConfig, "patience must be >= 1");
    if (batch_size < 1) throw Error(ErrorKind::InvalidConfig, "batch_size must be >= 1");
    if (!(learning_rate > 0)) throw Error(ErrorKind::InvalidConfig, "learning_rate must be > 0");
    if (hidden_width < 1 || depth < 1)
      throw Error(ErrorKind::InvalidConfig, "network needs width >= 1 and depth >= 1");
  }
};

struct Standardizer {
  std::vector<double> mean;
  std::vector<double> scale;

  Eigen::VectorXd apply(const std::vector<double>& x) const {
    if (x.size() != mean.size())
      throw Error(ErrorKind::DimensionMismatch, "input has " + std::to_string(x.size()) +
                                                    " entries, model expects " +
                                                    std::to_string(mean.size()));
    Eigen::VectorXd z(static_cast<Eigen::Index>(x.size()));
    for (std::size_t j = 0; j < x.size(); ++j)
      z(static_cast<Eigen::Index>(j)) = (x[j] - mean[j]) / scale[j];
    return z;
  }
};

/// The network predicts (a, b) in standardized price/demand units,
///   (D - dc) / ds = a + b (p - pc) / ps,
/// which maps back to theta1 = ds b / ps and theta0 = dc + ds a - theta1 pc.
struct OutputScaling {
  double price_center = 0.0;
  double price_scale = 1.0;
  double demand_center = 0.0;
  double demand_scale = 1.0;

  DemandParams to_params(const Eigen::Vector2d& out) const {
    const double theta1 = demand_scale * out(1) / price_scale;
    return {demand_center + demand_scale * out(0) - theta1 * price_center, theta1};
  }

  SupervisionTarget to_internal(const SupervisionTarget& t) const {
    SupervisionTarget s = t;
    s.price = (t.price - price_center) / price_scale;
    s.demand = (t.demand - demand_center) / demand_scale;
    return s;
  }
};

struct MetaModel {
  std::optional<InputLayout> layout;
  Design design = Design::DCMOML;
  Standardizer input;
  OutputScaling output;
  MlpModel net;

  DemandParams predict_input(const std::vector<double>& x) const {
    return output.to_params(mlp_forward(net, input.apply(x)));
  }

  DemandParams predict(const MaskedInfoSet& info) const {
    if (!layout) throw Error(ErrorKind::DimensionMismatch, "model has no info-set layout");
    if (info.design != layout->design)
      throw Error(ErrorKind::DimensionMismatch, "info set design differs from training design");
    return predict_input(flatten(info, *layout));
  }
};

inline DemandParams predict_params(const MetaModel& model, const MaskedInfoSet& info) {
  return model.predict(info);
}

/// Keeps the snapshot with the smallest validation loss and signals a stop
/// once `patience` consecutive epochs fail to improve on it.
template <class Snapshot>
class EarlyStopping {
 public:
  explicit EarlyStopping(std::size_t patience) : patience_(patience) {}

  bool update(std::size_t epoch, double validation_loss, const Snapshot& snapshot) {
    if (!best_ || validation_loss < best_loss_) {
      best_ = snapshot;
      best_loss_ = validation_loss;
      best_epoch_ = epoch;
      stale_ = 0;
      return true;
    }
    ++stale_;
    return false;
  }

  bool should_stop() const { return stale_ >= patience_; }
  const Snapshot& best() const { return *best_; }
  double best_loss() const { return best_loss_; }
  std::size_t best_epoch() const { return best_epoch_; }

 private:
  std::size_t patience_;
  std::optional<Snapshot> best_;
  double best_loss_ = std::numeric_limits<double>::infinity();
  std::size_t best_epoch_ = 0;
  std::size_t stale_ = 0;
};

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0;
  double validation_loss = 0;
};

struct TrainingLog {
  std::vector<EpochRecord> epochs;
  std::size_t best_epoch = 0;
  double best_validation_loss = 0;
  bool stopped_early = false;
  std::size_t n_train_tasks = 0;
  std::size_t n_validation_tasks = 0;
  std::size_t dropped_tasks = 0;
};

struct TrainResult {
  MetaModel model;
  TrainingLog log;
};

namespace detail {

struct Split {
  std::vector<std::size_t> train, validation;
};

inline Split split_groups(std::size_t n_groups, double validation_fraction, std::uint64_t seed) {
  if (n_groups < 2) throw Error(ErrorKind::EmptyTrainSet, "need at least two tasks to split");
  std::vector<std::size_t> order(n_groups);
  std::iota(order.begin(), order.end(), 0);
  Rng rng = Rng::stream(seed, StreamDomain::Split);
  std::shuffle(order.begin(), order.end(), rng.engine());
  auto n_val = static_cast<std::size_t>(
      std::llround(validation_fraction * static_cast<double>(n_groups)));
  n_val = std::clamp<std::size_t>(n_val, 1, n_groups - 1);
  Split s;
  s.validation.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_val));
  s.train.assign(order.begin() + static_cast<std::ptrdiff_t>(n_val), order.end());
  std::sort(s.validation.begin(), s.validation.end());
  std::sort(s.train.begin(), s.train.end());
  return s;
}

inline std::pair<double, double> mean_and_scale(const std::vector<double>& v,
                                                const std::vector<double>& w) {
  double sw = 0, s = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    sw += w[i];
    s += w[i] * v[i];
  }
  const double mean = sw > 0 ? s / sw : 0.0;
  double ss = 0;
  for (std::size_t i = 0; i < v.size(); ++i) ss += w[i] * (v[i] - mean) * (v[i] - mean);
  const double sd = sw > 0 ? std::sqrt(ss / sw) : 0.0;
  return {mean, sd > 1e-12 * (1.0 + std::abs(mean)) ? sd : 1.0};
}

}  // namespace detail

/// Adam on minibatches of tasks; the minibatch loss is the mean over tasks of
/// each task's weighted squared demand error. Validation loss uses the same
/// objective on held-out tasks; the best-validation snapshot is returned.
inline TrainResult train_meta(const TrainingSet& set, const TrainConfig& cfg) {
  cfg.validate();
  if (set.examples.empty() || set.n_groups == 0)
    throw Error(ErrorKind::EmptyTrainSet, "no usable tasks");
  const detail::Split split = detail::split_groups(set.n_groups, cfg.validation_fraction, cfg.seed);

  std::vector<std::vector<std::size_t>> by_group(set.n_groups);
  for (std::size_t e = 0; e < set.examples.size(); ++e)
    by_group[set.examples[e].group].push_back(e);

  MetaModel model;
  model.layout = set.layout;
  model.design = set.layout ? set.layout->design : cfg.design;
  const std::size_t dim = set.input_dim;

  // Standardization constants come from the training split only.
  {
    std::vector<double> mean(dim, 0.0), sq(dim, 0.0);
    double count = 0;
    std::vector<double> prices, demands, weights;
    for (std::size_t g : split.train)
      for (std::size_t e : by_group[g]) {
        const auto& ex = set.examples[e];
        for (std::size_t j = 0; j < dim; ++j) mean[j] += ex.input[j];
        count += 1;
        for (const auto& t : ex.targets) {
          prices.push_back(t.price);
          demands.push_back(t.demand);
          weights.push_back(t.weight);
        }
      }
    for (auto& m : mean) m /= count;
    for (std::size_t g : split.train)
      for (std::size_t e : by_group[g])
        for (std::size_t j = 0; j < dim; ++j) {
          const double d = set.examples[e].input[j] - mean[j];
          sq[j] += d * d;
        }
    model.input.mean = mean;
    model.input.scale.resize(dim);
    for (std::size_t j = 0; j < dim; ++j) {
      const double sd = std::sqrt(sq[j] / count);
      model.input.scale[j] = sd > 1e-12 * (1.0 + std::abs(mean[j])) ? sd : 1.0;
    }
    const auto [pc, ps] = detail::mean_and_scale(prices, weights);
    const auto [dc, ds] = detail::mean_and_scale(demands, weights);
    model.output = OutputScaling{pc, ps, dc, ds};
  }

  Eigen::MatrixXd inputs(static_cast<Eigen::Index>(dim),
                         static_cast<Eigen::Index>(set.examples.size()));
  std::vector<std::vector<SupervisionTarget>> targets(set.examples.size());
  for (std::size_t e = 0; e < set.examples.size(); ++e) {
    inputs.col(static_cast<Eigen::Index>(e)) = model.input.apply(set.examples[e].input);
    for (const auto& t : set.examples[e].targets)
      targets[e].push_back(model.output.to_internal(t));
  }

  Rng init_rng = Rng::stream(cfg.seed, StreamDomain::Init);
  model.net = MlpModel::create(dim, cfg.hidden_width, cfg.depth, init_rng);
  AdamOptimizer adam(model.net, AdamConfig{cfg.learning_rate});
  const double unit = model.output.demand_scale * model.output.demand_scale;

  auto batch_of = [&](std::span<const std::size_t> groups) {
    std::vector<std::size_t> ex;
    for (std::size_t g : groups) ex.insert(ex.end(), by_group[g].begin(), by_group[g].end());
    Eigen::MatrixXd x(inputs.rows(), static_cast<Eigen::Index>(ex.size()));
    std::vector<std::vector<SupervisionTarget>> t(ex.size());
    for (std::size_t i = 0; i < ex.size(); ++i) {
      x.col(static_cast<Eigen::Index>(i)) = inputs.col(static_cast<Eigen::Index>(ex[i]));
      t[i] = targets[ex[i]];
    }
    return std::pair{std::move(x), std::move(t)};
  };
  auto [val_x, val_t] = batch_of(split.validation);
  auto validation_loss = [&](const MlpModel& net) {
    const Eigen::MatrixXd out = mlp_forward_batch(net, val_x);
    double loss = 0;
    for (std::size_t i = 0; i < val_t.size(); ++i)
      loss += weighted_demand_loss(out.col(static_cast<Eigen::Index>(i)), val_t[i]);
    return loss / static_cast<double>(split.validation.size());
  };

  TrainResult result;
  result.log.n_train_tasks = split.train.size();
  result.log.n_validation_tasks = split.validation.size();
  result.log.dropped_tasks = set.dropped;
  EarlyStopping<MlpModel> stopper(cfg.patience);
  std::vector<std::size_t> order = split.train;
  MlpGradient grad = zero_gradient_like(model.net);
  for (std::size_t epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    Rng shuffle_rng = Rng::stream(cfg.seed, StreamDomain::Shuffle, epoch);
    std::shuffle(order.begin(), order.end(), shuffle_rng.engine());
    double train_loss = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t stop = std::min(order.size(), start + cfg.batch_size);
      const std::span<const std::size_t> groups(order.data() + start, stop - start);
      auto [x, t] = batch_of(groups);
      for (auto& l : grad.layers) {
        l.weights.setZero();
        l.bias.setZero();
      }
      train_loss += accumulate_gradient(model.net, x, t, 1.0 / static_cast<double>(groups.size()),
                                        grad) *
                    static_cast<double>(groups.size());
      adam.step(model.net, grad);
    }
    train_loss /= static_cast<double>(order.size());
    const double val = validation_loss(model.net);
    result.log.epochs.push_back({epoch, train_loss * unit, val * unit});
    stopper.update(epoch, val, model.net);
    if (stopper.should_stop()) {
      result.log.stopped_early = true;
      break;
    }
  }
  model.net = stopper.best();
  result.log.best_epoch = stopper.best_epoch();
  result.log.best_validation_loss = stopper.best_loss() * unit;
  result.model = std::move(model);
  return result;
}

/// Builds the design's training set from panels and trains an MLP on it.
inline TrainResult train(const std::vector<TaskPanel>& panels, const TrainConfig& cfg) {
  const TrainingSet set =
      build_training_set(panels, cfg.design, cfg.loss_mode, cfg.seed, cfg.exposure_inputs);
  if (set.examples.empty()) throw Error(ErrorKind::EmptyTrainSet, "every task was dropped");
  return train_meta(set, cfg);
}

/// Predictions for each panel under the model's design (nullopt for tasks the
/// design cannot use).
template <class Model>
std::vector<std::optional<DemandParams>> predict_panels(const Model& model,
                                                        const std::vector<TaskPanel>& panels,
                                                        Design design, std::uint64_t query_seed) {
  std::vector<std::optional<DemandParams>> out;
  out.reserve(panels.size());
  for (const auto& p : panels) {
    try {
      const QueryAssignment a = assignment_for(p, design, query_seed);
      out.push_back(model.predict(build_info_set(p, design, a)));
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::AllPricesEqual) throw;
      out.push_back(std::nullopt);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Checkpoints: layer shapes, row-major weights, standardization constants and
// the design tag, all as JSON numbers (round-trip exact).

inline nlohmann::json model_to_json(const MetaModel& m) {
  nlohmann::json j;
  j["format"] = "mtdemand-meta-model/1";
  j["design"] = std::string(to_string(m.design));
  if (m.layout) {
    j["layout"] = {{"design", std::string(to_string(m.layout->design))},
                   {"context_dim", m.layout->context_dim},
                   {"k_obs", m.layout->k_obs},
                   {"exposure_inputs", m.layout->exposure_inputs}};
  } else {
    j["layout"] = nullptr;
  }
  j["input_mean"] = m.input.mean;
  j["input_scale"] = m.input.scale;
  j["output_scaling"] = {{"price_center", m.output.price_center},
                         {"price_scale", m.output.price_scale},
                         {"demand_center", m.output.demand_center},
                         {"demand_scale", m.output.demand_scale}};
  j["layers"] = nlohmann::json::array();
  for (const auto& l : m.net.layers) {
    std::vector<double> w;
    w.reserve(static_cast<std::size_t>(l.weights.size()));
    for (Eigen::Index r = 0; r < l.weights.rows(); ++r)
      for (Eigen::Index c = 0; c < l.weights.cols(); ++c) w.push_back(l.weights(r, c));
    j["layers"].push_back({{"rows", l.weights.rows()},
                           {"cols", l.weights.cols()},
                           {"weights", w},
                           {"bias", std::vector<double>(l.bias.data(), l.bias.data() + l.bias.size())}});
  }
  return j;
}

inline MetaModel model_from_json(const nlohmann::json& j) {
  try {
    if (j.at("format").get<std::string>() != "mtdemand-meta-model/1")
      throw Error(ErrorKind::InvalidConfig, "unknown checkpoint format");
    MetaModel m;
    m.design = parse_design(j.at("design").get<std::string>());
    if (!j.at("layout").is_null()) {
      const auto& l = j["layout"];
      m.layout = InputLayout{parse_design(l.at("design").get<std::string>()),
                             l.at("context_dim").get<std::size_t>(),
                             l.at("k_obs").get<std::size_t>(),
                             l.at("exposure_inputs").get<bool>()};
    }
    m.input.mean = j.at("input_mean").get<std::vector<double>>();
    m.input.scale = j.at("input_scale").get<std::vector<double>>();
    const auto& o = j.at("output_scaling");
    m.output = OutputScaling{o.at("price_center").get<double>(), o.at("price_scale").get<double>(),
                             o.at("demand_center").get<double>(),
                             o.at("demand_scale").get<double>()};
    for (const auto& lj : j.at("layers")) {
      const auto rows = lj.at("rows").get<Eigen::Index>();
      const auto cols = lj.at("cols").get<Eigen::Index>();
      const auto w = lj.at("weights").get<std::vector<double>>();
      const auto b = lj.at("bias").get<std::vector<double>>();
      if (static_cast<Eigen::Index>(w.size()) != rows * cols ||
          static_cast<Eigen::Index>(b.size()) != rows)
        throw Error(ErrorKind::DimensionMismatch, "checkpoint layer shape");
      DenseLayer layer;
      layer.weights.resize(rows, cols);
      for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c)
          layer.weights(r, c) = w[static_cast<std::size_t>(r * cols + c)];
      layer.bias = Eigen::Map<const Eigen::VectorXd>(b.data(), rows);
      m.net.layers.push_back(std::move(layer));
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::InvalidConfig, std::string("checkpoint: ") + e.what());
  }
}

inline void save_model(std::ostream& out, const MetaModel& m) { out << model_to_json(m).dump() << '\n'; }

inline MetaModel load_model(std::istream& in) {
  try {
    return model_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::InvalidConfig, std::string("checkpoint: ") + e.what());
  }
}

}  // namespace mtdemand
