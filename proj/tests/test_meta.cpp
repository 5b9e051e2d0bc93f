#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "mtdemand/meta.hpp"
#include "mtdemand/theory.hpp"

using namespace mtdemand;

namespace {

double theta_rmse(const SymmetricLinearModel& m, const std::vector<TaskPanel>& panels,
                  const GaussianOracle& o) {
  double se = 0;
  for (const auto& p : panels) {
    const DemandParams a = m.predict(p.prices[0], p.prices[1]);
    const DemandParams b = o.given_prices(p.prices);
    se += (a.theta0 - b.theta0) * (a.theta0 - b.theta0) + (a.theta1 - b.theta1) * (a.theta1 - b.theta1);
  }
  return std::sqrt(se / static_cast<double>(panels.size()));
}

double slope_mse(const std::vector<TaskPanel>& panels,
                 const std::vector<std::optional<DemandParams>>& est) {
  double s = 0;
  for (std::size_t i = 0; i < panels.size(); ++i) {
    const double e = est[i]->theta1 - panels[i].true_params->theta1;
    s += e * e;
  }
  return s / static_cast<double>(panels.size());
}

std::vector<TaskPanel> constant_world(std::size_t n, DemandParams t) {
  std::vector<TaskPanel> out;
  Rng rng(12);
  for (std::size_t i = 0; i < n; ++i) {
    TaskPanel p;
    p.task_id = static_cast<std::int64_t>(i);
    const double a = rng.uniform(0.5, 1.5), b = a + rng.uniform(0.1, 0.5) * (rng.coin() ? 1 : -1);
    p.prices = {a, b};
    p.demands = {mean_demand(t, a), mean_demand(t, b)};
    p.true_params = t;
    out.push_back(p);
  }
  return out;
}

}  // namespace

TEST(SymmetricLinear, Symmetric) {
  const auto m = symmetric_linear_fit(generate(GenConfig::example1(500, 1)));
  const DemandParams a = m.predict(1, 2), b = m.predict(2, 1);
  EXPECT_EQ(a.theta0, b.theta0);
  EXPECT_EQ(a.theta1, b.theta1);
}

TEST(SymmetricLinear, ConstantModelIgnoresPrices) {
  SymmetricLinearModel m;
  m.a = Eigen::Vector2d::Zero();
  m.c = Eigen::Vector2d(3, -1);
  EXPECT_EQ(m.predict(1, 2).theta0, m.predict(7, 9).theta0);
}

TEST(SymmetricLinear, RealizableConstantTarget) {
  const DemandParams t{4.0, -0.5};
  const auto m = symmetric_linear_fit(constant_world(300, t));
  for (double p : {0.3, 1.0, 2.5}) {
    EXPECT_NEAR(m.predict(p, p + 0.2).theta0, t.theta0, 1e-9);
    EXPECT_NEAR(m.predict(p, p + 0.2).theta1, t.theta1, 1e-9);
  }
}

TEST(SymmetricLinear, RejectsWrongShapes) {
  auto panels = generate(GenConfig::appendix_b(0.1, 10, 1));
  panels[0].prices.push_back(1.0);
  panels[0].demands.push_back(1.0);
  try {
    symmetric_linear_fit(panels);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InvalidConfig);
  }
}

TEST(SymmetricLinear, RecoversSlopeOnExample1) {
  const auto panels = generate(GenConfig::example1(2000, 7));
  const auto m = symmetric_linear_fit(panels);
  double s = 0;
  for (const auto& p : panels) s += m.predict(p.prices[0], p.prices[1]).theta1;
  const double mean = s / static_cast<double>(panels.size());
  EXPECT_GE(mean, -1.1);
  EXPECT_LE(mean, -0.9);
}

// Task count is not pinned for this check; at 2000 tasks the intercept gap is
// about 0.25 because theta0 and theta1 trade off along p ~ 5.
TEST(SymmetricLinear, NearOracleAtCentralInput) {
  const GenConfig g = GenConfig::example1(50000, 7);
  const auto m = symmetric_linear_fit(generate(g));
  const GaussianOracle o(g);
  const DemandParams a = m.predict(5.0, 5.1), b = o.given_prices({5.0, 5.1});
  EXPECT_NEAR(a.theta0, b.theta0, 0.1);
  EXPECT_NEAR(a.theta1, b.theta1, 0.1);
}

// The fit is consistent for the oracle: the parameter-space gap shrinks like
// 1/sqrt(N). At N = 2000 it is around 0.3 (weak identification along the
// price gap), so the < 0.05 level needs far more tasks.
TEST(SymmetricLinear, ConvergesToOracle) {
  const GenConfig small = GenConfig::example1(2000, 7), large = GenConfig::example1(200000, 7);
  const double r_small = theta_rmse(symmetric_linear_fit(generate(small)), generate(small),
                                    GaussianOracle(small));
  const double r_large = theta_rmse(symmetric_linear_fit(generate(large)), generate(large),
                                    GaussianOracle(large));
  EXPECT_LT(r_large, 0.05);
  EXPECT_LT(r_large, 0.5 * r_small);
}

TEST(AffineMeta, ExactOnLinearTarget) {
  // Theta = (2 + p1, -1 + 0.1 D1) is affine in the META input (p1, D1).
  std::vector<TaskPanel> panels;
  Rng rng(3);
  for (int i = 0; i < 50; ++i) {
    const double p1 = rng.uniform(1, 2), d1 = rng.uniform(0, 3), p2 = rng.uniform(1, 2);
    const DemandParams t{2 + p1, -1 + 0.1 * d1};
    panels.push_back({i, {}, {p1, p2}, {d1, mean_demand(t, p2)}, std::nullopt, t});
  }
  const TrainingSet set = build_training_set(panels, Design::META, LossMode::Averaged, 0);
  const AffineMetaModel m = affine_meta_fit(set);
  double worst = 0;
  for (const auto& p : panels) {
    const auto info = build_info_set(p, Design::META, final_index_assignment(p));
    const DemandParams e = m.predict(info);
    worst = std::max(worst, std::abs(mean_demand(e, p.prices[1]) - p.demands[1]));
  }
  EXPECT_LT(worst, 1e-9);
}

TEST(AffineMeta, LinearMetaIsBiasedOnExample1) {
  const auto panels = generate(GenConfig::example1(2000, 7));
  const AffineMetaModel m =
      affine_meta_fit(build_training_set(panels, Design::META, LossMode::Averaged, 7));
  double s = 0;
  for (const auto& p : predict_panels(m, panels, Design::META, 7)) s += p->theta1;
  EXPECT_GT(std::abs(s / static_cast<double>(panels.size()) + 1.0), 0.2);
}

TEST(EarlyStopping, PlantedMinimum) {
  const std::vector<double> losses{5, 4, 3, 2.5, 2.2, 2.1, 2.0, 1.5, 1.7, 1.6, 1.55, 1.9, 1.4};
  EarlyStopping<int> es(4);
  std::size_t stopped_at = 0;
  for (std::size_t e = 0; e < losses.size(); ++e) {
    es.update(e, losses[e], static_cast<int>(100 + e));
    if (es.should_stop()) {
      stopped_at = e;
      break;
    }
  }
  EXPECT_EQ(stopped_at, 11u);
  EXPECT_EQ(es.best_epoch(), 7u);
  EXPECT_EQ(es.best(), 107);
  EXPECT_EQ(es.best_loss(), 1.5);
}

TEST(TrainConfig, Validation) {
  TrainConfig c;
  c.validation_fraction = 1.0;
  EXPECT_THROW(c.validate(), Error);
  c = TrainConfig{};
  c.patience = 0;
  EXPECT_THROW(c.validate(), Error);
  EXPECT_NO_THROW(TrainConfig::retail().validate());
  EXPECT_EQ(TrainConfig::wide_synthetic().depth, 4u);
}

TEST(Train, RealizableConstantWorldInterpolates) {
  TrainConfig c;
  c.hidden_width = 16;
  c.max_epochs = 400;
  c.patience = 50;
  c.learning_rate = 3e-3;
  c.batch_size = 64;
  const auto r = train(constant_world(400, {3.0, -1.0}), c);
  EXPECT_LT(r.log.epochs[r.log.best_epoch].train_loss, 1e-4);
  EXPECT_TRUE(r.model.net.all_finite());
  EXPECT_EQ(r.log.n_train_tasks + r.log.n_validation_tasks, 400u);
}

TEST(Train, DeterministicForSeed) {
  TrainConfig c;
  c.hidden_width = 8;
  c.max_epochs = 5;
  const auto panels = generate(GenConfig::appendix_b(0.1, 300, 2));
  const auto a = train(panels, c), b = train(panels, c);
  EXPECT_EQ(a.model.net.layers[0].weights, b.model.net.layers[0].weights);
  EXPECT_EQ(a.log.best_validation_loss, b.log.best_validation_loss);
}

TEST(Train, DropsTasksWithoutTwoPrices) {
  auto panels = generate(GenConfig::appendix_b(0.1, 200, 2));
  panels[5].prices[1] = panels[5].prices[0];
  TrainConfig c;
  c.hidden_width = 8;
  c.max_epochs = 2;
  EXPECT_EQ(train(panels, c).log.dropped_tasks, 1u);
}

TEST(Train, DcmomlBeatsMetaWithoutConfounding) {
  const auto panels = generate(GenConfig::appendix_b(0.0, 5000, 0));
  TrainConfig c;
  const auto dc = train(panels, c);
  c.design = Design::META;
  const auto me = train(panels, c);
  const double a = slope_mse(panels, predict_panels(dc.model, panels, Design::DCMOML, c.seed));
  const double b = slope_mse(panels, predict_panels(me.model, panels, Design::META, c.seed));
  EXPECT_LT(a, b);
}

TEST(Train, DcmlFarWorseThanDcmomlUnderConfounding) {
  const auto panels = generate(GenConfig::appendix_b(0.1, 5000, 1));
  TrainConfig c;
  const auto dc = train(panels, c);
  c.design = Design::DCML;
  const auto dl = train(panels, c);
  const double a = slope_mse(panels, predict_panels(dc.model, panels, Design::DCMOML, c.seed));
  const double b = slope_mse(panels, predict_panels(dl.model, panels, Design::DCML, c.seed));
  EXPECT_GE(b, 10.0 * a);
}

TEST(Checkpoint, RoundTripPreservesPredictions) {
  TrainConfig c;
  c.hidden_width = 8;
  c.max_epochs = 3;
  const auto panels = generate(GenConfig::appendix_b(0.1, 200, 4));
  const auto r = train(panels, c);
  std::stringstream ss;
  save_model(ss, r.model);
  const MetaModel back = load_model(ss);
  const auto a = predict_panels(r.model, panels, Design::DCMOML, 0);
  const auto b = predict_panels(back, panels, Design::DCMOML, 0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i]->theta0, b[i]->theta0);
    EXPECT_EQ(a[i]->theta1, b[i]->theta1);
  }
}

TEST(Checkpoint, RejectsForeignFormat) {
  std::stringstream ss("{\"format\": \"something-else\"}\n");
  EXPECT_THROW(load_model(ss), Error);
}

TEST(MetaModel, RejectsOtherDesign) {
  TrainConfig c;
  c.hidden_width = 4;
  c.max_epochs = 1;
  const auto panels = generate(GenConfig::appendix_b(0.1, 100, 4));
  const auto r = train(panels, c);
  try {
    r.model.predict(build_info_set(panels[0], Design::META, final_index_assignment(panels[0])));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DimensionMismatch);
  }
}
