#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "mtdemand/demand.hpp"
#include "mtdemand/estimators.hpp"
#include "mtdemand/panel_io.hpp"
#include "mtdemand/stats.hpp"

using namespace mtdemand;

TEST(OptimalPrice, Examples) {
  EXPECT_DOUBLE_EQ(optimal_price({10, -1}), 5.0);
  EXPECT_DOUBLE_EQ(optimal_price({0, -1}), 0.0);
  try {
    optimal_price({1, 0.5});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NonNegativeSlope);
  }
}

TEST(MeanDemand, Examples) {
  EXPECT_DOUBLE_EQ(mean_demand({10, -1}, 5), 5.0);
  EXPECT_DOUBLE_EQ(mean_demand({1, -1}, 0), 1.0);
  EXPECT_DOUBLE_EQ(mean_demand({1, -1}, 0.5), 0.5);
}

TEST(Example1, PooledSlopeNearPopulationValue) {
  // Cov(D,p)/Var(p) with Var(theta0)=1, price noise sd 0.25, theta1=-1:
  // (0.25 - 0.0625) / (0.25 + 0.0625) = 0.6
  const auto panels = generate(GenConfig::example1(2000, 7));
  EXPECT_NEAR(shared_ols(panels).theta1, 0.6, 0.05);
  for (const auto& p : panels) EXPECT_EQ(p.true_params->theta1, -1.0);
}

TEST(Example1, NoiselessDemandIsHalfIntercept) {
  GenConfig c = GenConfig::example1(1, 3);
  c.price_noise_sd = 0;
  c.demand_noise_sd = 0;
  const auto p = generate(c).front();
  for (double d : p.demands) EXPECT_NEAR(d, p.true_params->theta0 / 2, 1e-12);
}

TEST(Example1, InterceptSampleMean) {
  const auto panels = generate(GenConfig::example1(10000, 11));
  std::vector<double> t0;
  for (const auto& p : panels) t0.push_back(p.true_params->theta0);
  EXPECT_NEAR(mean_se(t0).mean, 10.0, 0.05);
}

// Oracle: with sigma_c = 0 the task mean price is p* plus the average of two
// N(0, (0.1 p*)^2) draws, so corr^2 = Var(p*) / (Var(p*) + 0.005 E[p*^2]).
// p* moments come from the parameter priors drawn here directly.
TEST(AppendixB, PricesTrackOptimumWithoutConfounding) {
  std::mt19937_64 eng(99);
  std::normal_distribution<double> t0(1.0, 0.1), t1(-1.0, 0.1);
  double m1 = 0, m2 = 0;
  const int draws = 2000000;
  for (int i = 0; i < draws; ++i) {
    const double ps = t0(eng) / (-2.0 * t1(eng));
    m1 += ps;
    m2 += ps * ps;
  }
  m1 /= draws;
  m2 /= draws;
  const double var = m2 - m1 * m1;
  const double rho = std::sqrt(var / (var + 0.005 * m2));

  const auto panels = generate(GenConfig::appendix_b(0.0, 10000, 2));
  double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  for (const auto& p : panels) {
    const double x = 0.5 * (p.prices[0] + p.prices[1]);
    const double y = optimal_price(*p.true_params);
    sx += x, sy += y, sxx += x * x, syy += y * y, sxy += x * y;
  }
  const double n = static_cast<double>(panels.size());
  const double corr = (sxy - sx * sy / n) / std::sqrt((sxx - sx * sx / n) * (syy - sy * sy / n));
  EXPECT_NEAR(corr, rho, 3.0 * (1 - rho * rho) / std::sqrt(n));
  EXPECT_GT(corr, 0.85);
}

TEST(AppendixB, NoiselessAtOptimum) {
  GenConfig c = GenConfig::appendix_b(0.0, 50, 4);
  c.demand_noise_cv = 0;
  c.experiment_cv = 0;
  for (const auto& p : generate(c))
    for (double d : p.demands) EXPECT_NEAR(d, p.true_params->theta0 / 2, 1e-12);
}

TEST(AppendixB, SignalNoiseVariance) {
  // With experiment noise off, each price equals the manager's signal.
  GenConfig c = GenConfig::appendix_b(0.2, 40000, 9);
  c.experiment_cv = 0;
  std::vector<double> dev, ps;
  for (const auto& p : generate(c)) {
    const double ps_i = optimal_price(*p.true_params);
    dev.push_back((p.prices[0] - ps_i) / ps_i);
  }
  double ss = 0;
  for (double x : dev) ss += x * x;
  EXPECT_NEAR(ss / dev.size(), 0.04, 0.002);
}

TEST(TwoPointProbe, FinalPricesDifferByTwoDelta) {
  for (std::size_t k : {2u, 6u}) {
    for (const auto& p : generate(GenConfig::two_point_probe(k, 200, 1))) {
      ASSERT_EQ(p.size(), k);
      EXPECT_NEAR(std::abs(p.prices[k - 1] - p.prices[k - 2]), 0.1, 1e-12);
    }
  }
}

TEST(Generate, SameSeedSameData) {
  const auto a = generate(GenConfig::appendix_b(0.1, 100, 5));
  const auto b = generate(GenConfig::appendix_b(0.1, 100, 5));
  const auto c = generate(GenConfig::appendix_b(0.1, 100, 6));
  EXPECT_EQ(a, b);
  EXPECT_NE(a, c);
}

TEST(PanelIo, CsvAndJsonlRoundTrip) {
  auto panels = generate(GenConfig::appendix_b(0.1, 20, 1));
  panels[3].context = {};
  for (auto& p : panels) p.exposures = std::vector<int>{3, 4};
  std::stringstream csv_io, js_io;
  write_panels_csv(csv_io, panels);
  write_panels_jsonl(js_io, panels);
  const auto a = read_panels_csv(csv_io);
  const auto b = read_panels_jsonl(js_io);
  ASSERT_EQ(a.size(), panels.size());
  for (std::size_t i = 0; i < panels.size(); ++i) {
    EXPECT_EQ(a[i].prices, panels[i].prices);
    EXPECT_EQ(a[i].demands, panels[i].demands);
    EXPECT_EQ(a[i].exposures, panels[i].exposures);
  }
  EXPECT_EQ(b.size(), panels.size());
  EXPECT_EQ(b[5].prices, panels[5].prices);
}

TEST(PanelIo, MalformedRowIsReported) {
  std::istringstream in("task_id,k,price,demand,exposure,true_theta0,true_theta1\n0,1,abc,2,,,\n");
  try {
    read_panels_csv(in);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::MalformedRow);
  }
}
