#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "mtdemand/bench.hpp"

using namespace mtdemand;

namespace {

ExperimentConfig tiny(std::vector<Method> methods) {
  ExperimentConfig c;
  c.gen = GenConfig::appendix_b(0.0, 200, 0);
  c.methods = std::move(methods);
  c.sigma_c = {0.0, 0.2};
  c.seeds = {0, 1, 2};
  c.train.hidden_width = 8;
  c.train.max_epochs = 5;
  return c;
}

}  // namespace

TEST(Results, GoldenHeader) {
  std::ostringstream out;
  write_results_csv(out, {});
  EXPECT_EQ(out.str(), "method,sigma_c,slope_mse,slope_hw,intercept_mse,intercept_hw,n_seeds\n");
}

TEST(Results, RoundTrip) {
  std::vector<MethodSummary> rows(2);
  rows[0] = {Method::EB_GLS, 0.1, 0.4231, 0.0123, 1.5, 0.25, 10, 0.0};
  rows[1] = {Method::META_NA, 0.0, 1.0 / 3.0, 0.0, 2e-17, 1e300, 1, 0.0};
  std::stringstream a;
  write_results_csv(a, rows);
  const auto back = read_results_csv(a);
  EXPECT_EQ(back, rows);
  std::ostringstream b;
  write_results_csv(b, back);
  EXPECT_EQ(a.str(), b.str());
}

TEST(Results, RejectsForeignHeader) {
  std::istringstream in("a,b\n1,2\n");
  EXPECT_THROW(read_results_csv(in), Error);
}

TEST(Histogram, CountsSumToN) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> v{-5, 0, 0.5, 0.999, 1, 2, nan, inf, -inf, 0.25};
  const auto h = histogram(v, 0.0, 1.0, 4);
  ASSERT_EQ(h.size(), 6u);
  std::size_t total = 0;
  for (const auto& b : h) total += b.count;
  EXPECT_EQ(total, v.size());
  EXPECT_EQ(h.front().count, 2u);  // -5, -inf
  EXPECT_EQ(h.back().count, 4u);   // 1, 2, inf, NaN
  EXPECT_EQ(h[1].count, 1u);
  EXPECT_EQ(h[2].count, 1u);
}

TEST(Histogram, BadRangeThrows) {
  EXPECT_THROW(histogram({1.0}, 1.0, 1.0, 3), Error);
  EXPECT_THROW(histogram({1.0}, 0.0, 1.0, 0), Error);
}

TEST(Benchmark, SerialEqualsParallel) {
  auto c = tiny({Method::DCMOML, Method::EB_GLS, Method::SHARED});
  c.jobs = 1;
  const auto a = run_benchmark(c);
  c.jobs = 2;
  const auto b = run_benchmark(c);
  ASSERT_EQ(a.summaries.size(), b.summaries.size());
  for (std::size_t i = 0; i < a.summaries.size(); ++i) {
    EXPECT_EQ(a.summaries[i].method, b.summaries[i].method);
    EXPECT_EQ(a.summaries[i].slope_mse, b.summaries[i].slope_mse);
    EXPECT_EQ(a.summaries[i].slope_hw, b.summaries[i].slope_hw);
    EXPECT_EQ(a.summaries[i].intercept_mse, b.summaries[i].intercept_mse);
  }
}

TEST(Benchmark, SummaryMatchesCells) {
  const auto rep = run_benchmark(tiny({Method::SHARED}));
  ASSERT_EQ(rep.cells.size(), 6u);
  const auto* s = rep.find(Method::SHARED, 0.2);
  ASSERT_NE(s, nullptr);
  EXPECT_EQ(s->n_seeds, 3u);
  double m = 0;
  for (const auto& c : rep.cells)
    if (c.sigma_c == 0.2) m += c.slope_mse / 3.0;
  EXPECT_NEAR(s->slope_mse, m, 1e-12);
  // predictions retained only for the first seed
  for (const auto& c : rep.cells) EXPECT_EQ(c.predictions.empty(), c.seed != 0);
}

TEST(Benchmark, ConstantMethodHasZeroHalfWidth) {
  // a noiseless world with no heterogeneity: SHARED is exact on every seed
  auto c = tiny({Method::SHARED});
  c.gen.param_cv = 0.0;
  c.gen.demand_noise_cv = 0.0;
  const auto rep = run_benchmark(c);
  for (const auto& s : rep.summaries) {
    EXPECT_NEAR(s.slope_mse, 0.0, 1e-18);
    EXPECT_NEAR(s.slope_hw, 0.0, 1e-15);
  }
  EXPECT_EQ(mean_se(std::vector<double>{0.3, 0.3, 0.3, 0.3}).half_width(), 0.0);
}

TEST(Benchmark, EmitOutputsWritesFiles) {
  auto c = tiny({Method::SHARED, Method::TASK_OLS});
  c.seeds = {0};
  const auto rep = run_benchmark(c);
  const auto dir = std::filesystem::temp_directory_path() / "mtdemand_bench_test";
  std::filesystem::remove_all(dir);
  emit_outputs(rep, c, dir);
  for (const char* f : {"results.csv", "timing.csv", "predictions.csv", "histograms.csv"})
    EXPECT_TRUE(std::filesystem::exists(dir / f)) << f;
  std::ifstream in(dir / "results.csv");
  EXPECT_EQ(read_results_csv(in).size(), 4u);
  std::filesystem::remove_all(dir);
}
