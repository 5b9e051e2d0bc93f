#include <gtest/gtest.h>

#include <functional>
#include <sstream>

#include "mtdemand/bench.hpp"

using namespace mtdemand;

namespace {

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorKind::IoError;
}

}  // namespace

TEST(Config, ParsesFile) {
  std::istringstream in(R"(# comment
world = example1
n_tasks = 1234
methods = DCMOML, META ,EB-GLS
sigma_c = 0,0.05
seeds = 3..6   # trailing comment
train.hidden_width = 16
train.loss_mode = sampled
eb.method = moments
histogram.theta1_range = -2, 0
)");
  const auto c = parse_experiment_config(in);
  EXPECT_EQ(c.gen.world, World::Example1);
  EXPECT_EQ(c.gen.n_tasks, 1234u);
  EXPECT_EQ(c.methods, (std::vector<Method>{Method::DCMOML, Method::META, Method::EB_GLS}));
  EXPECT_EQ(c.sigma_c, (std::vector<double>{0.0, 0.05}));
  EXPECT_EQ(c.seeds, (std::vector<std::uint64_t>{3, 4, 5, 6}));
  EXPECT_EQ(c.train.hidden_width, 16u);
  EXPECT_EQ(c.train.loss_mode, LossMode::Sampled);
  EXPECT_EQ(c.eb.method, EbMethod::Moments);
  ASSERT_TRUE(c.histogram.theta1_range);
  EXPECT_EQ(c.histogram.theta1_range->first, -2.0);
  EXPECT_NO_THROW(c.validate());
}

TEST(Config, WorldSwitchKeepsSize) {
  ExperimentConfig c;
  apply_setting(c, "n_tasks", "77");
  apply_setting(c, "world", "example1");
  EXPECT_EQ(c.gen.n_tasks, 77u);
}

TEST(Config, SeedList) {
  ExperimentConfig c;
  apply_setting(c, "seeds", "5, 1,9");
  EXPECT_EQ(c.seeds, (std::vector<std::uint64_t>{5, 1, 9}));
}

TEST(Config, PresetKeepsSeed) {
  ExperimentConfig c;
  c.train.seed = 42;
  apply_setting(c, "train.preset", "retail");
  EXPECT_EQ(c.train.seed, 42u);
  EXPECT_EQ(c.train.hidden_width, TrainConfig::retail().hidden_width);
}

TEST(Config, Errors) {
  ExperimentConfig c;
  EXPECT_EQ(kind_of([&] { apply_setting(c, "nope", "1"); }), ErrorKind::InvalidConfig);
  EXPECT_EQ(kind_of([&] { apply_setting(c, "seeds", "9..3"); }), ErrorKind::InvalidConfig);
  EXPECT_EQ(kind_of([&] { apply_setting(c, "seeds", "-1"); }), ErrorKind::InvalidConfig);
  EXPECT_EQ(kind_of([&] { apply_setting(c, "n_tasks", "ten"); }), ErrorKind::InvalidConfig);
  EXPECT_EQ(kind_of([&] { apply_setting(c, "methods", "DCMOML,FOO"); }), ErrorKind::InvalidConfig);
  EXPECT_EQ(kind_of([&] { apply_setting(c, "eb.diagonal", "yes"); }), ErrorKind::InvalidConfig);
  EXPECT_EQ(kind_of([&] { apply_setting(c, "histogram.theta0_range", "1"); }), ErrorKind::InvalidConfig);
  std::istringstream bad("n_tasks 5\n");
  EXPECT_EQ(kind_of([&] { parse_experiment_config(bad); }), ErrorKind::InvalidConfig);
}

TEST(Config, ValidateRejectsEmptyAndNegative) {
  ExperimentConfig c;
  c.sigma_c = {-0.1};
  EXPECT_EQ(kind_of([&] { c.validate(); }), ErrorKind::InvalidConfig);
  c = {};
  apply_setting(c, "methods", " , ");
  EXPECT_EQ(kind_of([&] { c.validate(); }), ErrorKind::InvalidConfig);
}

TEST(Config, MethodNamesRoundTrip) {
  for (Method m : {Method::DCMOML, Method::DCUOML, Method::DCML, Method::META, Method::META_NA,
                   Method::EB_GLS, Method::SHARED, Method::TASK_OLS, Method::DCMOML_LINEAR,
                   Method::META_LINEAR, Method::DCML_LINEAR})
    EXPECT_EQ(parse_method(to_string(m)), m);
}
