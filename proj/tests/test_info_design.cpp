#include <gtest/gtest.h>

#include "mtdemand/info_design.hpp"

using namespace mtdemand;

namespace {
TaskPanel panel(std::vector<double> p, std::vector<double> d) {
  TaskPanel t;
  t.task_id = 1;
  t.prices = std::move(p);
  t.demands = std::move(d);
  return t;
}
}  // namespace

TEST(Penultimate, Examples) {
  EXPECT_EQ(find_penultimate_index({3, 3, 5, 5, 5}), 1u);  // 0-based
  EXPECT_EQ(find_penultimate_index({1, 2}), 0u);
  try {
    find_penultimate_index({4, 4, 4});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::AllPricesEqual);
  }
}

TEST(AssignQuery, FairCoinOverManyDraws) {
  Rng rng = Rng::stream(3, StreamDomain::Query);
  int hits = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) hits += assign_query(std::vector<double>{1, 2}, rng).k_query == 0;
  EXPECT_NEAR(hits / double(n), 0.5, 0.01);
}

TEST(AssignQuery, CandidatesAreKStarAndLast) {
  Rng rng(1);
  for (int i = 0; i < 200; ++i) {
    const auto a = assign_query(std::vector<double>{3, 3, 5}, rng);
    EXPECT_EQ(std::min(a.k_query, a.k_masked_other), 1u);
    EXPECT_EQ(std::max(a.k_query, a.k_masked_other), 2u);
  }
}

TEST(AssignQuery, DeterministicPerTask) {
  const auto p = panel({1, 2}, {3, 1});
  const auto a = assign_query(p, 42), b = assign_query(p, 42);
  EXPECT_EQ(a.k_query, b.k_query);
}

TEST(InfoSet, DcmomlHidesBothCandidates) {
  const auto info = build_info_set(panel({1, 2}, {3, 1}), Design::DCMOML, {});
  EXPECT_TRUE(info.visible_demands.empty());
  EXPECT_EQ(info.prices, (std::vector<double>{1, 2}));
  EXPECT_FALSE(info.unassigned_demand);
}

TEST(InfoSet, DcmlShowsSupportAndQueryPrice) {
  const auto p = panel({1, 2}, {3, 1});
  const auto info = build_info_set(p, Design::DCML, final_index_assignment(p));
  ASSERT_EQ(info.visible_demands.size(), 1u);
  EXPECT_EQ(info.visible_demands[0].first, 0u);
  EXPECT_EQ(info.visible_demands[0].second, 3.0);
  EXPECT_EQ(*info.query_price, 2.0);
}

TEST(InfoSet, DcuomlAppendsUnassignedDemand) {
  const auto p = panel({1, 2}, {3, 1});
  const auto info = build_info_set(p, Design::DCUOML, QueryAssignment{0, 1, 0});
  EXPECT_TRUE(info.visible_demands.empty());
  EXPECT_EQ(*info.unassigned_demand, 3.0);
}

TEST(InfoSet, MetaSeesOnlySupportPrices) {
  const auto p = panel({1, 2, 4}, {3, 1, 0.5});
  const auto info = build_info_set(p, Design::META, final_index_assignment(p));
  EXPECT_EQ(info.prices, (std::vector<double>{1, 2}));
  EXPECT_EQ(info.visible_demands.size(), 2u);
}

TEST(InfoSet, MiddleDemandVisibleForLongerPanels) {
  const auto info = build_info_set(panel({1, 2, 3, 3}, {9, 8, 7, 6}), Design::DCMOML, {});
  // k_star = 1, last = 3; index 0 and 2 stay visible
  ASSERT_EQ(info.visible_demands.size(), 2u);
  EXPECT_EQ(info.visible_demands[0].first, 0u);
  EXPECT_EQ(info.visible_demands[1].first, 2u);
}

TEST(Targets, DcmomlAveraged) {
  const auto t = supervision_targets(panel({1, 2}, {3, 1}), Design::DCMOML, {}, LossMode::Averaged);
  ASSERT_EQ(t.size(), 2u);
  EXPECT_EQ(t[0].price, 1.0);
  EXPECT_EQ(t[0].demand, 3.0);
  EXPECT_EQ(t[0].weight, 0.5);
  EXPECT_EQ(t[1].price, 2.0);
  EXPECT_EQ(t[1].demand, 1.0);
  EXPECT_EQ(t[1].weight, 0.5);
}

TEST(Targets, MetaSingleFinalTarget) {
  const auto p = panel({1, 2, 4}, {3, 1, 0.5});
  const auto t = supervision_targets(p, Design::META, final_index_assignment(p));
  ASSERT_EQ(t.size(), 1u);
  EXPECT_EQ(t[0].price, 4.0);
  EXPECT_EQ(t[0].weight, 1.0);
}

TEST(Targets, ExposureWeightsNormalized) {
  auto p = panel({1, 2}, {3, 1});
  p.exposures = std::vector<int>{4, 1};
  const auto t = supervision_targets(p, Design::DCMOML, {}, LossMode::Averaged);
  EXPECT_DOUBLE_EQ(t[0].weight, 0.8);
  EXPECT_DOUBLE_EQ(t[1].weight, 0.2);
}

TEST(Flatten, LayoutDimensionMatches) {
  for (Design d : {Design::DCMOML, Design::DCUOML, Design::DCML, Design::META}) {
    auto p = panel({1, 2, 3}, {3, 2, 1});
    p.context = {0.5, -0.5};
    const QueryAssignment a{1, 2, 1};
    const InputLayout layout{d, 2, 3, false};
    EXPECT_EQ(flatten(build_info_set(p, d, a), layout).size(), layout.dimension()) << to_string(d);
  }
}

TEST(Flatten, DesignMismatchRejected) {
  const auto p = panel({1, 2}, {3, 1});
  try {
    flatten(build_info_set(p, Design::DCMOML, {}), InputLayout{Design::META, 0, 2, false});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DimensionMismatch);
  }
}
