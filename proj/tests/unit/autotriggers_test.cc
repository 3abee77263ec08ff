// Copyright 2026 The retrotrace Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include "retrotrace/autotriggers.h"
#include "retrotrace/sliding_quantile.h"

namespace retrotrace {
namespace {

TraceId id(uint64_t v) { return TraceId::from_u64(v); }

TEST(SlidingQuantile, KthAndPercentile) {
  SlidingQuantile q(100);
  for (int v = 100; v >= 1; --v) q.add(v);
  EXPECT_EQ(q.kth(1), 1);
  EXPECT_EQ(q.kth(100), 100);
  EXPECT_EQ(q.percentile(50), 50);
  EXPECT_EQ(q.percentile(99.5), 100);
  EXPECT_EQ(nearest_rank(50, 100), 50u);
  EXPECT_EQ(nearest_rank(0, 10), 1u);
}

TEST(SlidingQuantile, WindowDropsOldest) {
  SlidingQuantile q(3);
  for (double v : {10.0, 1.0, 2.0, 3.0}) q.add(v);
  EXPECT_EQ(q.size(), 3u);
  EXPECT_EQ(q.kth(3), 3);
}

TEST(SlidingQuantile, HandlesDuplicates) {
  SlidingQuantile q(5);
  for (int i = 0; i < 10; ++i) q.add(7);
  EXPECT_EQ(q.size(), 5u);
  EXPECT_EQ(q.percentile(90), 7);
}

TEST(PercentileTrigger, FiresAboveMedian) {
  PercentileTrigger t(TriggerId{18}, 50, 10000, 100);
  for (uint64_t v = 1; v <= 100; ++v) EXPECT_FALSE(t.add_sample(id(v), double(v)));
  auto fired = t.add_sample(id(1000), 200);
  ASSERT_TRUE(fired.has_value());
  EXPECT_EQ(fired->trace_id, id(1000));
  EXPECT_EQ(fired->trigger_id, TriggerId{18});
  EXPECT_FALSE(t.add_sample(id(1001), 10));
  EXPECT_EQ(t.fired(), 1u);
}

TEST(PercentileTrigger, RejectsBadInput) {
  EXPECT_THROW(PercentileTrigger(TriggerId{18}, 0), std::invalid_argument);
  EXPECT_THROW(PercentileTrigger(TriggerId{18}, 100.5), std::invalid_argument);
  PercentileTrigger t(TriggerId{18}, 50, 100, 0);
  EXPECT_FALSE(t.add_sample(id(1), std::nan("")));
  EXPECT_EQ(t.rejected(), 1u);
}

TEST(CategoryTrigger, FiresForRareLabel) {
  CategoryTrigger t(TriggerId{19}, 0.01, 100);
  for (uint64_t i = 1; i <= 1000; ++i) EXPECT_FALSE(t.add_sample(id(i), "A"));
  auto fired = t.add_sample(id(5000), "B");
  ASSERT_TRUE(fired.has_value());
  EXPECT_EQ(fired->trace_id, id(5000));
  EXPECT_EQ(t.count("A"), 1000u);
  EXPECT_EQ(t.total(), 1001u);
}

TEST(CategoryTrigger, RejectsBadFraction) {
  EXPECT_THROW(CategoryTrigger(TriggerId{19}, 0), std::invalid_argument);
  EXPECT_THROW(CategoryTrigger(TriggerId{19}, 1.5), std::invalid_argument);
}

TEST(ExceptionTrigger, AlwaysFires) {
  ExceptionTrigger t(TriggerId{17});
  EXPECT_EQ(t.notify(id(3)), make_trigger(id(3), TriggerId{17}));
}

TEST(TriggerSet, TakesRecentNeighboursAsLaterals) {
  TriggerSet s(10);
  for (uint64_t v = 1; v <= 15; ++v) s.observe(id(v));
  Trigger t = s.on_fire(make_trigger(id(15), TriggerId{19}));
  std::vector<TraceId> expected;
  for (uint64_t v = 14; v >= 5; --v) expected.push_back(id(v));
  EXPECT_EQ(t.laterals, expected);
}

TEST(TriggerSet, KeepsExistingLaterals) {
  TriggerSet s(2);
  s.observe(id(1));
  s.observe(id(2));
  Trigger t = s.on_fire(make_trigger(id(9), TriggerId{19}, {id(7)}));
  EXPECT_EQ(t.group().size(), 4u);
}

}  // namespace
}  // namespace retrotrace
