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

#include "properties.h"

namespace retrotrace::check {
namespace {

constexpr uint64_t kSeed = 20261016;

void expect_ok(const PropertyResult& r, std::size_t min_cases) {
  EXPECT_TRUE(r.ok()) << r.summary();
  EXPECT_GE(r.cases, min_cases) << r.name;
}

TEST(Property, QueueConservation) { expect_ok(queue_conservation(kSeed), kDefaultCases); }
TEST(Property, PoolConservation) { expect_ok(pool_conservation(kSeed), kDefaultCases); }
TEST(Property, PriorityDeterminism) { expect_ok(priority_determinism(kSeed), kDefaultCases); }
TEST(Property, ContextRoundTrip) { expect_ok(context_round_trip(kSeed), kDefaultCases); }
TEST(Property, EvictionLru) { expect_ok(eviction_lru(kSeed), kDefaultCases); }
TEST(Property, ReportingFairness) { expect_ok(reporting_fairness(kSeed), kDefaultCases); }
TEST(Property, RateLimitBound) { expect_ok(rate_limit_bound(kSeed), kDefaultCases); }

TEST(Oracle, Percentile) { expect_ok(percentile_oracle(kSeed), kOracleSamples); }
TEST(Oracle, Category) { expect_ok(category_oracle(kSeed), kOracleSamples); }
TEST(Oracle, TriggerSet) { expect_ok(trigger_set_oracle(kSeed), kOracleSamples); }

}  // namespace
}  // namespace retrotrace::check
