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

#include <random>
#include <set>

#include "retrotrace/types.h"
#include "retrotrace/wire.h"

namespace retrotrace {
namespace {

TEST(Priority, FrozenValues) {
  EXPECT_EQ(priority_of(TraceId::from_u64(1)).rank, 0x88201eb960ff62b2ULL);
  EXPECT_EQ(priority_of(TraceId::from_u64(2)).rank, 0x88201db960ff60ffULL);
  EXPECT_EQ(priority_of(TraceId(1, 5)).rank, 0xf4b5c75bcc646939ULL);
  EXPECT_EQ(priority_of(TraceId(0xdeadbeef, 0x1234)).rank, 0x7a6637da538fb8fdULL);
}

TEST(Priority, OrderFollowsRankThenId) {
  Priority a = priority_of(TraceId::from_u64(1));
  Priority b = priority_of(TraceId::from_u64(2));
  EXPECT_GT(a, b);  // 0x8820_1eb9... > 0x8820_1db9...
  EXPECT_EQ(a.id, TraceId::from_u64(1));
}

TEST(Priority, RanksUniqueOverTenThousandIds) {
  std::mt19937_64 rng(42);
  std::set<uint64_t> ranks;
  std::set<Priority> order;
  for (int i = 0; i < 10000; ++i) {
    TraceId id = TraceId::random(rng);
    ranks.insert(priority_of(id).rank);
    order.insert(priority_of(id));
  }
  EXPECT_EQ(ranks.size(), 10000u);
  EXPECT_EQ(order.size(), 10000u);
}

TEST(TraceId, HexAndBytesRoundTrip) {
  TraceId id(0x0123456789abcdefULL, 0xfedcba9876543210ULL);
  EXPECT_EQ(id.to_hex(), "0123456789abcdeffedcba9876543210");
  EXPECT_EQ(TraceId::from_hex(id.to_hex()), id);
  auto bytes = id.to_bytes();
  EXPECT_EQ(bytes[0], 0x01);
  EXPECT_EQ(bytes[15], 0x10);
  EXPECT_EQ(TraceId::from_bytes(bytes.data()), id);
  EXPECT_THROW(TraceId::from_hex("xyz"), std::invalid_argument);
}

TEST(TraceId, RandomIsNeverZero) {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 1000; ++i) EXPECT_FALSE(TraceId::random(rng).is_zero());
}

TEST(Trigger, MakeTriggerDropsPrimaryZeroAndDuplicates) {
  TraceId x = TraceId::from_u64(1), y = TraceId::from_u64(2);
  Trigger t = make_trigger(x, TriggerId{7}, {y, x, TraceId{}, y});
  ASSERT_EQ(t.laterals.size(), 1u);
  EXPECT_EQ(t.laterals[0], y);
  EXPECT_EQ(t.group(), (std::vector<TraceId>{x, y}));
}

TEST(HeadSampling, CompatTriggerUsesReservedId) {
  TraceContext ctx{TraceId::from_u64(9), "a:1", {}};
  auto t = head_sample_compat(ctx, true);
  ASSERT_TRUE(t.has_value());
  EXPECT_EQ(t->trigger_id, kHeadSampledTrigger);
  EXPECT_FALSE(head_sample_compat(ctx, false).has_value());
}

TEST(Context, TwentyTwoBytesWithoutTriggers) {
  TraceContext ctx{TraceId::from_u64(1), "a:1", {}};
  std::vector<uint8_t> bytes = serialize_context(ctx);
  std::vector<uint8_t> want(15, 0);
  want.insert(want.end(), {0x01, 0x03, 'a', ':', '1', 0x00, 0x00});
  EXPECT_EQ(bytes, want);
  EXPECT_EQ(deserialize_context(bytes), ctx);
}

TEST(Context, ThirtyBytesWithTwoTriggers) {
  TraceContext ctx{TraceId::from_u64(1), "a:1", {TriggerId{7}, TriggerId{0x01020304}}};
  std::vector<uint8_t> bytes = serialize_context(ctx);
  ASSERT_EQ(bytes.size(), 30u);
  EXPECT_EQ(bytes[20], 0x00);
  EXPECT_EQ(bytes[21], 0x02);
  EXPECT_EQ((std::vector<uint8_t>(bytes.begin() + 22, bytes.end())),
            (std::vector<uint8_t>{0, 0, 0, 7, 1, 2, 3, 4}));
  EXPECT_EQ(deserialize_context(bytes), ctx);
}

TEST(Context, RejectsLongAddressAndTruncation) {
  TraceContext ctx{TraceId::from_u64(1), std::string(256, 'x'), {}};
  EXPECT_THROW(serialize_context(ctx), std::invalid_argument);
  ctx.origin = std::string(255, 'x');
  auto bytes = serialize_context(ctx);
  EXPECT_EQ(deserialize_context(bytes), ctx);
  bytes.pop_back();
  EXPECT_THROW(deserialize_context(bytes), DecodeError);
}

TEST(Envelope, LengthTypeBody) {
  std::vector<uint8_t> body{0xAA, 0xBB};
  auto framed = frame_message(MessageType::kReportData, body);
  EXPECT_EQ(framed, (std::vector<uint8_t>{0, 0, 0, 3, 5, 0xAA, 0xBB}));
  EXPECT_EQ(frame_message(MessageType::kError, {}),
            (std::vector<uint8_t>{0, 0, 0, 1, 127}));
}

TEST(Messages, ReportDataLayout) {
  ReportData m{"a:1", TraceId::from_u64(2), {ReportBuffer{5, {0x10, 0x20}}}};
  auto bytes = encode_report_data(m);
  std::vector<uint8_t> want{3, 'a', ':', '1'};
  want.insert(want.end(), 15, 0);
  want.push_back(2);
  want.insert(want.end(), {0, 0, 0, 1});
  want.insert(want.end(), {0, 0, 0, 0, 0, 0, 0, 5});
  want.insert(want.end(), {0, 0, 0, 2, 0x10, 0x20});
  EXPECT_EQ(bytes, want);
  EXPECT_EQ(decode_report_data(bytes), m);
  EXPECT_EQ(m.payload_bytes(), 2u);
}

TEST(Messages, TriggerNotifyAndLocalTriggerRoundTrip) {
  Trigger t = make_trigger(TraceId(3, 4), TriggerId{19},
                           {TraceId::from_u64(5), TraceId::from_u64(6)});
  BreadcrumbMap crumbs{{TraceId(3, 4), {"a:1", "b:2"}},
                       {TraceId::from_u64(5), {"c:3"}}};
  TriggerNotify n{t, crumbs};
  TriggerNotify n2 = decode_trigger_notify(encode_trigger_notify(n));
  EXPECT_EQ(n2.trigger, t);
  EXPECT_EQ(n2.breadcrumbs, crumbs);

  LocalTrigger l{"a:1", t, crumbs};
  LocalTrigger l2 = decode_local_trigger(encode_local_trigger(l));
  EXPECT_EQ(l2.origin, "a:1");
  EXPECT_EQ(l2.trigger, t);
  EXPECT_EQ(l2.breadcrumbs, crumbs);

  EXPECT_EQ(decode_breadcrumb_map(encode_breadcrumb_map(crumbs)), crumbs);
  std::vector<TraceId> ids{TraceId(1, 2), TraceId(3, 4)};
  EXPECT_EQ(decode_trace_ids(encode_trace_ids(ids)), ids);
}

TEST(Messages, TrailingBytesRejected) {
  auto bytes = encode_breadcrumb_map({});
  bytes.push_back(0);
  EXPECT_THROW(decode_breadcrumb_map(bytes), DecodeError);
}

}  // namespace
}  // namespace retrotrace
