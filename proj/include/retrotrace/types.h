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

#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace retrotrace {

// 128-bit request identifier. Zero means "no active trace".
struct TraceId {
  uint64_t hi = 0;
  uint64_t lo = 0;

  constexpr TraceId() = default;
  constexpr TraceId(uint64_t high, uint64_t low) : hi(high), lo(low) {}
  static constexpr TraceId from_u64(uint64_t low) { return TraceId(0, low); }

  // Uniformly random, never zero.
  static TraceId random(std::mt19937_64& rng);
  // Uses a per-thread generator seeded from std::random_device.
  static TraceId random();

  constexpr bool is_zero() const { return hi == 0 && lo == 0; }
  explicit constexpr operator bool() const { return !is_zero(); }

  std::array<uint8_t, 16> to_bytes() const;  // big-endian
  static TraceId from_bytes(const uint8_t* bytes);

  std::string to_hex() const;
  static TraceId from_hex(std::string_view hex);

  friend constexpr auto operator<=>(const TraceId&, const TraceId&) = default;
};

// Developer-assigned trigger class, stable across nodes.
struct TriggerId {
  uint32_t value = 0;

  constexpr TriggerId() = default;
  explicit constexpr TriggerId(uint32_t v) : value(v) {}

  friend constexpr auto operator<=>(const TriggerId&, const TriggerId&) = default;
};

// Reserved trigger ids. 1-15 belong to built-in autotriggers.
inline constexpr TriggerId kHeadSampledTrigger{0};
inline constexpr TriggerId kFirstUserTrigger{16};

// Address of an agent, "host:port". At most 255 bytes on the wire.
using Breadcrumb = std::string;
inline constexpr std::size_t kMaxBreadcrumbBytes = 255;

using BreadcrumbSet = std::set<Breadcrumb>;
using BreadcrumbMap = std::map<TraceId, BreadcrumbSet>;

struct TraceContext {
  TraceId trace_id;
  Breadcrumb origin;
  std::set<TriggerId> fired_triggers;

  friend bool operator==(const TraceContext&, const TraceContext&) = default;
};

// Retention rank. Higher compares greater and is kept longer / reported
// first. Ties on rank fall back to the raw id so the order is total.
struct Priority {
  uint64_t rank = 0;
  TraceId id;

  friend constexpr auto operator<=>(const Priority&, const Priority&) = default;
};

struct Trigger {
  TraceId trace_id;
  TriggerId trigger_id;
  std::vector<TraceId> laterals;

  // trace_id followed by the laterals, duplicates removed.
  std::vector<TraceId> group() const;

  friend bool operator==(const Trigger&, const Trigger&) = default;
};

// FNV-1a-64 over the 16 big-endian id bytes. Seed-free so every process
// computes the same rank. Throws std::invalid_argument on a zero id.
uint64_t fnv1a64(const uint8_t* data, std::size_t size);
Priority priority_of(TraceId trace_id);

// Builds the head-sampling trigger (reserved id 0) when the sampled flag is
// set on an incoming request.
std::optional<Trigger> head_sample_compat(const TraceContext& ctx,
                                          bool sampled);

// Normalizes laterals: drops zero ids, duplicates and the primary id.
Trigger make_trigger(TraceId trace_id, TriggerId trigger_id,
                     std::vector<TraceId> laterals = {});

std::string to_string(TraceId id);

}  // namespace retrotrace

template <>
struct std::hash<retrotrace::TraceId> {
  std::size_t operator()(const retrotrace::TraceId& id) const noexcept {
    return static_cast<std::size_t>(id.lo * 0x9E3779B97F4A7C15ULL ^ id.hi);
  }
};

template <>
struct std::hash<retrotrace::TriggerId> {
  std::size_t operator()(const retrotrace::TriggerId& id) const noexcept {
    return std::hash<uint32_t>{}(id.value);
  }
};
