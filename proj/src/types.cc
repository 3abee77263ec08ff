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

#include "retrotrace/types.h"

#include <algorithm>
#include <cstdio>

namespace retrotrace {

namespace {

constexpr uint64_t kFnvOffset = 14695981039346656037ULL;
constexpr uint64_t kFnvPrime = 1099511628211ULL;

int hex_digit(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

}  // namespace

TraceId TraceId::random(std::mt19937_64& rng) {
  TraceId id;
  do {
    id.hi = rng();
    id.lo = rng();
  } while (id.is_zero());
  return id;
}

TraceId TraceId::random() {
  thread_local std::mt19937_64 rng{std::random_device{}()};
  return random(rng);
}

std::array<uint8_t, 16> TraceId::to_bytes() const {
  std::array<uint8_t, 16> out{};
  for (int i = 0; i < 8; ++i) {
    out[i] = static_cast<uint8_t>(hi >> (56 - 8 * i));
    out[8 + i] = static_cast<uint8_t>(lo >> (56 - 8 * i));
  }
  return out;
}

TraceId TraceId::from_bytes(const uint8_t* bytes) {
  TraceId id;
  for (int i = 0; i < 8; ++i) {
    id.hi = (id.hi << 8) | bytes[i];
    id.lo = (id.lo << 8) | bytes[8 + i];
  }
  return id;
}

std::string TraceId::to_hex() const {
  char buf[33];
  std::snprintf(buf, sizeof(buf), "%016llx%016llx",
                static_cast<unsigned long long>(hi),
                static_cast<unsigned long long>(lo));
  return std::string(buf, 32);
}

TraceId TraceId::from_hex(std::string_view hex) {
  if (hex.empty() || hex.size() > 32) {
    throw std::invalid_argument("trace id hex must be 1-32 digits");
  }
  TraceId id;
  for (char c : hex) {
    int d = hex_digit(c);
    if (d < 0) throw std::invalid_argument("bad hex digit in trace id");
    id.hi = (id.hi << 4) | (id.lo >> 60);
    id.lo = (id.lo << 4) | static_cast<uint64_t>(d);
  }
  return id;
}

std::string to_string(TraceId id) { return id.to_hex(); }

std::vector<TraceId> Trigger::group() const {
  std::vector<TraceId> out;
  out.reserve(laterals.size() + 1);
  out.push_back(trace_id);
  for (const TraceId& l : laterals) {
    if (std::find(out.begin(), out.end(), l) == out.end()) out.push_back(l);
  }
  return out;
}

uint64_t fnv1a64(const uint8_t* data, std::size_t size) {
  uint64_t h = kFnvOffset;
  for (std::size_t i = 0; i < size; ++i) {
    h ^= data[i];
    h *= kFnvPrime;
  }
  return h;
}

Priority priority_of(TraceId trace_id) {
  if (trace_id.is_zero()) {
    throw std::invalid_argument("priority_of: zero trace id");
  }
  auto bytes = trace_id.to_bytes();
  return Priority{fnv1a64(bytes.data(), bytes.size()), trace_id};
}

std::optional<Trigger> head_sample_compat(const TraceContext& ctx,
                                          bool sampled) {
  if (!sampled) return std::nullopt;
  return Trigger{ctx.trace_id, kHeadSampledTrigger, {}};
}

Trigger make_trigger(TraceId trace_id, TriggerId trigger_id,
                     std::vector<TraceId> laterals) {
  Trigger t{trace_id, trigger_id, {}};
  t.laterals.reserve(laterals.size());
  for (const TraceId& l : laterals) {
    if (l.is_zero() || l == trace_id) continue;
    if (std::find(t.laterals.begin(), t.laterals.end(), l) !=
        t.laterals.end()) {
      continue;
    }
    t.laterals.push_back(l);
  }
  return t;
}

}  // namespace retrotrace
