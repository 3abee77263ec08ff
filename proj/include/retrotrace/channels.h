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

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>

#include "retrotrace/metadata_queue.h"
#include "retrotrace/types.h"

namespace retrotrace {

// Index of a buffer in the pool; byte offset = index * buffer size.
struct BufferId {
  uint32_t index = kNullIndex;

  static constexpr uint32_t kNullIndex = 0xFFFFFFFFu;
  static constexpr BufferId null() { return BufferId{}; }
  constexpr bool is_null() const { return index == kNullIndex; }

  friend constexpr auto operator<=>(const BufferId&, const BufferId&) = default;
};

struct CompleteRecord {
  BufferId buffer;
  uint32_t used_bytes = 0;
  TraceId trace_id;
};

struct BreadcrumbRecord {
  TraceId trace_id;
  Breadcrumb breadcrumb;
};

enum class TriggerSource : uint8_t {
  kApplication,  // trigger() called on this node
  kPropagated,   // carried in an incoming trace context
};

struct TriggerRecord {
  Trigger trigger;
  TriggerSource source = TriggerSource::kApplication;
};

// Fixed-size region carved into equally sized buffers.
class BufferPool {
 public:
  static constexpr std::size_t kDefaultBufferSize = 32 * 1024;
  static constexpr std::size_t kDefaultPoolSize = std::size_t{1} << 30;
  // Must hold a frame header plus at least one payload byte.
  static constexpr std::size_t kMinBufferSize = 8;

  // `prefault` touches every page up front so first writes do not fault.
  BufferPool(std::size_t pool_size, std::size_t buffer_size,
             bool prefault = false);

  std::size_t pool_size() const { return pool_size_; }
  std::size_t buffer_size() const { return buffer_size_; }
  uint32_t buffer_count() const { return buffer_count_; }

  std::span<uint8_t> buffer(BufferId id) {
    return {region_.get() + std::size_t{id.index} * buffer_size_,
            buffer_size_};
  }
  std::span<const uint8_t> buffer(BufferId id) const {
    return {region_.get() + std::size_t{id.index} * buffer_size_,
            buffer_size_};
  }

 private:
  std::size_t pool_size_;
  std::size_t buffer_size_;
  uint32_t buffer_count_;
  std::unique_ptr<uint8_t[]> region_;
};

struct ChannelConfig {
  std::size_t pool_size = BufferPool::kDefaultPoolSize;
  std::size_t buffer_size = BufferPool::kDefaultBufferSize;
  std::size_t breadcrumb_capacity = 4096;
  std::size_t trigger_capacity = 4096;
  bool prefault = false;
};

// Everything a client and its agent share: the pool and the four metadata
// queues. Starts with every buffer on the available queue.
class NodeMemory {
  BufferPool pool_;  // first: queue capacities derive from it

 public:
  explicit NodeMemory(const ChannelConfig& cfg);

  NodeMemory(const NodeMemory&) = delete;
  NodeMemory& operator=(const NodeMemory&) = delete;

  BufferPool& pool() { return pool_; }
  const BufferPool& pool() const { return pool_; }

  MetadataQueue<BufferId> available;
  MetadataQueue<CompleteRecord> complete;
  MetadataQueue<BreadcrumbRecord> breadcrumbs;
  MetadataQueue<TriggerRecord> triggers;

  // Drop-newest overflow counters for the breadcrumb and trigger queues.
  std::atomic<uint64_t> dropped_breadcrumbs{0};
  std::atomic<uint64_t> dropped_triggers{0};
};

}  // namespace retrotrace
