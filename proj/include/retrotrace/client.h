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
#include <cstdint>
#include <set>
#include <span>
#include <string_view>
#include <vector>

#include "retrotrace/channels.h"
#include "retrotrace/types.h"

namespace retrotrace {

struct ClientConfig {
  // Address of the agent serving this node; bound into serialized contexts.
  Breadcrumb local_address;
  // Fraction of traces that generate data at all. Gating thresholds the
  // priority rank, so every node gates the same traces.
  double trace_percentage = 1.0;
};

// Misuse and loss counters. Misuse never throws on the data path.
struct ClientCounters {
  uint64_t implicit_ends = 0;        // begin() while a trace was active
  uint64_t orphan_tracepoints = 0;   // tracepoint() with no active trace
  uint64_t orphan_breadcrumbs = 0;
  uint64_t orphan_ends = 0;
  uint64_t null_writes = 0;          // frames (or fragments) discarded
  uint64_t null_bytes = 0;
  uint64_t dropped_triggers = 0;     // trigger queue full
  uint64_t dropped_breadcrumbs = 0;  // breadcrumb queue full
  uint64_t buffers_completed = 0;
  uint64_t buffers_acquired = 0;
};

// Per-thread trace state for one client instance.
struct ThreadTraceState {
  TraceId current;
  BufferId active = BufferId::null();
  uint32_t offset = 0;  // write offset within the active (or null) buffer
  bool gated_out = false;
  bool lost_data = false;  // some byte of the current trace hit the null buffer
  std::set<TriggerId> fired;
  uint64_t null_writes = 0;
};

// Tracing client library. One instance per node; shareable across threads.
// begin/tracepoint/end touch only the calling thread's state plus the
// available and complete queues when buffers turn over.
class Client {
 public:
  Client(NodeMemory& memory, ClientConfig config);
  ~Client();

  Client(const Client&) = delete;
  Client& operator=(const Client&) = delete;

  void begin(TraceId trace_id);
  void begin(const TraceContext& ctx);

  // Returns true when the whole payload landed in real buffers.
  bool tracepoint(std::span<const uint8_t> payload);
  bool tracepoint(std::string_view payload) {
    return tracepoint(std::span<const uint8_t>(
        reinterpret_cast<const uint8_t*>(payload.data()), payload.size()));
  }

  void breadcrumb(const Breadcrumb& address);

  // Context for an outgoing call; throws std::logic_error without a trace.
  std::vector<uint8_t> serialize();

  // Decodes an incoming context, deposits its origin breadcrumb and hands
  // any upstream-fired triggers to the local agent. Does not call begin().
  TraceContext deserialize(std::span<const uint8_t> bytes);

  void end();

  // Never blocks; false when the trigger queue is full.
  bool trigger(TraceId trace_id, TriggerId trigger_id,
               std::vector<TraceId> laterals = {});
  bool trigger(const Trigger& t);

  bool gated_in(TraceId trace_id) const;

  TraceId current_trace() const;
  // True if the calling thread's current trace lost any data so far.
  bool current_trace_lost_data() const;
  uint64_t thread_null_writes() const;

  ClientCounters counters() const;
  const ClientConfig& config() const { return config_; }
  NodeMemory& memory() { return memory_; }

 private:
  ThreadTraceState& state() const;
  void acquire(ThreadTraceState& st);
  void flush(ThreadTraceState& st);
  void write_fragment(ThreadTraceState& st, uint32_t header,
                      std::span<const uint8_t> data);
  void end_state(ThreadTraceState& st);

  NodeMemory& memory_;
  ClientConfig config_;
  uint64_t uid_;
  uint32_t buffer_size_;
  uint64_t gate_threshold_;
  bool gate_all_;

  std::atomic<uint64_t> implicit_ends_{0};
  std::atomic<uint64_t> orphan_tracepoints_{0};
  std::atomic<uint64_t> orphan_breadcrumbs_{0};
  std::atomic<uint64_t> orphan_ends_{0};
  std::atomic<uint64_t> null_writes_{0};
  std::atomic<uint64_t> null_bytes_{0};
  std::atomic<uint64_t> dropped_triggers_{0};
  std::atomic<uint64_t> dropped_breadcrumbs_{0};
  std::atomic<uint64_t> buffers_completed_{0};
  std::atomic<uint64_t> buffers_acquired_{0};
};

// Builds one frame header: little-endian length with the continuation bit.
uint32_t frame_header(uint32_t length, bool continued);

}  // namespace retrotrace
