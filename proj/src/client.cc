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

#include "retrotrace/client.h"

#include <cmath>
#include <cstring>
#include <stdexcept>
#include <unordered_map>

#include "retrotrace/wire.h"

namespace retrotrace {

namespace {

std::atomic<uint64_t> next_client_uid{1};

struct ThreadStates {
  uint64_t last_uid = 0;
  ThreadTraceState* last = nullptr;
  std::unordered_map<uint64_t, ThreadTraceState> by_client;
};

ThreadStates& thread_states() {
  thread_local ThreadStates states;
  return states;
}

void store_le32(uint8_t* out, uint32_t v) {
  out[0] = static_cast<uint8_t>(v);
  out[1] = static_cast<uint8_t>(v >> 8);
  out[2] = static_cast<uint8_t>(v >> 16);
  out[3] = static_cast<uint8_t>(v >> 24);
}

}  // namespace

uint32_t frame_header(uint32_t length, bool continued) {
  return (length & kFrameLengthMask) | (continued ? kFrameContinued : 0u);
}

Client::Client(NodeMemory& memory, ClientConfig config)
    : memory_(memory),
      config_(std::move(config)),
      uid_(next_client_uid.fetch_add(1)),
      buffer_size_(static_cast<uint32_t>(memory.pool().buffer_size())) {
  double p = config_.trace_percentage;
  if (!(p >= 0.0 && p <= 1.0)) {
    throw std::invalid_argument("trace percentage must be in [0, 1]");
  }
  gate_all_ = p >= 1.0;
  long double t = std::ldexp(static_cast<long double>(p), 64);
  gate_threshold_ = gate_all_ ? ~uint64_t{0} : static_cast<uint64_t>(t);
}

Client::~Client() {
  // Other threads' entries are left behind; they are small and keyed by a
  // uid that is never reused.
  ThreadStates& ts = thread_states();
  ts.by_client.erase(uid_);
  if (ts.last_uid == uid_) {
    ts.last_uid = 0;
    ts.last = nullptr;
  }
}

ThreadTraceState& Client::state() const {
  ThreadStates& ts = thread_states();
  if (ts.last_uid == uid_) return *ts.last;
  ThreadTraceState& st = ts.by_client[uid_];
  ts.last_uid = uid_;
  ts.last = &st;
  return st;
}

bool Client::gated_in(TraceId trace_id) const {
  if (gate_all_) return true;
  return priority_of(trace_id).rank < gate_threshold_;
}

void Client::acquire(ThreadTraceState& st) {
  BufferId id;
  if (memory_.available.try_pop(id)) {
    st.active = id;
    buffers_acquired_.fetch_add(1, std::memory_order_relaxed);
  } else {
    st.active = BufferId::null();
  }
  st.offset = 0;
}

void Client::flush(ThreadTraceState& st) {
  if (st.active.is_null()) return;
  if (st.offset == 0) {
    memory_.available.try_push(st.active);
  } else {
    CompleteRecord rec{st.active, st.offset, st.current};
    if (memory_.complete.try_push(rec)) {
      buffers_completed_.fetch_add(1, std::memory_order_relaxed);
    } else {
      // Cannot happen while the complete queue holds every buffer.
      memory_.available.try_push(st.active);
      st.lost_data = true;
    }
  }
  st.active = BufferId::null();
  st.offset = 0;
}

void Client::begin(TraceId trace_id) {
  ThreadTraceState& st = state();
  if (!st.current.is_zero()) {
    implicit_ends_.fetch_add(1, std::memory_order_relaxed);
    end_state(st);
  }
  if (trace_id.is_zero()) return;
  st.current = trace_id;
  st.lost_data = false;
  st.fired.clear();
  st.gated_out = !gated_in(trace_id);
  st.offset = 0;
  if (st.gated_out) {
    st.active = BufferId::null();
  } else {
    acquire(st);
  }
}

void Client::begin(const TraceContext& ctx) {
  begin(ctx.trace_id);
  if (ctx.trace_id.is_zero()) return;
  ThreadTraceState& st = state();
  st.fired.insert(ctx.fired_triggers.begin(), ctx.fired_triggers.end());
}

void Client::write_fragment(ThreadTraceState& st, uint32_t header,
                            std::span<const uint8_t> data) {
  const uint32_t frame = static_cast<uint32_t>(kFrameHeaderBytes + data.size());
  if (st.active.is_null()) {
    st.null_writes++;
    st.lost_data = true;
    null_writes_.fetch_add(1, std::memory_order_relaxed);
    null_bytes_.fetch_add(frame, std::memory_order_relaxed);
  } else {
    uint8_t* dst = memory_.pool().buffer(st.active).data() + st.offset;
    store_le32(dst, header);
    if (!data.empty()) {
      std::memcpy(dst + kFrameHeaderBytes, data.data(), data.size());
    }
  }
  st.offset += frame;
}

bool Client::tracepoint(std::span<const uint8_t> payload) {
  ThreadTraceState& st = state();
  if (st.current.is_zero()) {
    orphan_tracepoints_.fetch_add(1, std::memory_order_relaxed);
    return false;
  }
  if (st.gated_out) return false;

  const std::size_t frame = kFrameHeaderBytes + payload.size();
  // Fast path: the whole frame fits in the current buffer.
  if (frame <= buffer_size_ - st.offset) {
    const bool real = !st.active.is_null();
    write_fragment(st, frame_header(static_cast<uint32_t>(payload.size()),
                                    false),
                   payload);
    return real;
  }

  bool stored = true;
  if (frame <= buffer_size_) {
    flush(st);
    acquire(st);
    stored = !st.active.is_null();
    write_fragment(
        st, frame_header(static_cast<uint32_t>(payload.size()), false),
        payload);
    return stored;
  }

  // Larger than one buffer: fill the rest of each buffer with continued
  // fragments.
  std::span<const uint8_t> rest = payload;
  while (true) {
    if (buffer_size_ - st.offset <= kFrameHeaderBytes) {
      flush(st);
      acquire(st);
    }
    std::size_t room = buffer_size_ - st.offset - kFrameHeaderBytes;
    std::size_t chunk = std::min(room, rest.size());
    bool continued = chunk < rest.size();
    if (st.active.is_null()) stored = false;
    write_fragment(st, frame_header(static_cast<uint32_t>(chunk), continued),
                   rest.first(chunk));
    rest = rest.subspan(chunk);
    if (!continued) break;
    flush(st);
    acquire(st);
  }
  return stored;
}

void Client::breadcrumb(const Breadcrumb& address) {
  ThreadTraceState& st = state();
  if (st.current.is_zero()) {
    orphan_breadcrumbs_.fetch_add(1, std::memory_order_relaxed);
    return;
  }
  BreadcrumbRecord rec{st.current, address};
  if (!memory_.breadcrumbs.try_push(rec)) {
    dropped_breadcrumbs_.fetch_add(1, std::memory_order_relaxed);
    memory_.dropped_breadcrumbs.fetch_add(1, std::memory_order_relaxed);
  }
}

std::vector<uint8_t> Client::serialize() {
  ThreadTraceState& st = state();
  if (st.current.is_zero()) {
    throw std::logic_error("serialize() called with no active trace");
  }
  TraceContext ctx{st.current, config_.local_address, st.fired};
  return serialize_context(ctx);
}

TraceContext Client::deserialize(std::span<const uint8_t> bytes) {
  TraceContext ctx = deserialize_context(bytes);
  if (ctx.trace_id.is_zero()) return ctx;
  if (!ctx.origin.empty()) {
    BreadcrumbRecord rec{ctx.trace_id, ctx.origin};
    if (!memory_.breadcrumbs.try_push(rec)) {
      dropped_breadcrumbs_.fetch_add(1, std::memory_order_relaxed);
      memory_.dropped_breadcrumbs.fetch_add(1, std::memory_order_relaxed);
    }
  }
  for (TriggerId t : ctx.fired_triggers) {
    TriggerRecord rec{Trigger{ctx.trace_id, t, {}},
                      TriggerSource::kPropagated};
    if (!memory_.triggers.try_push(rec)) {
      dropped_triggers_.fetch_add(1, std::memory_order_relaxed);
      memory_.dropped_triggers.fetch_add(1, std::memory_order_relaxed);
    }
  }
  return ctx;
}

void Client::end_state(ThreadTraceState& st) {
  flush(st);
  st.current = TraceId{};
  st.gated_out = false;
  st.fired.clear();
}

void Client::end() {
  ThreadTraceState& st = state();
  if (st.current.is_zero()) {
    orphan_ends_.fetch_add(1, std::memory_order_relaxed);
    return;
  }
  end_state(st);
}

bool Client::trigger(TraceId trace_id, TriggerId trigger_id,
                     std::vector<TraceId> laterals) {
  return trigger(make_trigger(trace_id, trigger_id, std::move(laterals)));
}

bool Client::trigger(const Trigger& t) {
  if (t.trace_id.is_zero()) return false;
  ThreadTraceState& st = state();
  if (st.current == t.trace_id) st.fired.insert(t.trigger_id);
  TriggerRecord rec{t, TriggerSource::kApplication};
  if (!memory_.triggers.try_push(rec)) {
    dropped_triggers_.fetch_add(1, std::memory_order_relaxed);
    memory_.dropped_triggers.fetch_add(1, std::memory_order_relaxed);
    return false;
  }
  return true;
}

TraceId Client::current_trace() const { return state().current; }

bool Client::current_trace_lost_data() const { return state().lost_data; }

uint64_t Client::thread_null_writes() const { return state().null_writes; }

ClientCounters Client::counters() const {
  ClientCounters c;
  c.implicit_ends = implicit_ends_.load(std::memory_order_relaxed);
  c.orphan_tracepoints = orphan_tracepoints_.load(std::memory_order_relaxed);
  c.orphan_breadcrumbs = orphan_breadcrumbs_.load(std::memory_order_relaxed);
  c.orphan_ends = orphan_ends_.load(std::memory_order_relaxed);
  c.null_writes = null_writes_.load(std::memory_order_relaxed);
  c.null_bytes = null_bytes_.load(std::memory_order_relaxed);
  c.dropped_triggers = dropped_triggers_.load(std::memory_order_relaxed);
  c.dropped_breadcrumbs = dropped_breadcrumbs_.load(std::memory_order_relaxed);
  c.buffers_completed = buffers_completed_.load(std::memory_order_relaxed);
  c.buffers_acquired = buffers_acquired_.load(std::memory_order_relaxed);
  return c;
}

}  // namespace retrotrace
