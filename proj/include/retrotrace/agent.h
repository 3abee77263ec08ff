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
#include <deque>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <thread>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "retrotrace/channels.h"
#include "retrotrace/clock.h"
#include "retrotrace/token_bucket.h"
#include "retrotrace/transport.h"
#include "retrotrace/types.h"

namespace retrotrace {

struct AgentConfig {
  Breadcrumb address;
  double eviction_threshold = 0.80;
  double abandon_threshold = 0.90;
  // Local triggers per second, per trigger id. Burst is one second's worth.
  std::map<TriggerId, double> trigger_rate_limits;
  std::map<TriggerId, double> queue_weights;  // default weight 1.0
  // Collector bandwidth in bytes per second; 0 means unlimited.
  double report_bandwidth = 0;
  // Local triggers are held this long before processing.
  Nanos trigger_delay{0};
  // How long a reported trace stays triggered, and how long idle empty
  // entries are kept.
  Nanos triggered_ttl = std::chrono::seconds(60);
  int forward_retries = 2;
  Nanos forward_backoff = std::chrono::milliseconds(50);
  std::size_t drain_batch = 4096;
  Nanos poll_interval = std::chrono::microseconds(200);

  void validate() const;
};

struct IndexedBuffer {
  BufferId id;
  uint32_t used_bytes = 0;
  uint64_t seq = 0;
};

struct TraceIndexEntry {
  TraceId trace_id;
  uint64_t rank = 0;
  std::vector<IndexedBuffer> buffers;  // arrival order
  BreadcrumbSet breadcrumbs;
  Nanos first_seen{0};
  Nanos last_seen{0};
  std::set<TriggerId> triggered_by;
  int pins = 0;                 // scheduled groups holding this trace
  Nanos triggered_until{0};     // TTL once no group holds it

  bool triggered() const { return !triggered_by.empty(); }
};

struct DrainCounts {
  std::size_t complete = 0;
  std::size_t breadcrumbs = 0;
  std::size_t triggers = 0;
};

struct ReportOutcome {
  Trigger trigger;
  std::size_t bytes_sent = 0;
  std::size_t buffers_sent = 0;
};

struct AgentStats {
  uint64_t drained_complete = 0;
  uint64_t drained_breadcrumbs = 0;
  uint64_t drained_triggers = 0;
  uint64_t evicted_traces = 0;
  uint64_t evicted_buffers = 0;
  uint64_t local_triggers_accepted = 0;
  uint64_t local_triggers_rate_limited = 0;
  uint64_t propagated_triggers = 0;
  uint64_t remote_triggers = 0;
  uint64_t duplicate_triggers = 0;
  uint64_t missing_group_members = 0;
  uint64_t reports_sent = 0;
  uint64_t report_bytes = 0;
  uint64_t report_failures = 0;
  uint64_t abandoned_triggers = 0;
  uint64_t forward_failures = 0;
  uint64_t breadcrumb_forwards = 0;  // new hops of already-triggered traces
  std::size_t index_size = 0;
  std::size_t indexed_buffers = 0;
  std::size_t pinned_buffers = 0;
  std::size_t pending_triggers = 0;
};

// Per-node control plane. Consumes the client queues, indexes buffers by
// trace, evicts coherently, schedules triggered groups into per-trigger
// reporting queues and reports them to the collector.
//
// All public operations are thread-safe. poll() and report_phase() are the
// two halves of the agent loop; start() runs them on background threads,
// simulations call them directly on virtual time.
class Agent final : public AgentEndpoint {
 public:
  Agent(NodeMemory& memory, AgentConfig config, const Clock& clock,
        CoordinatorEndpoint* coordinator, CollectorEndpoint* collector);
  ~Agent() override;

  Agent(const Agent&) = delete;
  Agent& operator=(const Agent&) = delete;

  const Breadcrumb& address() const { return config_.address; }
  const AgentConfig& config() const { return config_; }

  // Control half: drain queues, release delayed triggers, evict, expire
  // TTLs, then forward newly accepted local triggers to the coordinator.
  void poll();
  // Reporting half: abandon under overload, then report while bandwidth
  // allows. Returns the number of groups reported.
  std::size_t report_phase(std::size_t max_reports = SIZE_MAX);

  // Caps the complete records consumed; breadcrumbs and triggers are
  // always drained in full.
  DrainCounts drain_queues(std::size_t max_complete = SIZE_MAX);
  std::vector<TraceId> evict_if_needed();
  bool handle_local_trigger(const Trigger& t);
  BreadcrumbMap handle_remote_trigger(const Trigger& t);
  std::optional<ReportOutcome> report_next();
  std::vector<Trigger> abandon_if_overloaded();
  // Sends queued LocalTrigger messages; returns how many were delivered.
  std::size_t flush_forwards();

  // AgentEndpoint
  BreadcrumbMap trigger_notify(const TriggerNotify& msg) override;
  BreadcrumbMap get_breadcrumbs(std::span<const TraceId> ids) override;

  void start();
  void stop();

  AgentStats stats() const;
  // Seconds between a trace's last write and its eviction.
  std::vector<double> eviction_ages() const;
  std::set<TraceId> abandoned_trace_ids() const;
  std::set<TraceId> reported_trace_ids() const;
  // TriggerNotify deliveries per (trace, trigger).
  std::map<std::pair<TraceId, TriggerId>, int> notify_counts() const;
  std::optional<TraceIndexEntry> entry(TraceId id) const;
  // Buffers held by the index plus those in flight to the collector.
  std::size_t held_buffers() const;

 private:
  using Key = std::pair<TraceId, TriggerId>;
  enum class KeyState { kPending, kReported, kAbandoned };
  enum class Source { kLocal, kPropagated, kRemote };

  struct Group {
    Trigger trigger;
    std::vector<TraceId> pinned;  // members holding a pin from this group
    int failures = 0;
  };

  struct ReportingQueue {
    double weight = 1.0;
    double deficit = 0;
    bool turn_started = false;
    bool active = false;  // present in the round-robin list
    std::map<Priority, Group> pending;  // highest priority at rbegin()
  };

  struct KeyInfo {
    KeyState state = KeyState::kPending;
    Nanos expires{0};
  };

  struct Delayed {
    Nanos release;
    TriggerRecord record;
  };

  using LruKey = std::tuple<Nanos, uint64_t, TraceId>;

  DrainCounts drain_locked(Nanos now, std::size_t max_complete = SIZE_MAX);
  void add_buffer_locked(const CompleteRecord& rec, Nanos now);
  void process_trigger_record_locked(const TriggerRecord& rec, Nanos now);
  bool handle_local_locked(const Trigger& t, Nanos now);
  // Returns true when a new group was created or new laterals merged.
  bool schedule_locked(const Trigger& t, Source source, Nanos now);
  void schedule_continuation_locked(TraceIndexEntry& e);
  void enqueue_group_locked(TriggerId tid, Group group);
  void pin_locked(TraceIndexEntry& e, TriggerId tid);
  void unpin_locked(TraceIndexEntry& e, Nanos now);
  void set_triggered_locked(TraceIndexEntry& e, bool triggered);
  TraceIndexEntry& get_or_create_locked(TraceId id, Nanos now);
  void touch_locked(TraceIndexEntry& e, Nanos now);
  void release_buffers_locked(TraceIndexEntry& e);
  void erase_entry_locked(TraceId id);
  std::vector<TraceId> evict_locked(Nanos now);
  void expire_locked(Nanos now);
  std::vector<Trigger> abandon_locked(Nanos now);
  BreadcrumbMap breadcrumbs_for_locked(const std::vector<TraceId>& ids) const;
  ReportingQueue& queue_locked(TriggerId tid);
  ReportingQueue* next_drr_queue_locked();
  void enqueue_forward_locked(const Trigger& t);
  void forward_breadcrumb_locked(const TraceIndexEntry& e,
                                 const Breadcrumb& crumb);
  void loop_control();
  void loop_report();

  NodeMemory& memory_;
  AgentConfig config_;
  const Clock& clock_;
  CoordinatorEndpoint* coordinator_;
  CollectorEndpoint* collector_;
  const std::size_t buffer_count_;

  mutable std::mutex mu_;
  std::unordered_map<TraceId, TraceIndexEntry> index_;
  std::set<LruKey> lru_;  // untriggered entries, oldest first
  std::size_t indexed_buffers_ = 0;
  std::size_t pinned_buffers_ = 0;
  std::size_t inflight_buffers_ = 0;
  uint64_t next_seq_ = 0;

  std::map<TriggerId, ReportingQueue> queues_;
  std::deque<TriggerId> drr_active_;
  std::unordered_map<TraceId, std::map<TriggerId, KeyInfo>> keys_;
  std::deque<std::pair<Nanos, Key>> key_expiry_;
  std::deque<std::pair<Nanos, TraceId>> ttl_queue_;
  Nanos last_sweep_{0};
  std::map<TriggerId, TokenBucket> rate_limiters_;
  TokenBucket bandwidth_;
  std::deque<Delayed> delayed_;
  std::vector<LocalTrigger> outbox_;

  AgentStats stats_;
  std::vector<double> eviction_ages_;
  std::set<TraceId> abandoned_ids_;
  std::set<TraceId> reported_ids_;
  std::map<Key, int> notify_counts_;

  std::mutex forward_mu_;  // serializes flush_forwards()
  std::atomic<bool> running_{false};
  std::thread control_thread_;
  std::thread report_thread_;
};

}  // namespace retrotrace
