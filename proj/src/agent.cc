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

#include "retrotrace/agent.h"

#include <algorithm>
#include <stdexcept>

namespace retrotrace {

namespace {
constexpr std::size_t kMaxAgeSamples = 1 << 20;
}  // namespace

void AgentConfig::validate() const {
  if (!(eviction_threshold > 0 && eviction_threshold < abandon_threshold &&
        abandon_threshold <= 1.0)) {
    throw std::invalid_argument(
        "need 0 < eviction_threshold < abandon_threshold <= 1");
  }
  for (const auto& [tid, w] : queue_weights) {
    if (!(w > 0)) throw std::invalid_argument("queue weights must be > 0");
  }
  for (const auto& [tid, r] : trigger_rate_limits) {
    if (!(r > 0)) throw std::invalid_argument("rate limits must be > 0");
  }
  if (report_bandwidth < 0) {
    throw std::invalid_argument("report bandwidth must be >= 0");
  }
}

Agent::Agent(NodeMemory& memory, AgentConfig config, const Clock& clock,
             CoordinatorEndpoint* coordinator, CollectorEndpoint* collector)
    : memory_(memory),
      config_(std::move(config)),
      clock_(clock),
      coordinator_(coordinator),
      collector_(collector),
      buffer_count_(memory.pool().buffer_count()),
      bandwidth_(config_.report_bandwidth > 0
                     ? TokenBucket(config_.report_bandwidth,
                                   config_.report_bandwidth, clock.now())
                     : TokenBucket::unlimited()) {
  config_.validate();
  Nanos now = clock_.now();
  for (const auto& [tid, rate] : config_.trigger_rate_limits) {
    rate_limiters_.emplace(tid, TokenBucket(rate, std::max(rate, 1.0), now));
  }
  last_sweep_ = now;
}

Agent::~Agent() { stop(); }

// ---------------------------------------------------------------------------
// Index bookkeeping

TraceIndexEntry& Agent::get_or_create_locked(TraceId id, Nanos now) {
  auto [it, inserted] = index_.try_emplace(id);
  TraceIndexEntry& e = it->second;
  if (inserted) {
    e.trace_id = id;
    e.rank = priority_of(id).rank;
    e.first_seen = now;
    e.last_seen = now;
    lru_.emplace(e.last_seen, e.rank, id);
  }
  return e;
}

void Agent::touch_locked(TraceIndexEntry& e, Nanos now) {
  if (e.last_seen == now) return;
  if (!e.triggered()) {
    lru_.erase(LruKey{e.last_seen, e.rank, e.trace_id});
    lru_.emplace(now, e.rank, e.trace_id);
  }
  e.last_seen = now;
}

void Agent::set_triggered_locked(TraceIndexEntry& e, bool triggered) {
  if (triggered) {
    lru_.erase(LruKey{e.last_seen, e.rank, e.trace_id});
    pinned_buffers_ += e.buffers.size();
  } else {
    lru_.emplace(e.last_seen, e.rank, e.trace_id);
    pinned_buffers_ -= e.buffers.size();
  }
}

void Agent::pin_locked(TraceIndexEntry& e, TriggerId tid) {
  if (!e.triggered()) set_triggered_locked(e, true);
  e.triggered_by.insert(tid);
  e.pins++;
}

void Agent::unpin_locked(TraceIndexEntry& e, Nanos now) {
  if (e.pins > 0) e.pins--;
  if (e.pins == 0) {
    e.triggered_until = now + config_.triggered_ttl;
    ttl_queue_.emplace_back(e.triggered_until, e.trace_id);
  }
}

void Agent::release_buffers_locked(TraceIndexEntry& e) {
  if (e.buffers.empty()) return;
  std::vector<BufferId> ids;
  ids.reserve(e.buffers.size());
  for (const auto& b : e.buffers) ids.push_back(b.id);
  memory_.available.try_push_batch(ids);
  indexed_buffers_ -= e.buffers.size();
  if (e.triggered()) pinned_buffers_ -= e.buffers.size();
  e.buffers.clear();
}

void Agent::erase_entry_locked(TraceId id) {
  auto it = index_.find(id);
  if (it == index_.end()) return;
  TraceIndexEntry& e = it->second;
  release_buffers_locked(e);
  if (!e.triggered()) lru_.erase(LruKey{e.last_seen, e.rank, e.trace_id});
  index_.erase(it);
}

// ---------------------------------------------------------------------------
// Draining

void Agent::add_buffer_locked(const CompleteRecord& rec, Nanos now) {
  if (rec.trace_id.is_zero() || rec.buffer.is_null()) return;
  TraceIndexEntry& e = get_or_create_locked(rec.trace_id, now);
  e.buffers.push_back(IndexedBuffer{rec.buffer, rec.used_bytes, next_seq_++});
  indexed_buffers_++;
  if (e.triggered()) pinned_buffers_++;
  touch_locked(e, now);
  // Data still arriving for a trace that was already reported.
  if (e.triggered() && e.pins == 0) schedule_continuation_locked(e);
}

DrainCounts Agent::drain_locked(Nanos now, std::size_t max_complete) {
  DrainCounts counts;
  std::vector<CompleteRecord> complete;
  complete.reserve(std::min<std::size_t>(config_.drain_batch, 1024));
  while (counts.complete < max_complete) {
    complete.clear();
    std::size_t want =
        std::min(config_.drain_batch, max_complete - counts.complete);
    std::size_t n = memory_.complete.try_pop_batch(complete, want);
    for (const auto& rec : complete) add_buffer_locked(rec, now);
    counts.complete += n;
    if (n < want) break;
  }

  std::vector<BreadcrumbRecord> crumbs;
  for (;;) {
    crumbs.clear();
    std::size_t n = memory_.breadcrumbs.try_pop_batch(crumbs, config_.drain_batch);
    for (auto& rec : crumbs) {
      if (rec.trace_id.is_zero() || rec.breadcrumb.empty()) continue;
      TraceIndexEntry& e = get_or_create_locked(rec.trace_id, now);
      auto [it, fresh] = e.breadcrumbs.insert(std::move(rec.breadcrumb));
      // A triggered request that is still running reached a new node: hand
      // the hop to the coordinator so that node's slice is collected too.
      if (fresh && e.triggered()) forward_breadcrumb_locked(e, *it);
    }
    counts.breadcrumbs += n;
    if (n < config_.drain_batch) break;
  }

  std::vector<TriggerRecord> triggers;
  for (;;) {
    triggers.clear();
    std::size_t n = memory_.triggers.try_pop_batch(triggers, config_.drain_batch);
    for (const auto& rec : triggers) process_trigger_record_locked(rec, now);
    counts.triggers += n;
    if (n < config_.drain_batch) break;
  }

  while (!delayed_.empty() && delayed_.front().release <= now) {
    Trigger t = std::move(delayed_.front().record.trigger);
    delayed_.pop_front();
    handle_local_locked(t, now);
  }

  stats_.drained_complete += counts.complete;
  stats_.drained_breadcrumbs += counts.breadcrumbs;
  stats_.drained_triggers += counts.triggers;
  return counts;
}

DrainCounts Agent::drain_queues(std::size_t max_complete) {
  std::lock_guard lock(mu_);
  return drain_locked(clock_.now(), max_complete);
}

// ---------------------------------------------------------------------------
// Eviction and expiry

std::vector<TraceId> Agent::evict_locked(Nanos now) {
  std::vector<TraceId> evicted;
  // Measured against the part of the pool not held by scheduled triggers, so
  // untriggered data keeps a nonzero horizon while reporting is backlogged.
  // With nothing pinned this is plain "index above threshold x pool".
  auto over = [&] {
    const std::size_t held = pinned_buffers_ + inflight_buffers_;
    const double limit = config_.eviction_threshold *
                         static_cast<double>(buffer_count_ - std::min(held, buffer_count_));
    return static_cast<double>(indexed_buffers_ - pinned_buffers_) > limit;
  };
  while (over() && !lru_.empty()) {
    auto [last_seen, rank, id] = *lru_.begin();
    auto it = index_.find(id);
    if (it != index_.end() && !it->second.buffers.empty()) {
      stats_.evicted_buffers += it->second.buffers.size();
      if (eviction_ages_.size() < kMaxAgeSamples) {
        eviction_ages_.push_back(to_seconds(now - last_seen));
      }
    }
    erase_entry_locked(id);
    evicted.push_back(id);
    stats_.evicted_traces++;
  }
  return evicted;
}

std::vector<TraceId> Agent::evict_if_needed() {
  std::lock_guard lock(mu_);
  return evict_locked(clock_.now());
}

void Agent::expire_locked(Nanos now) {
  while (!ttl_queue_.empty() && ttl_queue_.front().first <= now) {
    TraceId id = ttl_queue_.front().second;
    ttl_queue_.pop_front();
    auto it = index_.find(id);
    if (it == index_.end()) continue;
    TraceIndexEntry& e = it->second;
    if (e.pins > 0 || !e.triggered() || e.triggered_until > now) continue;
    set_triggered_locked(e, false);
    e.triggered_by.clear();
  }

  while (!key_expiry_.empty() && key_expiry_.front().first <= now) {
    auto [trace, tid] = key_expiry_.front().second;
    key_expiry_.pop_front();
    auto kit = keys_.find(trace);
    if (kit == keys_.end()) continue;
    auto sit = kit->second.find(tid);
    if (sit != kit->second.end() && sit->second.state != KeyState::kPending &&
        sit->second.expires <= now) {
      kit->second.erase(sit);
    }
    if (kit->second.empty()) keys_.erase(kit);
  }

  // Entries that never received data (gated-out traces, stray breadcrumbs).
  if (now - last_sweep_ >= std::chrono::seconds(1)) {
    last_sweep_ = now;
    const Nanos cutoff = now - config_.triggered_ttl;
    for (auto it = lru_.begin(); it != lru_.end();) {
      auto [last_seen, rank, id] = *it;
      if (last_seen >= cutoff) break;
      ++it;
      auto eit = index_.find(id);
      if (eit != index_.end() && eit->second.buffers.empty()) {
        erase_entry_locked(id);
      }
    }
  }
}

// ---------------------------------------------------------------------------
// Triggers

Agent::ReportingQueue& Agent::queue_locked(TriggerId tid) {
  auto [it, inserted] = queues_.try_emplace(tid);
  if (inserted) {
    auto w = config_.queue_weights.find(tid);
    it->second.weight = w == config_.queue_weights.end() ? 1.0 : w->second;
  }
  return it->second;
}

void Agent::enqueue_group_locked(TriggerId tid, Group group) {
  ReportingQueue& q = queue_locked(tid);
  Priority p = priority_of(group.trigger.trace_id);
  q.pending.insert_or_assign(p, std::move(group));
  if (!q.active) {
    q.active = true;
    drr_active_.push_back(tid);
  }
}

void Agent::schedule_continuation_locked(TraceIndexEntry& e) {
  TriggerId tid = *e.triggered_by.begin();
  keys_[e.trace_id][tid] = KeyInfo{KeyState::kPending, Nanos{0}};
  Group g{Trigger{e.trace_id, tid, {}}, {e.trace_id}, 0};
  pin_locked(e, tid);
  enqueue_group_locked(tid, std::move(g));
}

bool Agent::schedule_locked(const Trigger& t, Source source, Nanos now) {
  if (t.trace_id.is_zero()) return false;
  const TriggerId tid = t.trigger_id;

  auto kit = keys_.find(t.trace_id);
  if (kit != keys_.end()) {
    auto sit = kit->second.find(tid);
    if (sit != kit->second.end()) {
      if (sit->second.state != KeyState::kPending) {
        stats_.duplicate_triggers++;
        return false;
      }
      // Merge laterals into the pending group.
      ReportingQueue& q = queue_locked(tid);
      auto git = q.pending.find(priority_of(t.trace_id));
      if (git == q.pending.end()) return false;
      Group& g = git->second;
      bool added = false;
      for (const TraceId& l : t.laterals) {
        if (l.is_zero() || l == t.trace_id) continue;
        if (std::find(g.trigger.laterals.begin(), g.trigger.laterals.end(),
                      l) != g.trigger.laterals.end()) {
          continue;
        }
        g.trigger.laterals.push_back(l);
        added = true;
        auto eit = index_.find(l);
        if (eit != index_.end()) {
          pin_locked(eit->second, tid);
          g.pinned.push_back(l);
        } else if (source != Source::kRemote) {
          stats_.missing_group_members++;
        }
      }
      if (!added) stats_.duplicate_triggers++;
      return added;
    }
  }

  Group g{make_trigger(t.trace_id, tid, t.laterals), {}, 0};
  for (const TraceId& m : g.trigger.group()) {
    auto eit = index_.find(m);
    TraceIndexEntry* e = nullptr;
    if (eit != index_.end()) {
      e = &eit->second;
    } else if (m == t.trace_id) {
      // Data may still be on its way (a request still running here, or a
      // hop the coordinator learned of before this node wrote anything);
      // keep the trace open so it is reported as a continuation.
      e = &get_or_create_locked(m, now);
    } else {
      if (source != Source::kRemote) stats_.missing_group_members++;
      continue;
    }
    pin_locked(*e, tid);
    g.pinned.push_back(m);
  }
  if (g.pinned.empty()) return false;

  keys_[t.trace_id][tid] = KeyInfo{KeyState::kPending, Nanos{0}};
  enqueue_group_locked(tid, std::move(g));
  return true;
}

BreadcrumbMap Agent::breadcrumbs_for_locked(
    const std::vector<TraceId>& ids) const {
  BreadcrumbMap out;
  for (const TraceId& id : ids) {
    auto it = index_.find(id);
    if (it != index_.end()) out[id] = it->second.breadcrumbs;
  }
  return out;
}

void Agent::forward_breadcrumb_locked(const TraceIndexEntry& e,
                                      const Breadcrumb& crumb) {
  for (TriggerId tid : e.triggered_by) {
    LocalTrigger msg{config_.address, Trigger{e.trace_id, tid, {}}, {}};
    msg.breadcrumbs[e.trace_id].insert(crumb);
    outbox_.push_back(std::move(msg));
    stats_.breadcrumb_forwards++;
  }
}

void Agent::enqueue_forward_locked(const Trigger& t) {
  std::vector<TraceId> ids = t.group();
  LocalTrigger msg{config_.address, t, breadcrumbs_for_locked(ids)};
  msg.breadcrumbs[t.trace_id].insert(config_.address);
  outbox_.push_back(std::move(msg));
}

bool Agent::handle_local_locked(const Trigger& t, Nanos now) {
  auto rl = rate_limiters_.find(t.trigger_id);
  if (rl != rate_limiters_.end() && !rl->second.take(now)) {
    stats_.local_triggers_rate_limited++;
    return false;
  }
  stats_.local_triggers_accepted++;
  if (schedule_locked(t, Source::kLocal, now)) enqueue_forward_locked(t);
  return true;
}

void Agent::process_trigger_record_locked(const TriggerRecord& rec,
                                          Nanos now) {
  if (rec.source == TriggerSource::kPropagated) {
    stats_.propagated_triggers++;
    schedule_locked(rec.trigger, Source::kPropagated, now);
    return;
  }
  if (config_.trigger_delay.count() > 0) {
    delayed_.push_back(Delayed{now + config_.trigger_delay, rec});
    return;
  }
  handle_local_locked(rec.trigger, now);
}

bool Agent::handle_local_trigger(const Trigger& t) {
  std::lock_guard lock(mu_);
  return handle_local_locked(t, clock_.now());
}

BreadcrumbMap Agent::handle_remote_trigger(const Trigger& t) {
  std::lock_guard lock(mu_);
  Nanos now = clock_.now();
  drain_locked(now);
  stats_.remote_triggers++;
  notify_counts_[Key{t.trace_id, t.trigger_id}]++;
  schedule_locked(t, Source::kRemote, now);
  return breadcrumbs_for_locked(t.group());
}

BreadcrumbMap Agent::trigger_notify(const TriggerNotify& msg) {
  return handle_remote_trigger(msg.trigger);
}

BreadcrumbMap Agent::get_breadcrumbs(std::span<const TraceId> ids) {
  std::lock_guard lock(mu_);
  drain_locked(clock_.now());
  return breadcrumbs_for_locked(std::vector<TraceId>(ids.begin(), ids.end()));
}

std::size_t Agent::flush_forwards() {
  std::lock_guard send_lock(forward_mu_);
  std::vector<LocalTrigger> batch;
  {
    std::lock_guard lock(mu_);
    batch.swap(outbox_);
  }
  if (coordinator_ == nullptr) return 0;
  std::size_t delivered = 0;
  uint64_t failures = 0;
  for (const LocalTrigger& msg : batch) {
    for (int attempt = 0;; ++attempt) {
      try {
        coordinator_->local_trigger(msg);
        delivered++;
        break;
      } catch (const TransportError&) {
        if (attempt >= config_.forward_retries) {
          failures++;
          break;
        }
        if (config_.forward_backoff.count() > 0) {
          std::this_thread::sleep_for(config_.forward_backoff);
        }
      }
    }
  }
  if (failures > 0) {
    std::lock_guard lock(mu_);
    stats_.forward_failures += failures;
  }
  return delivered;
}

// ---------------------------------------------------------------------------
// Reporting and abandonment

Agent::ReportingQueue* Agent::next_drr_queue_locked() {
  while (!drr_active_.empty()) {
    TriggerId tid = drr_active_.front();
    ReportingQueue& q = queues_.at(tid);
    if (q.pending.empty()) {
      q.deficit = 0;
      q.turn_started = false;
      q.active = false;
      drr_active_.pop_front();
      continue;
    }
    if (!q.turn_started) {
      q.deficit += q.weight;
      q.turn_started = true;
    }
    if (q.deficit >= 1.0) {
      q.deficit -= 1.0;
      return &q;
    }
    q.turn_started = false;
    drr_active_.pop_front();
    drr_active_.push_back(tid);
  }
  return nullptr;
}

std::optional<ReportOutcome> Agent::report_next() {
  struct Outgoing {
    ReportData data;
    std::vector<IndexedBuffer> buffers;
  };

  Group group;
  std::vector<Outgoing> outgoing;
  std::size_t nbuffers = 0;
  {
    std::lock_guard lock(mu_);
    Nanos now = clock_.now();
    if (!bandwidth_.can_spend(now)) return std::nullopt;
    ReportingQueue* q = next_drr_queue_locked();
    if (q == nullptr) return std::nullopt;
    auto it = std::prev(q->pending.end());
    group = std::move(it->second);
    q->pending.erase(it);

    for (const TraceId& m : group.trigger.group()) {
      auto eit = index_.find(m);
      if (eit == index_.end() || eit->second.buffers.empty()) continue;
      TraceIndexEntry& e = eit->second;
      Outgoing out;
      out.data.agent_id = config_.address;
      out.data.trace_id = m;
      for (const IndexedBuffer& b : e.buffers) {
        auto bytes = memory_.pool().buffer(b.id).first(b.used_bytes);
        out.data.buffers.push_back(
            ReportBuffer{b.seq, std::vector<uint8_t>(bytes.begin(), bytes.end())});
      }
      out.buffers = std::move(e.buffers);
      e.buffers.clear();
      indexed_buffers_ -= out.buffers.size();
      if (e.triggered()) pinned_buffers_ -= out.buffers.size();
      inflight_buffers_ += out.buffers.size();
      nbuffers += out.buffers.size();
      outgoing.push_back(std::move(out));
    }
  }

  bool ok = true;
  std::size_t bytes = 0;
  std::size_t sent = 0;
  for (const Outgoing& out : outgoing) {
    if (collector_ != nullptr) {
      try {
        collector_->report_data(out.data);
      } catch (const TransportError&) {
        ok = false;
        break;
      }
    }
    bytes += out.data.payload_bytes();
    sent++;
  }

  std::lock_guard lock(mu_);
  Nanos now = clock_.now();
  // Whatever reached the collector is done; the rest goes back to the index.
  for (std::size_t i = 0; i < outgoing.size(); ++i) {
    Outgoing& out = outgoing[i];
    inflight_buffers_ -= out.buffers.size();
    if (i < sent) {
      std::vector<BufferId> ids;
      ids.reserve(out.buffers.size());
      for (const auto& b : out.buffers) ids.push_back(b.id);
      memory_.available.try_push_batch(ids);
    } else {
      TraceIndexEntry& e = get_or_create_locked(out.data.trace_id, now);
      e.buffers.insert(e.buffers.begin(), out.buffers.begin(),
                       out.buffers.end());
      indexed_buffers_ += out.buffers.size();
      if (e.triggered()) pinned_buffers_ += out.buffers.size();
    }
  }
  bandwidth_.spend(static_cast<double>(bytes));
  stats_.report_bytes += bytes;

  const TriggerId tid = group.trigger.trigger_id;
  if (!ok) {
    stats_.report_failures++;
    group.failures++;
    keys_[group.trigger.trace_id][tid] = KeyInfo{KeyState::kPending, Nanos{0}};
    enqueue_group_locked(tid, std::move(group));
    return std::nullopt;
  }

  for (const TraceId& m : group.pinned) {
    auto eit = index_.find(m);
    if (eit != index_.end()) unpin_locked(eit->second, now);
  }
  KeyInfo& info = keys_[group.trigger.trace_id][tid];
  info = KeyInfo{KeyState::kReported, now + config_.triggered_ttl};
  key_expiry_.emplace_back(info.expires, Key{group.trigger.trace_id, tid});
  for (const Outgoing& out : outgoing) reported_ids_.insert(out.data.trace_id);
  stats_.reports_sent++;
  return ReportOutcome{std::move(group.trigger), bytes, nbuffers};
}

std::vector<Trigger> Agent::abandon_locked(Nanos now) {
  std::vector<Trigger> abandoned;
  const double limit = config_.abandon_threshold * buffer_count_;
  while (static_cast<double>(pinned_buffers_ + inflight_buffers_) > limit) {
    // Weighted max-min: the queue furthest above its share loses first.
    ReportingQueue* victim = nullptr;
    double worst = -1;
    for (auto& [tid, q] : queues_) {
      if (q.pending.empty()) continue;
      double load = static_cast<double>(q.pending.size()) / q.weight;
      if (load > worst) {
        worst = load;
        victim = &q;
      }
    }
    if (victim == nullptr) break;

    auto it = victim->pending.begin();
    Group g = std::move(it->second);
    victim->pending.erase(it);
    for (const TraceId& m : g.pinned) {
      auto eit = index_.find(m);
      if (eit == index_.end()) continue;
      TraceIndexEntry& e = eit->second;
      if (e.pins > 0) e.pins--;
      if (e.pins == 0) erase_entry_locked(m);
    }
    const TriggerId tid = g.trigger.trigger_id;
    KeyInfo& info = keys_[g.trigger.trace_id][tid];
    info = KeyInfo{KeyState::kAbandoned, now + config_.triggered_ttl};
    key_expiry_.emplace_back(info.expires, Key{g.trigger.trace_id, tid});
    for (const TraceId& m : g.trigger.group()) abandoned_ids_.insert(m);
    stats_.abandoned_triggers++;
    abandoned.push_back(std::move(g.trigger));
  }
  return abandoned;
}

std::vector<Trigger> Agent::abandon_if_overloaded() {
  std::lock_guard lock(mu_);
  return abandon_locked(clock_.now());
}

// ---------------------------------------------------------------------------
// Loop

void Agent::poll() {
  {
    std::lock_guard lock(mu_);
    Nanos now = clock_.now();
    drain_locked(now);
    evict_locked(now);
    expire_locked(now);
  }
  flush_forwards();
}

std::size_t Agent::report_phase(std::size_t max_reports) {
  abandon_if_overloaded();
  std::size_t n = 0;
  while (n < max_reports && report_next()) ++n;
  return n;
}

void Agent::loop_control() {
  while (running_.load(std::memory_order_acquire)) {
    poll();
    std::this_thread::sleep_for(config_.poll_interval);
  }
}

void Agent::loop_report() {
  while (running_.load(std::memory_order_acquire)) {
    if (report_phase(64) == 0) std::this_thread::sleep_for(config_.poll_interval);
  }
}

void Agent::start() {
  if (running_.exchange(true)) return;
  control_thread_ = std::thread([this] { loop_control(); });
  report_thread_ = std::thread([this] { loop_report(); });
}

void Agent::stop() {
  if (!running_.exchange(false)) return;
  if (control_thread_.joinable()) control_thread_.join();
  if (report_thread_.joinable()) report_thread_.join();
}

// ---------------------------------------------------------------------------
// Introspection

AgentStats Agent::stats() const {
  std::lock_guard lock(mu_);
  AgentStats s = stats_;
  s.index_size = index_.size();
  s.indexed_buffers = indexed_buffers_;
  s.pinned_buffers = pinned_buffers_;
  std::size_t pending = 0;
  for (const auto& [tid, q] : queues_) pending += q.pending.size();
  s.pending_triggers = pending;
  return s;
}

std::vector<double> Agent::eviction_ages() const {
  std::lock_guard lock(mu_);
  return eviction_ages_;
}

std::set<TraceId> Agent::abandoned_trace_ids() const {
  std::lock_guard lock(mu_);
  return abandoned_ids_;
}

std::set<TraceId> Agent::reported_trace_ids() const {
  std::lock_guard lock(mu_);
  return reported_ids_;
}

std::map<std::pair<TraceId, TriggerId>, int> Agent::notify_counts() const {
  std::lock_guard lock(mu_);
  return notify_counts_;
}

std::optional<TraceIndexEntry> Agent::entry(TraceId id) const {
  std::lock_guard lock(mu_);
  auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t Agent::held_buffers() const {
  std::lock_guard lock(mu_);
  return indexed_buffers_ + inflight_buffers_;
}

}  // namespace retrotrace
