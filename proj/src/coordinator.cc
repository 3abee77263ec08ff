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

#include "retrotrace/coordinator.h"

#include <future>
#include <thread>

namespace retrotrace {

Coordinator::Coordinator(AgentDirectory& directory, CoordinatorConfig config,
                         const Clock& clock)
    : directory_(directory), config_(config), clock_(clock) {
  if (config_.fanout_cap == 0) config_.fanout_cap = 1;
}

std::vector<Breadcrumb> Coordinator::claim(const Key& key,
                                           const BreadcrumbSet& frontier,
                                           Nanos now) {
  std::lock_guard lock(mu_);
  while (!expiry_.empty() && expiry_.front().first <= now) {
    visited_.erase(expiry_.front().second);
    expiry_.pop_front();
  }
  auto [it, inserted] = visited_.try_emplace(key);
  if (inserted) expiry_.emplace_back(now + config_.visited_ttl, key);
  std::vector<Breadcrumb> claimed;
  for (const Breadcrumb& b : frontier) {
    if (it->second.insert(b).second) claimed.push_back(b);
  }
  return claimed;
}

BreadcrumbSet Coordinator::visited_for(const Key& key) const {
  std::lock_guard lock(mu_);
  auto it = visited_.find(key);
  return it == visited_.end() ? BreadcrumbSet{} : it->second;
}

std::optional<BreadcrumbMap> Coordinator::notify(const Breadcrumb& address,
                                                 const TriggerNotify& msg) {
  for (int attempt = 0;; ++attempt) {
    try {
      auto endpoint = directory_.resolve(address);
      if (!endpoint) return std::nullopt;
      return endpoint->trigger_notify(msg);
    } catch (const TransportError&) {
      if (attempt >= config_.retries) return std::nullopt;
      if (config_.retry_backoff.count() > 0) {
        std::this_thread::sleep_for(config_.retry_backoff);
      }
    }
  }
}

TraversalState Coordinator::disseminate(const Trigger& trigger,
                                        const BreadcrumbMap& seeds) {
  TraversalState state;
  state.trigger = trigger;
  state.start_time = steady_clock().now();
  const Key key{trigger.trace_id, trigger.trigger_id};

  for (const auto& [id, crumbs] : seeds) {
    state.frontier.insert(crumbs.begin(), crumbs.end());
  }
  TriggerNotify msg{trigger, seeds};
  const bool parallel =
      config_.parallel && directory_.supports_concurrent_calls();

  while (!state.frontier.empty()) {
    std::vector<Breadcrumb> claimed = claim(key, state.frontier, clock_.now());
    state.frontier.clear();
    if (claimed.empty()) break;
    state.rounds++;

    std::vector<std::optional<BreadcrumbMap>> replies(claimed.size());
    for (std::size_t lo = 0; lo < claimed.size(); lo += config_.fanout_cap) {
      std::size_t hi = std::min(claimed.size(), lo + config_.fanout_cap);
      if (parallel && hi - lo > 1) {
        std::vector<std::future<std::optional<BreadcrumbMap>>> calls;
        calls.reserve(hi - lo);
        for (std::size_t i = lo; i < hi; ++i) {
          calls.push_back(std::async(std::launch::async, [&, i] {
            return notify(claimed[i], msg);
          }));
        }
        for (std::size_t i = lo; i < hi; ++i) replies[i] = calls[i - lo].get();
      } else {
        for (std::size_t i = lo; i < hi; ++i) replies[i] = notify(claimed[i], msg);
      }
    }

    state.notifications += claimed.size();
    for (std::size_t i = 0; i < claimed.size(); ++i) {
      if (!replies[i]) {
        state.failures.insert(claimed[i]);
        continue;
      }
      for (auto& [id, crumbs] : *replies[i]) {
        for (const Breadcrumb& b : crumbs) {
          state.frontier.insert(b);
          msg.breadcrumbs[id].insert(b);
        }
      }
    }
  }

  state.visited = visited_for(key);
  state.end_time = steady_clock().now();

  TraversalRecord rec;
  rec.trace_id = trigger.trace_id;
  rec.trigger_id = trigger.trigger_id;
  rec.duration_ms =
      std::chrono::duration<double, std::milli>(state.end_time - state.start_time)
          .count();
  rec.agents_contacted = state.notifications;
  rec.failures = state.failures.size();
  rec.rounds = state.rounds;
  rec.visited = state.visited;
  {
    std::lock_guard lock(mu_);
    stats_.push_back(rec);
  }
  return state;
}

void Coordinator::local_trigger(const LocalTrigger& msg) {
  disseminate(msg.trigger, msg.breadcrumbs);
}

std::vector<TraversalRecord> Coordinator::traversal_stats() const {
  std::lock_guard lock(mu_);
  return stats_;
}

void Coordinator::clear_stats() {
  std::lock_guard lock(mu_);
  stats_.clear();
}

}  // namespace retrotrace
