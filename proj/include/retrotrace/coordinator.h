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

#include <deque>
#include <map>
#include <mutex>
#include <optional>
#include <vector>

#include "retrotrace/clock.h"
#include "retrotrace/transport.h"
#include "retrotrace/types.h"

namespace retrotrace {

struct CoordinatorConfig {
  std::size_t fanout_cap = 64;  // in-flight agent RPCs per traversal
  int retries = 2;
  Nanos retry_backoff = std::chrono::milliseconds(50);
  bool parallel = true;
  // How long a finished traversal's visited set is remembered, so repeats
  // of the same (trace, trigger) never notify an agent twice.
  Nanos visited_ttl = std::chrono::seconds(60);
};

struct TraversalState {
  Trigger trigger;
  BreadcrumbSet visited;    // every agent notified for this (trace, trigger)
  BreadcrumbSet frontier;   // empty once the traversal has finished
  BreadcrumbSet failures;
  Nanos start_time{0};
  Nanos end_time{0};
  std::size_t notifications = 0;  // sent by this call
  int rounds = 0;
};

struct TraversalRecord {
  TraceId trace_id;
  TriggerId trigger_id;
  double duration_ms = 0;
  std::size_t agents_contacted = 0;
  std::size_t failures = 0;
  int rounds = 0;
  BreadcrumbSet visited;
};

// Logically centralized trigger dissemination: follows breadcrumbs from the
// seeds, notifying each agent that holds part of the trigger group.
class Coordinator final : public CoordinatorEndpoint {
 public:
  explicit Coordinator(AgentDirectory& directory, CoordinatorConfig config = {},
                       const Clock& clock = steady_clock());

  TraversalState disseminate(const Trigger& trigger,
                             const BreadcrumbMap& seeds);

  void local_trigger(const LocalTrigger& msg) override;

  std::vector<TraversalRecord> traversal_stats() const;
  void clear_stats();

 private:
  using Key = std::pair<TraceId, TriggerId>;

  // Marks addresses visited for `key`; returns the ones newly claimed.
  std::vector<Breadcrumb> claim(const Key& key, const BreadcrumbSet& frontier,
                                Nanos now);
  BreadcrumbSet visited_for(const Key& key) const;
  std::optional<BreadcrumbMap> notify(const Breadcrumb& address,
                                      const TriggerNotify& msg);

  AgentDirectory& directory_;
  CoordinatorConfig config_;
  const Clock& clock_;

  mutable std::mutex mu_;
  std::map<Key, BreadcrumbSet> visited_;
  std::deque<std::pair<Nanos, Key>> expiry_;
  std::vector<TraversalRecord> stats_;
};

}  // namespace retrotrace
