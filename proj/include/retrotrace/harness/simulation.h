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

// Discrete-event simulation of a service topology instrumented with the
// tracing client. Time is virtual: agents, coordinator and collector all run
// on one ManualClock, and agents advance in lockstep ticks.

#pragma once

#include <functional>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "retrotrace/agent.h"
#include "retrotrace/collector.h"
#include "retrotrace/coordinator.h"
#include "retrotrace/harness/topology.h"

namespace retrotrace::harness {

// Recorded out of band: never read back through the tracing path.
struct RequestRecord {
  TraceId trace_id;
  Nanos start{0};
  Nanos end{0};
  bool completed = false;
  bool edge_case = false;
  bool exception = false;
  bool expensive = false;  // part of an injected queue burst
  std::set<std::string> agents;           // addresses that ran a segment
  std::map<std::string, uint64_t> bytes;  // payload bytes written per agent
  bool lost_data = false;                 // a write hit the null buffer
  std::set<TriggerId> triggers;           // fired with this trace as primary
};

struct RunMetrics {
  std::string topology;
  bool tracing = true;
  uint64_t seed = 0;
  double duration_sec = 0;  // workload window
  double end_sec = 0;       // last simulated instant
  std::size_t requests_started = 0;
  std::size_t requests_completed = 0;
  double throughput = 0;  // completed requests per workload second
  std::vector<double> latency_ms;
  std::map<TriggerId, std::size_t> triggers_fired;
  CoherenceCounts coherence;  // over triggered traces
  std::map<TriggerId, CoherenceCounts> coherence_by_trigger;
  double capture_percent = 0;
  uint64_t collector_bytes = 0;
  double collector_bytes_per_sec = 0;
  std::vector<double> event_horizon_sec;
  std::vector<double> traversal_ms;
  uint64_t null_writes = 0;
  uint64_t contaminated_payloads = 0;
  // Pool bytes turned over per second, by agent address.
  std::map<std::string, double> write_rate;
  std::map<std::string, AgentStats> agent_stats;
};

struct RunResult {
  TopologySpec spec;
  RunMetrics metrics;
  std::vector<RequestRecord> requests;
  std::shared_ptr<Collector> collector;
  std::map<std::string, std::string> agent_address;  // agent name -> address
  std::map<std::string, std::set<TraceId>> abandoned;  // by address
  std::map<std::string, std::set<TraceId>> reported;
  std::map<std::string, std::map<std::pair<TraceId, TriggerId>, int>>
      notify_counts;
  std::vector<TraversalRecord> traversals;
  std::vector<Trigger> queue_triggers;  // queue trigger firings with laterals

  // Ground truth for triggered traces accepted by `filter`.
  GroundTruth truth(
      const std::function<bool(const RequestRecord&)>& filter = {}) const;
  CoherenceReport coherence(
      const std::function<bool(const RequestRecord&)>& filter = {}) const;
};

// Drives the workload described by `spec`, including spec.tracing.
// Throws std::runtime_error if a component cannot be started.
RunResult run_scenario(const TopologySpec& spec);

// Smallest payload that still carries the trace id and a sequence number.
inline constexpr std::size_t kMinPayloadBytes = 24;

}  // namespace retrotrace::harness
