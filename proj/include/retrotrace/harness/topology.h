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

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "retrotrace/types.h"

namespace retrotrace::harness {

struct ExecTime {
  enum class Kind { kConstant, kUniform, kLognormal };
  Kind kind = Kind::kConstant;
  double ms = 1.0;                 // constant
  double min_ms = 0, max_ms = 0;   // uniform
  double mu = 0, sigma = 0;        // lognormal over milliseconds

  double sample(std::mt19937_64& rng) const;
};

struct ChildCall {
  std::string service;
  std::string api;
  double call_probability = 1.0;
  bool concurrent = false;
  // Filled in by validate().
  std::size_t service_index = 0;
  std::size_t api_index = 0;
};

struct ApiSpec {
  std::string name;
  ExecTime exec;
  std::vector<ChildCall> children;
};

struct ServiceSpec {
  std::string name;
  std::string agent;   // placement; several services may share an agent
  bool queue = false;  // single worker behind a FIFO queue
  std::vector<ApiSpec> apis;
};

struct WorkloadSpec {
  double rate_per_sec = 100;
  double duration_sec = 10;
  std::string root_service;
  std::string root_api;
};

struct LatencyInjection {
  double probability = 0;
  double min_ms = 0;
  double max_ms = 0;
};

struct QueueBurst {
  double at_sec = -1;  // negative disables
  std::size_t count = 0;
  double cost_ms = 0;
};

struct Injections {
  double edge_case_probability = 0;
  double exception_rate = 0;
  LatencyInjection latency;
  QueueBurst queue_burst;
};

struct ExtraTrigger {
  TriggerId id;
  double probability = 0;
  double weight = 1.0;
  double rate_limit = 0;  // per second per agent; 0 = none
};

struct TracingConfig {
  bool enabled = true;
  bool tcp = false;
  uint64_t seed = 1;
  std::size_t pool_size = 32u << 20;
  std::size_t buffer_size = 4096;
  double trace_percentage = 1.0;
  std::size_t payload_bytes = 200;
  std::size_t tracepoints_per_segment = 4;
  double eviction_threshold = 0.80;
  double abandon_threshold = 0.90;
  double report_bandwidth = 0;  // bytes/s per agent, 0 = unlimited
  double trigger_delay_ms = 0;
  double tick_ms = 1.0;
  double drain_sec = 2.0;
  double network_ms = 0.1;  // one-way hop latency
  TriggerId edge_case_trigger{16};
  TriggerId exception_trigger{17};
  TriggerId latency_trigger{18};
  TriggerId queue_trigger{19};
  double latency_percentile = 0;  // 0 disables the root latency trigger
  double queue_percentile = 99.99;
  std::size_t queue_laterals = 10;
  std::vector<ExtraTrigger> extra_triggers;
};

// Checked by the CLI after a run; negative values are not checked.
struct Expectations {
  double min_capture_percent = -1;
};

struct TopologySpec {
  std::string name;
  std::vector<ServiceSpec> services;
  WorkloadSpec workload;
  Injections injections;
  TracingConfig tracing;
  Expectations expect;

  // Resolves child references and checks probabilities and acyclicity.
  // Throws std::invalid_argument.
  void validate();

  std::size_t service_index(const std::string& name) const;
  std::size_t root_service_index() const;
  std::size_t root_api_index() const;
  std::vector<std::string> agents() const;  // sorted, unique
};

TopologySpec parse_topology(const std::string& json_text);
TopologySpec load_topology(const std::filesystem::path& path);
std::string topology_to_json(const TopologySpec& spec);

// Random DAG with one service per agent: `services` nodes, fan-out at most
// `max_fanout`, node 0 as root.
TopologySpec random_dag(std::mt19937_64& rng, std::size_t services,
                        std::size_t max_fanout);

}  // namespace retrotrace::harness
