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

#include <cstddef>
#include <cstdint>
#include <vector>

namespace retrotrace::harness {

struct LatencyStats {
  std::size_t count = 0;
  double p50 = 0;  // nanoseconds
  double p90 = 0;
  double p99 = 0;
  double mean = 0;
};

// Summarizes samples in nanoseconds; sorts a copy.
LatencyStats summarize(std::vector<double> samples);

struct TracepointBenchConfig {
  std::size_t threads = 1;
  std::size_t payload_bytes = 32;
  std::size_t trace_bytes = 16 * 1024;  // written per trace
  std::size_t traces_per_thread = 500;
  std::size_t pool_size = 64u << 20;
  std::size_t buffer_size = 32 * 1024;
};

struct TracepointBenchResult {
  std::size_t threads = 0;
  std::size_t payload_bytes = 0;
  LatencyStats begin;
  LatencyStats tracepoint;
  LatencyStats end;
  uint64_t null_writes = 0;
};

// Real threads writing into one client with a live agent recycling
// buffers; every call is timed individually.
TracepointBenchResult microbench_tracepoint(const TracepointBenchConfig& cfg);

struct BufferBenchConfig {
  std::vector<std::size_t> sizes;
  std::size_t payload_bytes = 1024;
  std::size_t trace_bytes = 16 * 1024;
  // Small enough to stay mostly cache resident, so the sweep measures
  // per-buffer costs rather than DRAM bandwidth noise.
  std::size_t pool_size = 32u << 20;
  double seconds_per_size = 0.5;
  // Alternating slices of client and agent work on the calling thread. The
  // agent slice is a share of the client time actually spent.
  // Short slices keep the backlog between drains close to what a
  // concurrently running agent would see.
  double client_slice_us = 20;
  double agent_slice_us = 20;
};

struct BufferBenchRow {
  std::size_t buffer_size = 0;
  double client_throughput = 0;  // payload bytes kept per client-second
  double agent_throughput = 0;   // buffer bytes indexed per agent-second
  double agent_goodput = 0;      // same, counting only traces with no loss
  double null_buffer_rate = 0;   // fraction of frames that hit the null buffer
  uint64_t traces = 0;
  uint64_t lossy_traces = 0;
};

// Buffer-size sweep with a single-thread workload. Client and agent share
// one thread in fixed time slices so the result does not depend on how
// many cores the machine has.
std::vector<BufferBenchRow> microbench_buffer_size(const BufferBenchConfig& cfg);

}  // namespace retrotrace::harness
