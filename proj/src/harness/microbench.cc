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

#include "retrotrace/harness/microbench.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <thread>

#include "retrotrace/agent.h"
#include "retrotrace/client.h"

namespace retrotrace::harness {

namespace {

using SteadyTime = std::chrono::steady_clock;

double ns_between(SteadyTime::time_point a, SteadyTime::time_point b) {
  return std::chrono::duration<double, std::nano>(b - a).count();
}

double at_rank(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return 0;
  std::size_t i = static_cast<std::size_t>(q * static_cast<double>(sorted.size() - 1));
  return sorted[i];
}

}  // namespace

LatencyStats summarize(std::vector<double> samples) {
  LatencyStats s;
  s.count = samples.size();
  if (samples.empty()) return s;
  std::sort(samples.begin(), samples.end());
  s.p50 = at_rank(samples, 0.50);
  s.p90 = at_rank(samples, 0.90);
  s.p99 = at_rank(samples, 0.99);
  s.mean = std::accumulate(samples.begin(), samples.end(), 0.0) /
           static_cast<double>(samples.size());
  return s;
}

TracepointBenchResult microbench_tracepoint(const TracepointBenchConfig& cfg) {
  ChannelConfig chan;
  chan.pool_size = cfg.pool_size;
  chan.buffer_size = cfg.buffer_size;
  chan.prefault = true;
  NodeMemory memory(chan);
  Client client(memory, ClientConfig{"bench:0", 1.0});
  AgentConfig acfg;
  acfg.address = "bench:0";
  Agent agent(memory, acfg, steady_clock(), nullptr, nullptr);
  agent.start();

  const std::size_t per_trace =
      std::max<std::size_t>(1, cfg.trace_bytes / std::max<std::size_t>(1, cfg.payload_bytes));
  std::vector<std::vector<double>> begins(cfg.threads), points(cfg.threads),
      ends(cfg.threads);

  auto worker = [&](std::size_t t) {
    std::vector<uint8_t> payload(cfg.payload_bytes, 0xAB);
    std::mt19937_64 rng(t + 1);
    auto& b = begins[t];
    auto& p = points[t];
    auto& e = ends[t];
    b.reserve(cfg.traces_per_thread);
    e.reserve(cfg.traces_per_thread);
    p.reserve(cfg.traces_per_thread * per_trace);
    for (std::size_t i = 0; i < cfg.traces_per_thread; ++i) {
      TraceId id = TraceId::random(rng);
      auto t0 = SteadyTime::now();
      client.begin(id);
      auto t1 = SteadyTime::now();
      b.push_back(ns_between(t0, t1));
      for (std::size_t k = 0; k < per_trace; ++k) {
        auto a = SteadyTime::now();
        client.tracepoint(payload);
        auto z = SteadyTime::now();
        p.push_back(ns_between(a, z));
      }
      auto t2 = SteadyTime::now();
      client.end();
      auto t3 = SteadyTime::now();
      e.push_back(ns_between(t2, t3));
    }
  };

  std::vector<std::thread> threads;
  for (std::size_t t = 0; t < cfg.threads; ++t) threads.emplace_back(worker, t);
  for (auto& th : threads) th.join();
  agent.stop();

  auto merge = [](std::vector<std::vector<double>>& parts) {
    std::vector<double> all;
    for (auto& v : parts) all.insert(all.end(), v.begin(), v.end());
    return all;
  };
  TracepointBenchResult r;
  r.threads = cfg.threads;
  r.payload_bytes = cfg.payload_bytes;
  r.begin = summarize(merge(begins));
  r.tracepoint = summarize(merge(points));
  r.end = summarize(merge(ends));
  r.null_writes = client.counters().null_writes;
  return r;
}

std::vector<BufferBenchRow> microbench_buffer_size(const BufferBenchConfig& cfg) {
  std::vector<BufferBenchRow> rows;
  const std::vector<uint8_t> payload(cfg.payload_bytes, 0x5A);
  const std::size_t per_trace = std::max<std::size_t>(
      1, cfg.trace_bytes / std::max<std::size_t>(1, cfg.payload_bytes));
  const auto client_slice = std::chrono::duration<double, std::micro>(cfg.client_slice_us);
  const double agent_ratio = cfg.agent_slice_us / cfg.client_slice_us;
  // Small drain steps so the agent cannot overrun its budget by much.
  constexpr std::size_t kAgentStep = 32;

  for (std::size_t size : cfg.sizes) {
    ChannelConfig chan;
    chan.buffer_size = size;
    chan.pool_size = cfg.pool_size / size * size;
    chan.prefault = true;
    NodeMemory memory(chan);
    Client client(memory, ClientConfig{"bench:0", 1.0});
    AgentConfig acfg;
    acfg.address = "bench:0";
    acfg.drain_batch = 256;
    Agent agent(memory, acfg, steady_clock(), nullptr, nullptr);

    std::mt19937_64 rng(size);
    double client_ns = 0, agent_ns = 0;
    uint64_t written = 0, traces = 0, lossy = 0;
    uint64_t drained = 0;
    const auto stop_at =
        SteadyTime::now() + std::chrono::duration<double>(cfg.seconds_per_size);

    while (SteadyTime::now() < stop_at) {
      auto c0 = SteadyTime::now();
      auto c_end = c0 + std::chrono::duration_cast<SteadyTime::duration>(client_slice);
      do {
        client.begin(TraceId::random(rng));
        for (std::size_t k = 0; k < per_trace; ++k) client.tracepoint(payload);
        if (client.current_trace_lost_data()) lossy++;
        client.end();
        traces++;
        written += per_trace * payload.size();
      } while (SteadyTime::now() < c_end);
      auto c1 = SteadyTime::now();
      client_ns += ns_between(c0, c1);

      // The agent gets as much time as the client actually used (scaled by
      // the configured ratio), as if both ran side by side on two cores.
      auto a_end = c1 + std::chrono::duration_cast<SteadyTime::duration>(
                            (c1 - c0) * agent_ratio);
      auto now = c1;
      do {
        DrainCounts d = agent.drain_queues(kAgentStep);
        agent.evict_if_needed();
        drained += d.complete;
        now = SteadyTime::now();
        if (d.complete == 0) break;
      } while (now < a_end);
      agent_ns += ns_between(c1, now);
    }

    ClientCounters cc = client.counters();
    // Frames per payload: one when it fits a buffer, else one per chunk.
    const double room = static_cast<double>(size - 4);
    const double frames_per_payload =
        std::max(1.0, std::ceil(static_cast<double>(payload.size()) / room));
    const double frames = frames_per_payload * static_cast<double>(traces * per_trace);

    BufferBenchRow row;
    row.buffer_size = size;
    row.traces = traces;
    row.lossy_traces = lossy;
    // Only payload that reached a real buffer counts; discarding into the
    // null buffer is cheap and would otherwise inflate the figure.
    const uint64_t discarded = cc.null_bytes - cc.null_writes * kFrameHeaderBytes;
    const double kept = static_cast<double>(written - std::min(written, discarded));
    row.client_throughput = client_ns > 0 ? kept / (client_ns * 1e-9) : 0;
    row.agent_throughput =
        agent_ns > 0 ? static_cast<double>(drained) * static_cast<double>(size) /
                           (agent_ns * 1e-9)
                     : 0;
    double good = traces == 0 ? 0 : static_cast<double>(traces - lossy) / traces;
    row.agent_goodput = row.agent_throughput * good;
    row.null_buffer_rate = frames > 0 ? static_cast<double>(cc.null_writes) / frames : 0;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace retrotrace::harness
