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

#include "retrotrace/harness/report.h"

#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace retrotrace::harness {

using nlohmann::json;

namespace {

json stats_json(const std::vector<double>& samples, double scale = 1.0) {
  std::vector<double> scaled(samples);
  for (double& v : scaled) v *= scale;
  LatencyStats s = summarize(std::move(scaled));
  return {{"count", s.count}, {"p50", s.p50}, {"p90", s.p90},
          {"p99", s.p99}, {"mean", s.mean}};
}

json counts_json(const CoherenceCounts& c) {
  return {{"coherent", c.coherent},
          {"incoherent", c.incoherent},
          {"missing", c.missing},
          {"coherentPercent", c.coherent_percent()}};
}

void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << text;
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string triggers_csv(const json& m) {
  std::ostringstream out;
  out << "trigger,fired,coherent,incoherent,missing,coherent_percent\n";
  for (const auto& [id, t] : m.at("triggers").items()) {
    out << id << ',' << t.value("fired", 0) << ',' << t.value("coherent", 0)
        << ',' << t.value("incoherent", 0) << ',' << t.value("missing", 0)
        << ',' << std::fixed << std::setprecision(2)
        << t.value("coherentPercent", 0.0) << '\n';
  }
  return out.str();
}

std::string agents_csv(const json& m) {
  std::ostringstream out;
  out << "agent,drained_buffers,evicted_traces,reports,report_bytes,"
         "abandoned_triggers,remote_triggers,local_triggers,rate_limited,"
         "write_rate_bytes_per_sec\n";
  for (const auto& [addr, a] : m.at("agents").items()) {
    out << addr << ',' << a.value("drainedComplete", 0) << ','
        << a.value("evictedTraces", 0) << ',' << a.value("reportsSent", 0)
        << ',' << a.value("reportBytes", 0) << ','
        << a.value("abandonedTriggers", 0) << ','
        << a.value("remoteTriggers", 0) << ','
        << a.value("localTriggersAccepted", 0) << ','
        << a.value("localTriggersRateLimited", 0) << ',' << std::fixed
        << std::setprecision(0) << a.value("writeRate", 0.0) << '\n';
  }
  return out.str();
}

std::string distributions_csv(const json& m) {
  std::ostringstream out;
  out << "metric,count,p50,p90,p99,mean\n";
  for (const char* key : {"latencyMs", "eventHorizonSec", "traversalMs"}) {
    const json& s = m.at(key);
    out << key << ',' << s.value("count", 0) << ',' << s.value("p50", 0.0)
        << ',' << s.value("p90", 0.0) << ',' << s.value("p99", 0.0) << ','
        << s.value("mean", 0.0) << '\n';
  }
  return out.str();
}

std::string summary_from_json(const json& m) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(2);
  out << "topology        " << m.value("topology", "") << '\n';
  out << "tracing         " << (m.value("tracing", true) ? "retroactive" : "off")
      << '\n';
  out << "seed            " << m.value("seed", 0) << '\n';
  out << "requests        " << m.value("requestsCompleted", 0) << " / "
      << m.value("requestsStarted", 0) << " completed\n";
  out << "throughput      " << m.value("throughput", 0.0) << " req/s\n";
  const json& lat = m.at("latencyMs");
  out << "latency ms      p50 " << lat.value("p50", 0.0) << "  p99 "
      << lat.value("p99", 0.0) << '\n';
  if (m.value("tracing", true)) {
    const json& c = m.at("coherence");
    out << "triggered       " << c.value("coherent", 0) + c.value("incoherent", 0) +
                                     c.value("missing", 0)
        << " groups: " << c.value("coherent", 0) << " coherent, "
        << c.value("incoherent", 0) << " incoherent, " << c.value("missing", 0)
        << " missing\n";
    out << "capture         " << m.value("capturePercent", 0.0) << " %\n";
    out << "collector       " << m.value("collectorBytes", 0) << " bytes ("
        << m.value("collectorBytesPerSec", 0.0) / 1024.0 << " KiB/s)\n";
    const json& h = m.at("eventHorizonSec");
    out << "event horizon   p50 " << h.value("p50", 0.0) << " s over "
        << h.value("count", 0) << " evictions\n";
    out << "null writes     " << m.value("nullWrites", 0) << '\n';
    out << "contaminated    " << m.value("contaminatedPayloads", 0) << '\n';
  }
  return out.str();
}

}  // namespace

std::string metrics_json(const RunMetrics& m) {
  json triggers = json::object();
  for (const auto& [id, n] : m.triggers_fired) {
    json t = {{"fired", n}};
    auto it = m.coherence_by_trigger.find(id);
    if (it != m.coherence_by_trigger.end()) t.update(counts_json(it->second));
    triggers[std::to_string(id.value)] = t;
  }
  json agents = json::object();
  for (const auto& [addr, a] : m.agent_stats) {
    auto wr = m.write_rate.find(addr);
    agents[addr] = {
        {"drainedComplete", a.drained_complete},
        {"drainedBreadcrumbs", a.drained_breadcrumbs},
        {"drainedTriggers", a.drained_triggers},
        {"evictedTraces", a.evicted_traces},
        {"evictedBuffers", a.evicted_buffers},
        {"localTriggersAccepted", a.local_triggers_accepted},
        {"localTriggersRateLimited", a.local_triggers_rate_limited},
        {"propagatedTriggers", a.propagated_triggers},
        {"remoteTriggers", a.remote_triggers},
        {"duplicateTriggers", a.duplicate_triggers},
        {"missingGroupMembers", a.missing_group_members},
        {"reportsSent", a.reports_sent},
        {"reportBytes", a.report_bytes},
        {"reportFailures", a.report_failures},
        {"abandonedTriggers", a.abandoned_triggers},
        {"forwardFailures", a.forward_failures},
        {"writeRate", wr == m.write_rate.end() ? 0.0 : wr->second}};
  }
  json j = {{"topology", m.topology},
            {"tracing", m.tracing},
            {"seed", m.seed},
            {"durationSec", m.duration_sec},
            {"endSec", m.end_sec},
            {"requestsStarted", m.requests_started},
            {"requestsCompleted", m.requests_completed},
            {"throughput", m.throughput},
            {"latencyMs", stats_json(m.latency_ms)},
            {"triggers", triggers},
            {"coherence", counts_json(m.coherence)},
            {"capturePercent", m.capture_percent},
            {"collectorBytes", m.collector_bytes},
            {"collectorBytesPerSec", m.collector_bytes_per_sec},
            {"eventHorizonSec", stats_json(m.event_horizon_sec)},
            {"traversalMs", stats_json(m.traversal_ms)},
            {"nullWrites", m.null_writes},
            {"contaminatedPayloads", m.contaminated_payloads},
            {"agents", agents}};
  return j.dump(2);
}

std::string summary_text(const RunMetrics& m) {
  return summary_from_json(json::parse(metrics_json(m)));
}

void write_run(const std::filesystem::path& dir, const RunResult& run) {
  std::filesystem::create_directories(dir);
  std::string mj = metrics_json(run.metrics);
  json m = json::parse(mj);
  write_file(dir / "metrics.json", mj + "\n");
  write_file(dir / "topology.json", topology_to_json(run.spec) + "\n");
  write_file(dir / "triggers.csv", triggers_csv(m));
  write_file(dir / "agents.csv", agents_csv(m));
  write_file(dir / "distributions.csv", distributions_csv(m));
  write_file(dir / "summary.txt", summary_from_json(m));
  if (run.collector) run.collector->persist(dir);
}

std::string render_report(const std::filesystem::path& dir) {
  json m = json::parse(read_file(dir / "metrics.json"));
  std::ostringstream out;
  out << "# triggers\n" << triggers_csv(m) << '\n';
  out << "# agents\n" << agents_csv(m) << '\n';
  out << "# distributions\n" << distributions_csv(m) << '\n';
  out << "# summary\n" << summary_from_json(m);
  return out.str();
}

std::string tracepoint_bench_csv(const TracepointBenchResult& r) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(1);
  out << "op,threads,payload_bytes,count,p50_ns,p90_ns,p99_ns,mean_ns\n";
  auto row = [&](const char* op, const LatencyStats& s) {
    out << op << ',' << r.threads << ',' << r.payload_bytes << ',' << s.count
        << ',' << s.p50 << ',' << s.p90 << ',' << s.p99 << ',' << s.mean
        << '\n';
  };
  row("begin", r.begin);
  row("tracepoint", r.tracepoint);
  row("end", r.end);
  return out.str();
}

std::string buffer_bench_csv(const std::vector<BufferBenchRow>& rows) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(2);
  out << "buffer_bytes,client_mb_per_sec,agent_mb_per_sec,agent_goodput_mb_"
         "per_sec,null_buffer_rate,traces,lossy_traces\n";
  for (const auto& r : rows) {
    out << r.buffer_size << ',' << r.client_throughput / 1e6 << ','
        << r.agent_throughput / 1e6 << ',' << r.agent_goodput / 1e6 << ','
        << std::setprecision(6) << r.null_buffer_rate << std::setprecision(2)
        << ',' << r.traces << ',' << r.lossy_traces << '\n';
  }
  return out.str();
}

}  // namespace retrotrace::harness
