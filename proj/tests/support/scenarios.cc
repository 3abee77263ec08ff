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

#include "scenarios.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "properties.h"
#include "retrotrace/harness/microbench.h"
#include "retrotrace/harness/simulation.h"
#include "retrotrace/harness/topology.h"

namespace retrotrace::check {

namespace {

using harness::RequestRecord;
using harness::RunResult;
using harness::TopologySpec;

class Timer {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point t0_ = std::chrono::steady_clock::now();
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

TopologySpec load(const AcceptanceOptions& opt, const char* name) {
  TopologySpec spec = harness::load_topology(opt.topologies / name);
  spec.tracing.seed = opt.seed;
  return spec;
}

CriterionResult make(const char* id, const char* title) {
  CriterionResult r;
  r.id = id;
  r.title = title;
  return r;
}

}  // namespace

// ---------------------------------------------------------------------------

CriterionResult edge_case_capture(const AcceptanceOptions& opt) {
  CriterionResult r = make("AC1", "edge-case capture");
  Timer timer;
  struct Run {
    const char* file;
    double rate;
  };
  const Run runs[] = {{"chain2.json", 100}, {"fanout12.json", 200},
                      {"fanout12.json", 500}};
  std::ostringstream detail;
  bool ok = true;
  for (const Run& run : runs) {
    TopologySpec spec = load(opt, run.file);
    spec.workload.rate_per_sec = run.rate;
    spec.workload.duration_sec = 20;
    spec.injections.edge_case_probability = 0.01;
    RunResult res = harness::run_scenario(spec);
    CoherenceCounts c = res.coherence([&](const RequestRecord& q) {
                              return q.edge_case;
                            }).overall;
    std::size_t abandoned = 0;
    for (const auto& [a, s] : res.abandoned) abandoned += s.size();
    const bool this_ok = c.total() > 0 && c.coherent_percent() >= 99.0 &&
                         abandoned == 0 &&
                         res.metrics.contaminated_payloads == 0;
    ok = ok && this_ok;
    detail << spec.name << "(" << spec.services.size() << " svc, " << run.rate
           << " r/s): " << c.coherent << "/" << c.total() << " edge-case groups "
           << fmt("%.2f%%", c.coherent_percent()) << " coherent; ";
  }
  r.seconds = timer.seconds();
  r.pass = ok && r.seconds < 60;
  detail << fmt("runtime %.1fs (limit 60s)", r.seconds);
  r.detail = detail.str();
  return r;
}

// ---------------------------------------------------------------------------

CriterionResult coherent_shedding(const AcceptanceOptions& opt) {
  CriterionResult r = make("AC2", "coherent coordinated shedding");
  Timer timer;
  TopologySpec spec = load(opt, "shedding.json");
  spec.workload.duration_sec = 60;
  RunResult res = harness::run_scenario(spec);

  // Sparse triggers are the ones with the two smallest firing rates.
  std::vector<harness::ExtraTrigger> extras = spec.tracing.extra_triggers;
  std::sort(extras.begin(), extras.end(),
            [](const auto& a, const auto& b) { return a.probability < b.probability; });
  const TriggerId spammy = extras.back().id;
  std::set<TriggerId> sparse;
  for (std::size_t i = 0; i + 1 < extras.size(); ++i) sparse.insert(extras[i].id);

  CoherenceReport rep = res.coherence();
  CoherenceCounts sparse_counts;
  for (TriggerId t : sparse) {
    auto it = rep.per_trigger.find(t);
    if (it == rep.per_trigger.end()) continue;
    sparse_counts.coherent += it->second.coherent;
    sparse_counts.incoherent += it->second.incoherent;
    sparse_counts.missing += it->second.missing;
  }
  CoherenceCounts spam = rep.per_trigger[spammy];
  const std::size_t spam_collected = spam.coherent + spam.incoherent;

  bool sets_equal = true;
  const std::set<TraceId>* first = nullptr;
  std::size_t abandoned = 0;
  for (const auto& [addr, ids] : res.abandoned) {
    if (first == nullptr) {
      first = &ids;
      abandoned = ids.size();
    } else if (ids != *first) {
      sets_equal = false;
    }
  }
  const bool oversubscribed = abandoned > 0 && spam.missing > 0;

  r.seconds = timer.seconds();
  r.pass = sparse_counts.total() > 0 && sparse_counts.coherent_percent() >= 99.0 &&
           spam_collected > 0 && spam.incoherent == 0 && sets_equal &&
           oversubscribed && res.agent_address.size() >= 2 && r.seconds < 120;
  std::ostringstream d;
  d << "sparse " << sparse_counts.coherent << "/" << sparse_counts.total()
    << fmt(" (%.2f%%) captured", sparse_counts.coherent_percent()) << "; spammy "
    << spam.coherent << " coherent, " << spam.incoherent << " incoherent, "
    << spam.missing << " shed; abandoned sets across " << res.abandoned.size()
    << " agents " << (sets_equal ? "identical" : "DIFFER") << " (" << abandoned
    << " ids); " << fmt("runtime %.1fs (limit 120s)", r.seconds);
  r.detail = d.str();
  return r;
}

// ---------------------------------------------------------------------------

CriterionResult event_horizon(const AcceptanceOptions& opt) {
  CriterionResult r = make("AC3", "event-horizon collapse");
  Timer timer;
  TopologySpec base = load(opt, "horizon.json");
  base.tracing.trigger_delay_ms = 0;
  RunResult baseline = harness::run_scenario(base);
  double write_rate = 0;
  for (const auto& [a, w] : baseline.metrics.write_rate) {
    write_rate = std::max(write_rate, w);
  }
  if (write_rate <= 0) {
    r.detail = "baseline run wrote nothing";
    return r;
  }
  const double horizon = static_cast<double>(base.tracing.pool_size) / write_rate;
  const double fractions[] = {0,    0.25, 0.5, 0.75, 1.0,  1.25,
                              1.5,  1.75, 2.0, 2.25, 2.5,  3.0};

  TopologySpec spec = base;
  spec.workload.duration_sec = std::ceil(3 * horizon + 15);
  std::vector<double> coherence;
  std::ostringstream curve;
  for (double f : fractions) {
    const double delay = f * horizon;
    spec.tracing.trigger_delay_ms = delay * 1000;
    RunResult res = harness::run_scenario(spec);
    const double end_limit = spec.workload.duration_sec;
    CoherenceCounts c = res.coherence([&](const RequestRecord& q) {
                              return to_seconds(q.end) + delay <= end_limit;
                            }).overall;
    coherence.push_back(c.total() == 0 ? -1 : c.coherent_percent());
    curve << fmt("%.2fH:", f) << fmt("%.1f%%", coherence.back()) << "(n=" << c.total()
          << ") ";
  }

  bool ok = coherence.front() >= 95.0;
  for (std::size_t i = 0; i < coherence.size(); ++i) {
    if (coherence[i] < 0) ok = false;  // no samples
    if (fractions[i] > 2.0 && coherence[i] > 20.0) ok = false;
  }
  int inversions = 0;
  for (std::size_t i = 1; i < coherence.size(); ++i) {
    const double rise = coherence[i] - coherence[i - 1];
    if (rise > 0) {
      inversions++;
      if (rise > 2.0) ok = false;
    }
  }
  if (inversions > 1) ok = false;

  r.seconds = timer.seconds();
  r.pass = ok;
  r.detail = fmt("horizon H=%.2fs", horizon) +
             fmt(" (pool / %.0f B/s); ", write_rate) + curve.str() +
             "inversions " + std::to_string(inversions) +
             fmt("; runtime %.1fs", r.seconds);
  return r;
}

// ---------------------------------------------------------------------------

CriterionResult traversal_correctness(const AcceptanceOptions& opt) {
  CriterionResult r = make("AC4", "breadcrumb traversal correctness");
  Timer timer;
  constexpr std::size_t kWanted = 100;
  std::size_t checked = 0, exact = 0, over_notified = 0, topologies = 0;
  std::size_t max_agents = 0;
  std::string first_problem;
  std::mt19937_64 rng(opt.seed * 7919 + 3);

  while (checked < kWanted && topologies < 200) {
    const std::size_t n = std::uniform_int_distribution<std::size_t>(3, 12)(rng);
    TopologySpec spec = harness::random_dag(rng, n, 4);
    spec.workload.rate_per_sec = 100;
    spec.workload.duration_sec = 3;
    spec.injections.edge_case_probability = 0.05;
    spec.tracing.seed = rng();
    spec.tracing.pool_size = 4u << 20;
    RunResult res = harness::run_scenario(spec);
    topologies++;
    max_agents = std::max(max_agents, spec.agents().size());

    const TriggerId edge = spec.tracing.edge_case_trigger;
    std::map<TraceId, BreadcrumbSet> visited;
    for (const auto& t : res.traversals) {
      if (t.trigger_id == edge) visited[t.trace_id] = t.visited;
    }
    for (const RequestRecord& q : res.requests) {
      if (checked >= kWanted) break;
      if (!q.completed || !q.edge_case) continue;
      checked++;
      BreadcrumbSet truth(q.agents.begin(), q.agents.end());
      auto it = visited.find(q.trace_id);
      const bool same = it != visited.end() && it->second == truth;
      if (same) {
        exact++;
      } else if (first_problem.empty()) {
        first_problem = "trace " + q.trace_id.to_hex() + " visited " +
                        std::to_string(it == visited.end() ? 0 : it->second.size()) +
                        " of " + std::to_string(truth.size()) + " agents";
      }
      for (const auto& [addr, counts] : res.notify_counts) {
        auto c = counts.find({q.trace_id, edge});
        if (c != counts.end() && c->second > 1) over_notified++;
      }
    }
  }

  r.seconds = timer.seconds();
  r.pass = checked == kWanted && exact == kWanted && over_notified == 0;
  std::ostringstream d;
  d << exact << "/" << checked << " traversals visited exactly the ground-truth "
    << "agent set across " << topologies << " random DAGs (up to " << max_agents
    << " agents, fan-out <= 4); " << over_notified << " repeat notifications";
  if (!first_problem.empty()) d << "; first mismatch: " << first_problem;
  d << fmt("; runtime %.1fs", r.seconds);
  r.detail = d.str();
  return r;
}

// ---------------------------------------------------------------------------

CriterionResult autotrigger_oracles(const AcceptanceOptions& opt) {
  CriterionResult r = make("AC5", "autotrigger oracle equivalence");
  Timer timer;
  std::vector<PropertyResult> results = all_oracles(opt.seed);
  bool ok = true;
  std::ostringstream d;
  for (const auto& p : results) {
    ok = ok && p.ok();
    d << p.summary() << "; ";
  }
  r.seconds = timer.seconds();
  r.pass = ok;
  d << fmt("runtime %.1fs", r.seconds);
  r.detail = d.str();
  return r;
}

// ---------------------------------------------------------------------------

CriterionResult queue_provenance(const AcceptanceOptions& opt) {
  CriterionResult r = make("AC6", "queue temporal provenance");
  Timer timer;
  TopologySpec spec = load(opt, "queue10.json");
  RunResult res = harness::run_scenario(spec);

  std::set<TraceId> expensive;
  for (const RequestRecord& q : res.requests) {
    if (q.expensive) expensive.insert(q.trace_id);
  }
  std::size_t firings_with_culprit = 0;
  std::size_t culprit_laterals = 0;
  for (const Trigger& t : res.queue_triggers) {
    std::size_t hits = 0;
    for (const TraceId& l : t.laterals) hits += expensive.count(l);
    if (hits > 0) firings_with_culprit++;
    culprit_laterals += hits;
  }
  std::size_t collected = 0;
  for (const TraceId& id : expensive) collected += res.collector->has_trace(id) ? 1 : 0;

  r.seconds = timer.seconds();
  r.pass = expensive.size() == spec.injections.queue_burst.count &&
           !res.queue_triggers.empty() && firings_with_culprit > 0 &&
           collected == expensive.size();
  std::ostringstream d;
  d << "queue trigger fired " << res.queue_triggers.size() << " times; "
    << firings_with_culprit << " firings carry culprits (" << culprit_laterals
    << " culprit laterals); " << collected << "/" << expensive.size()
    << " expensive requests collected" << fmt("; runtime %.1fs", r.seconds);
  r.detail = d.str();
  return r;
}

// ---------------------------------------------------------------------------

CriterionResult tracepoint_latency(const AcceptanceOptions&) {
  CriterionResult r = make("AC7", "tracepoint microbenchmark");
  Timer timer;
  harness::TracepointBenchConfig cfg;
  cfg.payload_bytes = 32;
  cfg.threads = 1;
  auto one = harness::microbench_tracepoint(cfg);
  cfg.threads = 8;
  auto eight = harness::microbench_tracepoint(cfg);
  cfg.threads = 1;
  cfg.payload_bytes = 2048;
  auto big = harness::microbench_tracepoint(cfg);

  const double p1 = one.tracepoint.p50, p8 = eight.tracepoint.p50,
               p2k = big.tracepoint.p50;
  r.seconds = timer.seconds();
  r.pass = p1 < 1000 && p8 <= 2 * p1 && p2k < 5000;
  r.detail = fmt("32B median %.1f ns (1 thread)", p1) +
             fmt(", %.1f ns (8 threads", p8) + fmt(", %.2fx)", p8 / p1) +
             fmt("; 2KiB median %.1f ns", p2k) + fmt("; runtime %.1fs", r.seconds);
  return r;
}

// ---------------------------------------------------------------------------

CriterionResult buffer_tradeoff(const AcceptanceOptions&) {
  CriterionResult r = make("AC8", "buffer-size trade-off");
  Timer timer;
  harness::BufferBenchConfig cfg;
  for (std::size_t s = 128; s <= 128 * 1024; s *= 2) cfg.sizes.push_back(s);
  auto rows = harness::microbench_buffer_size(cfg);

  double tp128 = 0, tp32k = 0, loss128 = 0, worst_large = 0;
  std::ostringstream d;
  for (const auto& row : rows) {
    if (row.buffer_size == 128) {
      tp128 = row.client_throughput;
      loss128 = row.null_buffer_rate;
    }
    if (row.buffer_size == 32 * 1024) tp32k = row.client_throughput;
    if (row.buffer_size >= 16 * 1024) {
      worst_large = std::max(worst_large, row.null_buffer_rate);
    }
    d << row.buffer_size << "B:" << fmt("%.0fMB/s", row.client_throughput / 1e6)
      << fmt("/loss %.4f", row.null_buffer_rate) << " ";
  }
  r.seconds = timer.seconds();
  r.pass = loss128 > 0 && worst_large == 0 && tp128 > 0 && tp32k >= 5 * tp128;
  d << fmt("; 32KiB/128B throughput %.2fx", tp128 > 0 ? tp32k / tp128 : 0)
    << fmt("; runtime %.1fs", r.seconds);
  r.detail = d.str();
  return r;
}

// ---------------------------------------------------------------------------

CriterionResult property_suites(const AcceptanceOptions& opt) {
  CriterionResult r = make("AC9", "property suites");
  Timer timer;
  std::vector<PropertyResult> results = all_properties(opt.seed);
  bool ok = true;
  std::ostringstream d;
  for (const auto& p : results) {
    ok = ok && p.ok() && p.cases >= kDefaultCases;
    d << p.summary() << "; ";
  }
  r.seconds = timer.seconds();
  r.pass = ok && r.seconds < 300;
  d << fmt("runtime %.1fs (limit 300s)", r.seconds);
  r.detail = d.str();
  return r;
}

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> all = {
      {"AC1", edge_case_capture},     {"AC2", coherent_shedding},
      {"AC3", event_horizon},         {"AC4", traversal_correctness},
      {"AC5", autotrigger_oracles},   {"AC6", queue_provenance},
      {"AC7", tracepoint_latency},    {"AC8", buffer_tradeoff},
      {"AC9", property_suites},
  };
  return all;
}

}  // namespace retrotrace::check
