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

// Python bindings: identifiers, context wire format, autotriggers, an
// in-process deployment of clients and agents, and the simulation harness.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <map>
#include <memory>
#include <string>

#include "retrotrace/agent.h"
#include "retrotrace/autotriggers.h"
#include "retrotrace/client.h"
#include "retrotrace/collector.h"
#include "retrotrace/coordinator.h"
#include "retrotrace/harness/microbench.h"
#include "retrotrace/harness/simulation.h"
#include "retrotrace/harness/topology.h"
#include "retrotrace/sliding_quantile.h"
#include "retrotrace/wire.h"

namespace py = pybind11;
using namespace retrotrace;

namespace {

std::span<const uint8_t> as_span(const py::bytes& b) {
  std::string_view v(b);
  return {reinterpret_cast<const uint8_t*>(v.data()), v.size()};
}

py::bytes to_bytes(const std::vector<uint8_t>& v) {
  return py::bytes(reinterpret_cast<const char*>(v.data()), v.size());
}

// Clients, agents, one coordinator and one collector in this process.
// Agents run on the steady clock; poll() drives them synchronously.
class Deployment {
 public:
  Deployment() : coordinator_(directory_, sequential()) {}

  void add_node(const std::string& address, std::size_t pool_size,
                std::size_t buffer_size, double trace_percentage) {
    if (nodes_.contains(address)) {
      throw std::invalid_argument("duplicate node " + address);
    }
    ChannelConfig ch;
    ch.pool_size = pool_size;
    ch.buffer_size = buffer_size;
    Node& n = nodes_[address];
    n.memory = std::make_unique<NodeMemory>(ch);
    n.client = std::make_unique<Client>(*n.memory,
                                        ClientConfig{address, trace_percentage});
    AgentConfig ac;
    ac.address = address;
    n.agent = std::make_unique<Agent>(*n.memory, ac, steady_clock(),
                                      &coordinator_, &collector_);
    directory_.add(address, n.agent.get());
  }

  Client& client(const std::string& address) { return *node(address).client; }
  Agent& agent(const std::string& address) { return *node(address).agent; }
  Collector& collector() { return collector_; }

  // One control and one reporting pass on every agent.
  std::size_t poll() {
    for (auto& [_, n] : nodes_) n.agent->poll();
    std::size_t reported = 0;
    for (auto& [_, n] : nodes_) reported += n.agent->report_phase();
    return reported;
  }

 private:
  // Members destruct bottom-up, so each agent goes before its memory.
  struct Node {
    std::unique_ptr<NodeMemory> memory;
    std::unique_ptr<Client> client;
    std::unique_ptr<Agent> agent;
  };

  static CoordinatorConfig sequential() {
    CoordinatorConfig c;
    c.parallel = false;
    return c;
  }

  Node& node(const std::string& address) {
    auto it = nodes_.find(address);
    if (it == nodes_.end()) throw py::key_error(address);
    return it->second;
  }

  InProcessDirectory directory_;
  Coordinator coordinator_;
  Collector collector_;
  std::map<std::string, Node> nodes_;
};

py::dict metrics_dict(const harness::RunMetrics& m) {
  py::dict d;
  d["topology"] = m.topology;
  d["tracing"] = m.tracing;
  d["seed"] = m.seed;
  d["requests_started"] = m.requests_started;
  d["requests_completed"] = m.requests_completed;
  d["throughput"] = m.throughput;
  d["coherent"] = m.coherence.coherent;
  d["incoherent"] = m.coherence.incoherent;
  d["missing"] = m.coherence.missing;
  d["coherent_percent"] = m.coherence.coherent_percent();
  d["capture_percent"] = m.capture_percent;
  d["collector_bytes"] = m.collector_bytes;
  d["null_writes"] = m.null_writes;
  d["contaminated_payloads"] = m.contaminated_payloads;
  py::dict fired;
  for (const auto& [tid, n] : m.triggers_fired) fired[py::int_(tid.value)] = n;
  d["triggers_fired"] = fired;
  d["latency_ms"] = m.latency_ms;
  return d;
}

py::dict latency_dict(const harness::LatencyStats& s) {
  py::dict d;
  d["count"] = s.count;
  d["p50"] = s.p50;
  d["p90"] = s.p90;
  d["p99"] = s.p99;
  d["mean"] = s.mean;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "retrotrace native core";

  py::register_exception<DecodeError>(m, "DecodeError", PyExc_ValueError);

  py::class_<TraceId>(m, "TraceId")
      .def(py::init<>())
      .def(py::init<uint64_t, uint64_t>(), py::arg("hi"), py::arg("lo"))
      .def_static("from_int", &TraceId::from_u64)
      .def_static("from_hex", &TraceId::from_hex)
      .def_static("random", py::overload_cast<>(&TraceId::random))
      .def_readonly("hi", &TraceId::hi)
      .def_readonly("lo", &TraceId::lo)
      .def("hex", &TraceId::to_hex)
      .def("__bool__", [](const TraceId& t) { return !t.is_zero(); })
      .def("__eq__", [](const TraceId& a, const TraceId& b) { return a == b; })
      .def("__lt__", [](const TraceId& a, const TraceId& b) { return a < b; })
      .def("__hash__", [](const TraceId& t) { return std::hash<TraceId>{}(t); })
      .def("__repr__", [](const TraceId& t) { return "TraceId(" + t.to_hex() + ")"; });

  m.def("priority_rank", [](const TraceId& t) { return priority_of(t).rank; },
        "Retention rank; higher is kept longer.");

  py::class_<Trigger>(m, "Trigger")
      .def(py::init([](TraceId id, uint32_t tid, std::vector<TraceId> lat) {
             return make_trigger(id, TriggerId{tid}, std::move(lat));
           }),
           py::arg("trace_id"), py::arg("trigger_id"),
           py::arg("laterals") = std::vector<TraceId>{})
      .def_readonly("trace_id", &Trigger::trace_id)
      .def_property_readonly("trigger_id",
                             [](const Trigger& t) { return t.trigger_id.value; })
      .def_readonly("laterals", &Trigger::laterals);

  m.def("serialize_context",
        [](TraceId id, const std::string& origin, const std::vector<uint32_t>& fired) {
          TraceContext ctx{id, origin, {}};
          for (uint32_t f : fired) ctx.fired_triggers.insert(TriggerId{f});
          return to_bytes(serialize_context(ctx));
        },
        py::arg("trace_id"), py::arg("origin"),
        py::arg("fired") = std::vector<uint32_t>{});
  m.def("deserialize_context", [](const py::bytes& b) {
    TraceContext ctx = deserialize_context(as_span(b));
    std::vector<uint32_t> fired;
    for (TriggerId t : ctx.fired_triggers) fired.push_back(t.value);
    return py::make_tuple(ctx.trace_id, ctx.origin, fired);
  });

  py::class_<SlidingQuantile>(m, "SlidingQuantile")
      .def(py::init<std::size_t>(), py::arg("capacity"))
      .def("add", &SlidingQuantile::add)
      .def("kth", &SlidingQuantile::kth)
      .def("percentile", &SlidingQuantile::percentile)
      .def("__len__", &SlidingQuantile::size);

  py::class_<PercentileTrigger>(m, "PercentileTrigger")
      .def(py::init([](uint32_t id, double p, std::size_t window, std::size_t warmup) {
             return std::make_unique<PercentileTrigger>(TriggerId{id}, p, window, warmup);
           }),
           py::arg("trigger_id"), py::arg("p"),
           py::arg("window") = PercentileTrigger::kDefaultWindow,
           py::arg("warmup") = PercentileTrigger::kDefaultWarmup)
      .def("add_sample", &PercentileTrigger::add_sample)
      .def_property_readonly("fired", &PercentileTrigger::fired);

  py::class_<CategoryTrigger>(m, "CategoryTrigger")
      .def(py::init([](uint32_t id, double f, std::size_t warmup) {
             return std::make_unique<CategoryTrigger>(TriggerId{id}, f, warmup);
           }),
           py::arg("trigger_id"), py::arg("f"),
           py::arg("warmup") = CategoryTrigger::kDefaultWarmup)
      .def("add_sample", &CategoryTrigger::add_sample);

  py::class_<TriggerSet>(m, "TriggerSet")
      .def(py::init<std::size_t>(), py::arg("n"))
      .def("observe", &TriggerSet::observe)
      .def("on_fire", &TriggerSet::on_fire);

  py::class_<Client>(m, "Client")
      .def("begin", py::overload_cast<TraceId>(&Client::begin))
      .def("tracepoint",
           [](Client& c, const py::bytes& b) { return c.tracepoint(as_span(b)); })
      .def("breadcrumb", &Client::breadcrumb)
      .def("serialize", [](Client& c) { return to_bytes(c.serialize()); })
      .def("deserialize",
           [](Client& c, const py::bytes& b) {
             TraceContext ctx = c.deserialize(as_span(b));
             c.begin(ctx);
             return ctx.trace_id;
           },
           "Decodes an incoming context and begins the trace.")
      .def("end", &Client::end)
      .def("trigger",
           [](Client& c, TraceId id, uint32_t tid, std::vector<TraceId> lat) {
             return c.trigger(id, TriggerId{tid}, std::move(lat));
           },
           py::arg("trace_id"), py::arg("trigger_id"),
           py::arg("laterals") = std::vector<TraceId>{});

  py::class_<Deployment>(m, "Deployment")
      .def(py::init<>())
      .def("add_node", &Deployment::add_node, py::arg("address"),
           py::arg("pool_size") = 4u << 20, py::arg("buffer_size") = 4096,
           py::arg("trace_percentage") = 1.0)
      .def("client", &Deployment::client, py::return_value_policy::reference_internal)
      .def("poll", &Deployment::poll)
      .def("trace",
           [](Deployment& d, TraceId id) -> py::object {
             auto t = d.collector().assembled(id);
             if (!t) return py::none();
             py::dict out;
             for (const auto& [agent, payloads] : t->slices) {
               py::list l;
               for (const auto& p : payloads) l.append(to_bytes(p));
               out[py::str(agent)] = l;
             }
             return out;
           })
      .def("trace_ids", [](Deployment& d) { return d.collector().trace_ids(); });

  m.def("run_topology",
        [](const std::string& json_text, uint64_t seed, bool tracing,
           double duration_sec) {
          harness::TopologySpec spec = harness::parse_topology(json_text);
          spec.tracing.seed = seed;
          spec.tracing.enabled = tracing;
          if (duration_sec > 0) spec.workload.duration_sec = duration_sec;
          harness::RunResult r;
          {
            py::gil_scoped_release release;
            r = harness::run_scenario(spec);
          }
          return metrics_dict(r.metrics);
        },
        py::arg("topology_json"), py::arg("seed") = 1, py::arg("tracing") = true,
        py::arg("duration_sec") = 0.0);

  m.def("bench_tracepoint",
        [](std::size_t threads, std::size_t payload, std::size_t traces) {
          harness::TracepointBenchConfig cfg;
          cfg.threads = threads;
          cfg.payload_bytes = payload;
          cfg.traces_per_thread = traces;
          harness::TracepointBenchResult r;
          {
            py::gil_scoped_release release;
            r = harness::microbench_tracepoint(cfg);
          }
          py::dict d;
          d["begin"] = latency_dict(r.begin);
          d["tracepoint"] = latency_dict(r.tracepoint);
          d["end"] = latency_dict(r.end);
          d["null_writes"] = r.null_writes;
          return d;
        },
        py::arg("threads") = 1, py::arg("payload") = 32, py::arg("traces") = 100);
}
