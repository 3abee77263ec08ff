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

#include "retrotrace/harness/simulation.h"

#include <algorithm>
#include <cstring>
#include <deque>
#include <limits>
#include <queue>
#include <stdexcept>

#include "retrotrace/autotriggers.h"
#include "retrotrace/client.h"
#include "retrotrace/tcp_transport.h"

namespace retrotrace::harness {

namespace {

Nanos ms(double v) { return from_seconds(v / 1000.0); }

// Lets a TCP server come up before the agent behind it exists.
class ForwardingEndpoint final : public AgentEndpoint {
 public:
  AgentEndpoint* target = nullptr;

  BreadcrumbMap trigger_notify(const TriggerNotify& msg) override {
    return target->trigger_notify(msg);
  }
  BreadcrumbMap get_breadcrumbs(std::span<const TraceId> ids) override {
    return target->get_breadcrumbs(ids);
  }
};

class Simulation {
 public:
  explicit Simulation(const TopologySpec& spec);
  ~Simulation();
  RunResult run();

 private:
  struct Node {
    std::string name;
    Breadcrumb address;
    std::unique_ptr<NodeMemory> memory;
    std::unique_ptr<Client> client;
    std::unique_ptr<ForwardingEndpoint> forward;
    std::unique_ptr<TcpServer> server;
    std::unique_ptr<CoordinatorEndpoint> coordinator_link;
    std::unique_ptr<CollectorEndpoint> collector_link;
    std::unique_ptr<Agent> agent;
  };

  struct Call {
    std::size_t request = 0;
    std::size_t service = 0;
    std::size_t api = 0;
    std::ptrdiff_t parent = -1;
    std::vector<uint8_t> ctx_bytes;
    TraceContext ctx;
    bool has_ctx = false;
    double exec_ms = 0;
    std::vector<std::size_t> concurrent;  // indices into api.children
    std::vector<std::size_t> sequential;
    bool concurrent_issued = false;
    std::size_t next_sequential = 0;
    std::size_t outstanding = 0;
    Nanos arrived{0};
  };

  struct QueueState {
    std::deque<std::size_t> waiting;
    bool busy = false;
    std::unique_ptr<QueueTrigger> trigger;
  };

  struct Event {
    Nanos t;
    uint64_t seq;
    std::function<void()> fn;
    bool operator>(const Event& o) const {
      return t != o.t ? t > o.t : seq > o.seq;
    }
  };

  void schedule(Nanos t, std::function<void()> fn);
  void schedule_arrivals();
  void start_request(bool expensive);
  void arrive(std::size_t call);
  void start_work(std::size_t call);
  void work_done(std::size_t call);
  void next_children(std::size_t call);
  void issue_child(std::size_t call, std::size_t child);
  void complete(std::size_t call);
  void write_points(Node& node, std::size_t call);
  void tick();
  RunResult collect();

  Node& node_of(std::size_t service) { return nodes_[service_node_[service]]; }
  const ApiSpec& api_of(const Call& c) const {
    return spec_.services[c.service].apis[c.api];
  }

  TopologySpec spec_;
  const TracingConfig& cfg_;
  bool tracing_;
  ManualClock clock_;
  std::mt19937_64 workload_rng_;
  std::mt19937_64 id_rng_;

  std::shared_ptr<Collector> collector_;
  std::unique_ptr<AgentDirectory> directory_;
  std::unique_ptr<Coordinator> coordinator_;
  std::unique_ptr<TcpServer> coordinator_server_;
  std::unique_ptr<TcpServer> collector_server_;
  std::vector<Node> nodes_;
  std::vector<std::size_t> service_node_;
  std::map<std::string, std::string> agent_address_;

  std::map<std::size_t, QueueState> queues_;
  std::unique_ptr<PercentileTrigger> latency_trigger_;
  std::vector<Trigger> queue_triggers_;

  std::vector<RequestRecord> requests_;
  std::vector<Call> calls_;
  std::priority_queue<Event, std::vector<Event>, std::greater<>> events_;
  uint64_t next_event_seq_ = 0;
  uint64_t payload_seq_ = 0;
  std::vector<uint8_t> payload_;
  std::vector<double> latency_ms_;
};

Simulation::Simulation(const TopologySpec& spec)
    : spec_(spec),
      cfg_(spec_.tracing),
      tracing_(spec_.tracing.enabled),
      workload_rng_(spec_.tracing.seed),
      id_rng_(spec_.tracing.seed ^ 0x5DEECE66DULL),
      collector_(std::make_shared<Collector>(clock_)) {
  spec_.validate();
  if (cfg_.payload_bytes < kMinPayloadBytes) {
    throw std::invalid_argument("payloadBytes must be at least 24");
  }
  if (!(cfg_.tick_ms > 0)) throw std::invalid_argument("tickMs must be > 0");
  payload_.resize(cfg_.payload_bytes);
  for (std::size_t i = 0; i < payload_.size(); ++i) {
    payload_[i] = static_cast<uint8_t>(i * 131 + 7);
  }

  std::vector<std::string> agents = spec_.agents();
  for (const auto& s : spec_.services) {
    auto it = std::find(agents.begin(), agents.end(), s.agent);
    service_node_.push_back(static_cast<std::size_t>(it - agents.begin()));
  }
  for (std::size_t i = 0; i < spec_.services.size(); ++i) {
    if (!spec_.services[i].queue) continue;
    QueueState& q = queues_[i];
    q.trigger = std::make_unique<QueueTrigger>(
        cfg_.queue_trigger, cfg_.queue_percentile, cfg_.queue_laterals);
  }
  if (cfg_.latency_percentile > 0) {
    latency_trigger_ = std::make_unique<PercentileTrigger>(
        cfg_.latency_trigger, cfg_.latency_percentile);
  }

  nodes_.resize(agents.size());
  for (std::size_t i = 0; i < agents.size(); ++i) {
    nodes_[i].name = agents[i];
    nodes_[i].address = agents[i];
  }
  if (!tracing_) {
    for (const Node& n : nodes_) agent_address_[n.name] = n.address;
    return;
  }

  CoordinatorConfig ccfg;
  ccfg.parallel = false;  // keeps virtual-time runs deterministic
  if (cfg_.tcp) {
    directory_ = std::make_unique<TcpDirectory>();
    coordinator_ = std::make_unique<Coordinator>(*directory_, ccfg, clock_);
    coordinator_server_ = serve_coordinator(*coordinator_);
    collector_server_ = serve_collector(*collector_);
  } else {
    directory_ = std::make_unique<InProcessDirectory>();
    coordinator_ = std::make_unique<Coordinator>(*directory_, ccfg, clock_);
  }

  ChannelConfig chan;
  chan.pool_size = cfg_.pool_size;
  chan.buffer_size = cfg_.buffer_size;

  for (Node& n : nodes_) {
    if (cfg_.tcp) {
      n.forward = std::make_unique<ForwardingEndpoint>();
      n.server = serve_agent(*n.forward);
      n.address = n.server->address();
      n.coordinator_link =
          std::make_unique<TcpCoordinatorEndpoint>(coordinator_server_->address());
      n.collector_link =
          std::make_unique<TcpCollectorEndpoint>(collector_server_->address());
    }
    agent_address_[n.name] = n.address;
    n.memory = std::make_unique<NodeMemory>(chan);
    n.client = std::make_unique<Client>(
        *n.memory, ClientConfig{n.address, cfg_.trace_percentage});

    AgentConfig acfg;
    acfg.address = n.address;
    acfg.eviction_threshold = cfg_.eviction_threshold;
    acfg.abandon_threshold = cfg_.abandon_threshold;
    acfg.report_bandwidth = cfg_.report_bandwidth;
    acfg.trigger_delay = ms(cfg_.trigger_delay_ms);
    for (const auto& e : cfg_.extra_triggers) {
      acfg.queue_weights[e.id] = e.weight;
      if (e.rate_limit > 0) acfg.trigger_rate_limits[e.id] = e.rate_limit;
    }
    CoordinatorEndpoint* coord = cfg_.tcp
                                     ? n.coordinator_link.get()
                                     : static_cast<CoordinatorEndpoint*>(coordinator_.get());
    CollectorEndpoint* coll = cfg_.tcp
                                  ? n.collector_link.get()
                                  : static_cast<CollectorEndpoint*>(collector_.get());
    n.agent = std::make_unique<Agent>(*n.memory, acfg, clock_, coord, coll);
    if (cfg_.tcp) {
      n.forward->target = n.agent.get();
    } else {
      static_cast<InProcessDirectory&>(*directory_).add(n.address, n.agent.get());
    }
  }
}

Simulation::~Simulation() {
  for (Node& n : nodes_) {
    if (n.server) n.server->stop();
  }
  if (coordinator_server_) coordinator_server_->stop();
  if (collector_server_) collector_server_->stop();
}

void Simulation::schedule(Nanos t, std::function<void()> fn) {
  events_.push(Event{t, next_event_seq_++, std::move(fn)});
}

void Simulation::schedule_arrivals() {
  const Nanos end = from_seconds(spec_.workload.duration_sec);
  std::exponential_distribution<double> gap(spec_.workload.rate_per_sec);
  Nanos t{0};
  // Arrival times are drawn up front from their own stream so that the
  // number of requests never depends on per-request draws.
  std::mt19937_64 arrivals(cfg_.seed * 0x9E3779B97F4A7C15ULL + 1);
  for (;;) {
    t += from_seconds(gap(arrivals));
    if (t >= end) break;
    schedule(t, [this] { start_request(false); });
  }
  const QueueBurst& burst = spec_.injections.queue_burst;
  if (burst.at_sec >= 0 && burst.count > 0) {
    Nanos at = from_seconds(burst.at_sec);
    for (std::size_t i = 0; i < burst.count; ++i) {
      schedule(at, [this] { start_request(true); });
    }
  }
}

void Simulation::start_request(bool expensive) {
  std::bernoulli_distribution edge(spec_.injections.edge_case_probability);
  std::bernoulli_distribution exc(spec_.injections.exception_rate);

  RequestRecord r;
  r.trace_id = TraceId::random(id_rng_);
  r.start = clock_.now();
  r.expensive = expensive;
  r.edge_case = edge(workload_rng_);
  r.exception = exc(workload_rng_);
  for (const auto& e : cfg_.extra_triggers) {
    if (std::bernoulli_distribution(e.probability)(workload_rng_)) {
      r.triggers.insert(e.id);
    }
  }
  requests_.push_back(std::move(r));

  Call c;
  c.request = requests_.size() - 1;
  c.service = spec_.root_service_index();
  c.api = spec_.root_api_index();
  calls_.push_back(std::move(c));
  arrive(calls_.size() - 1);
}

void Simulation::arrive(std::size_t id) {
  {
    Call& c = calls_[id];
    c.arrived = clock_.now();
    const ApiSpec& api = api_of(c);
    c.exec_ms = std::max(0.0, api.exec.sample(workload_rng_));
    const LatencyInjection& lat = spec_.injections.latency;
    if (lat.probability > 0 &&
        std::bernoulli_distribution(lat.probability)(workload_rng_)) {
      c.exec_ms += std::uniform_real_distribution<double>(lat.min_ms,
                                                          lat.max_ms)(workload_rng_);
    }
    if (requests_[c.request].expensive && spec_.services[c.service].queue) {
      c.exec_ms = spec_.injections.queue_burst.cost_ms;
    }
    for (std::size_t i = 0; i < api.children.size(); ++i) {
      const ChildCall& ch = api.children[i];
      if (!std::bernoulli_distribution(ch.call_probability)(workload_rng_)) {
        continue;
      }
      (ch.concurrent ? c.concurrent : c.sequential).push_back(i);
    }
    if (tracing_ && !c.ctx_bytes.empty()) {
      c.ctx = node_of(c.service).client->deserialize(c.ctx_bytes);
      c.has_ctx = true;
    }
  }
  auto q = queues_.find(calls_[id].service);
  if (q != queues_.end()) {
    if (q->second.busy) {
      q->second.waiting.push_back(id);
      return;
    }
    q->second.busy = true;
  }
  start_work(id);
}

void Simulation::write_points(Node& node, std::size_t id) {
  RequestRecord& r = requests_[calls_[id].request];
  if (tracing_ && !node.client->gated_in(r.trace_id)) return;
  r.agents.insert(node.address);
  auto tid = r.trace_id.to_bytes();
  for (std::size_t k = 0; k < cfg_.tracepoints_per_segment; ++k) {
    std::memcpy(payload_.data(), tid.data(), tid.size());
    uint64_t seq = payload_seq_++;
    std::memcpy(payload_.data() + 16, &seq, sizeof(seq));
    if (tracing_) node.client->tracepoint(payload_);
    r.bytes[node.address] += payload_.size();
  }
  if (tracing_ && node.client->current_trace_lost_data()) r.lost_data = true;
}

void Simulation::start_work(std::size_t id) {
  Call& c = calls_[id];
  Node& node = node_of(c.service);
  RequestRecord& r = requests_[c.request];
  if (tracing_) {
    if (c.has_ctx) {
      node.client->begin(c.ctx);
    } else {
      node.client->begin(r.trace_id);
    }
  }
  auto q = queues_.find(c.service);
  if (q != queues_.end()) {
    double waited = to_seconds(clock_.now() - c.arrived) * 1000.0;
    auto fired = q->second.trigger->add_sample(r.trace_id, waited);
    if (fired) {
      r.triggers.insert(fired->trigger_id);
      queue_triggers_.push_back(*fired);
      if (tracing_) node.client->trigger(*fired);
    }
  }
  write_points(node, id);
  if (tracing_) node.client->end();
  schedule(clock_.now() + ms(c.exec_ms), [this, id] { work_done(id); });
}

void Simulation::work_done(std::size_t id) {
  auto q = queues_.find(calls_[id].service);
  if (q != queues_.end()) {
    q->second.busy = false;
    if (!q->second.waiting.empty()) {
      std::size_t next = q->second.waiting.front();
      q->second.waiting.pop_front();
      q->second.busy = true;
      start_work(next);
    }
  }
  next_children(id);
}

void Simulation::next_children(std::size_t id) {
  Call& c = calls_[id];
  if (c.outstanding > 0) return;
  if (!c.concurrent_issued) {
    c.concurrent_issued = true;
    if (!c.concurrent.empty()) {
      std::vector<std::size_t> batch = c.concurrent;
      c.outstanding = batch.size();
      for (std::size_t child : batch) issue_child(id, child);
      return;
    }
  }
  if (c.next_sequential < c.sequential.size()) {
    std::size_t child = c.sequential[c.next_sequential++];
    c.outstanding = 1;
    issue_child(id, child);
    return;
  }
  complete(id);
}

void Simulation::issue_child(std::size_t id, std::size_t child) {
  const ChildCall& spec = api_of(calls_[id]).children[child];
  Call cc;
  cc.request = calls_[id].request;
  cc.service = spec.service_index;
  cc.api = spec.api_index;
  cc.parent = static_cast<std::ptrdiff_t>(id);
  if (tracing_) {
    Node& node = node_of(calls_[id].service);
    Node& target = node_of(spec.service_index);
    node.client->begin(requests_[cc.request].trace_id);
    if (target.address != node.address) node.client->breadcrumb(target.address);
    cc.ctx_bytes = node.client->serialize();
    node.client->end();
  }
  calls_.push_back(std::move(cc));
  std::size_t cid = calls_.size() - 1;
  schedule(clock_.now() + ms(cfg_.network_ms), [this, cid] { arrive(cid); });
}

void Simulation::complete(std::size_t id) {
  Call& c = calls_[id];
  Node& node = node_of(c.service);
  RequestRecord& r = requests_[c.request];
  const bool root = c.parent < 0;
  if (tracing_) node.client->begin(r.trace_id);
  write_points(node, id);

  if (root) {
    r.end = clock_.now();
    r.completed = true;
    double latency = to_seconds(r.end - r.start) * 1000.0;
    latency_ms_.push_back(latency);
    if (r.edge_case) r.triggers.insert(cfg_.edge_case_trigger);
    if (r.exception) r.triggers.insert(cfg_.exception_trigger);
    if (latency_trigger_ && latency_trigger_->add_sample(r.trace_id, latency)) {
      r.triggers.insert(cfg_.latency_trigger);
    }
    if (tracing_) {
      for (TriggerId t : r.triggers) {
        if (t == cfg_.queue_trigger) continue;  // fired at the queue
        node.client->trigger(r.trace_id, t);
      }
    }
  }
  if (tracing_) node.client->end();

  if (!root) {
    std::size_t parent = static_cast<std::size_t>(c.parent);
    schedule(clock_.now() + ms(cfg_.network_ms), [this, parent] {
      calls_[parent].outstanding--;
      next_children(parent);
    });
  }
}

void Simulation::tick() {
  for (Node& n : nodes_) n.agent->poll();
  for (Node& n : nodes_) n.agent->report_phase();
}

RunResult Simulation::run() {
  schedule_arrivals();
  const Nanos tick_len = ms(cfg_.tick_ms);
  const Nanos workload_end = from_seconds(spec_.workload.duration_sec);
  const Nanos drain_end = workload_end + from_seconds(cfg_.drain_sec);
  // Requests still running long after the drain window are abandoned.
  const Nanos hard_end = drain_end + std::chrono::seconds(60);
  Nanos next_tick = tick_len;
  for (;;) {
    Nanos next_event = events_.empty() ? Nanos::max() : events_.top().t;
    if (next_tick <= next_event) {
      if ((next_tick > drain_end && events_.empty()) || next_tick > hard_end) {
        break;
      }
      clock_.set(next_tick);
      if (tracing_) tick();
      next_tick += tick_len;
    } else {
      Event ev = events_.top();
      events_.pop();
      clock_.set(ev.t);
      ev.fn();
    }
  }
  return collect();
}

RunResult Simulation::collect() {
  RunResult out;
  out.spec = spec_;
  out.collector = collector_;
  out.agent_address = agent_address_;
  out.queue_triggers = queue_triggers_;

  RunMetrics& m = out.metrics;
  m.topology = spec_.name;
  m.tracing = tracing_;
  m.seed = cfg_.seed;
  m.duration_sec = spec_.workload.duration_sec;
  m.end_sec = to_seconds(clock_.now());
  m.requests_started = requests_.size();
  for (const auto& r : requests_) {
    if (r.completed) m.requests_completed++;
    for (TriggerId t : r.triggers) m.triggers_fired[t]++;
  }
  m.throughput = static_cast<double>(m.requests_completed) / m.duration_sec;
  m.latency_ms = latency_ms_;

  if (tracing_) {
    for (Node& n : nodes_) {
      n.agent->stop();
      m.agent_stats[n.address] = n.agent->stats();
      auto ages = n.agent->eviction_ages();
      m.event_horizon_sec.insert(m.event_horizon_sec.end(), ages.begin(),
                                 ages.end());
      out.abandoned[n.address] = n.agent->abandoned_trace_ids();
      out.reported[n.address] = n.agent->reported_trace_ids();
      out.notify_counts[n.address] = n.agent->notify_counts();
      ClientCounters cc = n.client->counters();
      m.null_writes += cc.null_writes;
      m.write_rate[n.address] = static_cast<double>(cc.buffers_completed) *
                                static_cast<double>(cfg_.buffer_size) /
                                m.duration_sec;
    }
    out.traversals = coordinator_->traversal_stats();
    for (const auto& t : out.traversals) m.traversal_ms.push_back(t.duration_ms);
    CollectorStats cs = collector_->stats();
    m.collector_bytes = cs.bytes_received;
    m.collector_bytes_per_sec =
        static_cast<double>(cs.bytes_received) / std::max(m.end_sec, 1e-9);
    for (TraceId id : collector_->trace_ids()) {
      auto trace = collector_->assembled(id);
      if (!trace) continue;
      auto want = id.to_bytes();
      for (const auto& [agent, payloads] : trace->slices) {
        for (const auto& p : payloads) {
          if (p.size() < 16 || std::memcmp(p.data(), want.data(), 16) != 0) {
            m.contaminated_payloads++;
          }
        }
      }
    }
  }
  out.requests = std::move(requests_);

  if (tracing_) {
    CoherenceReport rep = out.coherence();
    m.coherence = rep.overall;
    m.coherence_by_trigger = rep.per_trigger;
    m.capture_percent = rep.overall.coherent_percent();
  }
  return out;
}

}  // namespace

GroundTruth RunResult::truth(
    const std::function<bool(const RequestRecord&)>& filter) const {
  GroundTruth gt;
  for (const auto& r : requests) {
    if (r.triggers.empty() || !r.completed) continue;
    if (filter && !filter(r)) continue;
    ExpectedTrace e;
    e.agents = r.agents;
    e.bytes_per_agent = r.bytes;
    e.lost_data = r.lost_data;
    e.triggers = r.triggers;
    gt.emplace(r.trace_id, std::move(e));
  }
  return gt;
}

CoherenceReport RunResult::coherence(
    const std::function<bool(const RequestRecord&)>& filter) const {
  if (!collector) return {};
  return collector->coherence_report(truth(filter));
}

RunResult run_scenario(const TopologySpec& spec) {
  Simulation sim(spec);
  return sim.run();
}

}  // namespace retrotrace::harness
