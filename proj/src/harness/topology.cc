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

#include "retrotrace/harness/topology.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace retrotrace::harness {

using nlohmann::json;

double ExecTime::sample(std::mt19937_64& rng) const {
  switch (kind) {
    case Kind::kConstant:
      return ms;
    case Kind::kUniform:
      return std::uniform_real_distribution<double>(min_ms, max_ms)(rng);
    case Kind::kLognormal:
      return std::lognormal_distribution<double>(mu, sigma)(rng);
  }
  return ms;
}

namespace {

void check_probability(double p, const std::string& what) {
  if (!(p >= 0 && p <= 1)) {
    throw std::invalid_argument(what + " must be in [0,1]");
  }
}

ExecTime parse_exec(const json& j) {
  ExecTime e;
  std::string dist = j.value("dist", "constant");
  if (dist == "constant") {
    e.kind = ExecTime::Kind::kConstant;
    e.ms = j.value("ms", 1.0);
  } else if (dist == "uniform") {
    e.kind = ExecTime::Kind::kUniform;
    e.min_ms = j.at("minMs").get<double>();
    e.max_ms = j.at("maxMs").get<double>();
  } else if (dist == "lognormal") {
    e.kind = ExecTime::Kind::kLognormal;
    e.mu = j.at("mu").get<double>();
    e.sigma = j.at("sigma").get<double>();
  } else {
    throw std::invalid_argument("unknown execTime dist: " + dist);
  }
  return e;
}

json exec_to_json(const ExecTime& e) {
  switch (e.kind) {
    case ExecTime::Kind::kConstant:
      return {{"dist", "constant"}, {"ms", e.ms}};
    case ExecTime::Kind::kUniform:
      return {{"dist", "uniform"}, {"minMs", e.min_ms}, {"maxMs", e.max_ms}};
    case ExecTime::Kind::kLognormal:
      return {{"dist", "lognormal"}, {"mu", e.mu}, {"sigma", e.sigma}};
  }
  return {};
}

TracingConfig parse_tracing(const json& j) {
  TracingConfig t;
  t.enabled = j.value("enabled", t.enabled);
  t.tcp = j.value("tcp", t.tcp);
  t.seed = j.value("seed", t.seed);
  t.pool_size = j.value("poolSize", t.pool_size);
  t.buffer_size = j.value("bufferSize", t.buffer_size);
  t.trace_percentage = j.value("tracePercentage", t.trace_percentage);
  t.payload_bytes = j.value("payloadBytes", t.payload_bytes);
  t.tracepoints_per_segment =
      j.value("tracepointsPerSegment", t.tracepoints_per_segment);
  t.eviction_threshold = j.value("evictionThreshold", t.eviction_threshold);
  t.abandon_threshold = j.value("abandonThreshold", t.abandon_threshold);
  t.report_bandwidth = j.value("reportBandwidth", t.report_bandwidth);
  t.trigger_delay_ms = j.value("triggerDelayMs", t.trigger_delay_ms);
  t.tick_ms = j.value("tickMs", t.tick_ms);
  t.drain_sec = j.value("drainSec", t.drain_sec);
  t.network_ms = j.value("networkMs", t.network_ms);
  t.latency_percentile = j.value("latencyPercentile", t.latency_percentile);
  t.queue_percentile = j.value("queuePercentile", t.queue_percentile);
  t.queue_laterals = j.value("queueLaterals", t.queue_laterals);
  if (j.contains("extraTriggers")) {
    for (const json& x : j.at("extraTriggers")) {
      ExtraTrigger e;
      e.id = TriggerId(x.at("id").get<uint32_t>());
      e.probability = x.value("probability", 0.0);
      e.weight = x.value("weight", 1.0);
      e.rate_limit = x.value("rateLimit", 0.0);
      t.extra_triggers.push_back(e);
    }
  }
  return t;
}

json tracing_to_json(const TracingConfig& t) {
  json extras = json::array();
  for (const auto& e : t.extra_triggers) {
    extras.push_back({{"id", e.id.value},
                      {"probability", e.probability},
                      {"weight", e.weight},
                      {"rateLimit", e.rate_limit}});
  }
  return {{"enabled", t.enabled},
          {"tcp", t.tcp},
          {"seed", t.seed},
          {"poolSize", t.pool_size},
          {"bufferSize", t.buffer_size},
          {"tracePercentage", t.trace_percentage},
          {"payloadBytes", t.payload_bytes},
          {"tracepointsPerSegment", t.tracepoints_per_segment},
          {"evictionThreshold", t.eviction_threshold},
          {"abandonThreshold", t.abandon_threshold},
          {"reportBandwidth", t.report_bandwidth},
          {"triggerDelayMs", t.trigger_delay_ms},
          {"tickMs", t.tick_ms},
          {"drainSec", t.drain_sec},
          {"networkMs", t.network_ms},
          {"latencyPercentile", t.latency_percentile},
          {"queuePercentile", t.queue_percentile},
          {"queueLaterals", t.queue_laterals},
          {"extraTriggers", extras}};
}

}  // namespace

std::size_t TopologySpec::service_index(const std::string& svc) const {
  for (std::size_t i = 0; i < services.size(); ++i) {
    if (services[i].name == svc) return i;
  }
  throw std::invalid_argument("unknown service: " + svc);
}

std::size_t TopologySpec::root_service_index() const {
  return service_index(workload.root_service);
}

std::size_t TopologySpec::root_api_index() const {
  const ServiceSpec& s = services[root_service_index()];
  if (workload.root_api.empty()) return 0;
  for (std::size_t i = 0; i < s.apis.size(); ++i) {
    if (s.apis[i].name == workload.root_api) return i;
  }
  throw std::invalid_argument("unknown root api: " + workload.root_api);
}

std::vector<std::string> TopologySpec::agents() const {
  std::set<std::string> names;
  for (const auto& s : services) names.insert(s.agent);
  return {names.begin(), names.end()};
}

void TopologySpec::validate() {
  if (services.empty()) throw std::invalid_argument("no services");
  std::set<std::string> names;
  for (auto& s : services) {
    if (s.name.empty()) throw std::invalid_argument("service without a name");
    if (!names.insert(s.name).second) {
      throw std::invalid_argument("duplicate service: " + s.name);
    }
    if (s.agent.empty()) s.agent = s.name;
    if (s.agent.size() > kMaxBreadcrumbBytes) {
      throw std::invalid_argument("agent name too long: " + s.agent);
    }
    if (s.apis.empty()) throw std::invalid_argument(s.name + " has no apis");
  }
  for (auto& s : services) {
    for (auto& api : s.apis) {
      for (auto& c : api.children) {
        check_probability(c.call_probability, "callProbability");
        c.service_index = service_index(c.service);
        const ServiceSpec& target = services[c.service_index];
        auto it = std::find_if(target.apis.begin(), target.apis.end(),
                               [&](const ApiSpec& a) {
                                 return c.api.empty() || a.name == c.api;
                               });
        if (it == target.apis.end()) {
          throw std::invalid_argument("unknown api " + c.service + "." + c.api);
        }
        c.api_index = static_cast<std::size_t>(it - target.apis.begin());
      }
    }
  }
  check_probability(injections.edge_case_probability, "edgeCaseProbability");
  check_probability(injections.exception_rate, "exceptionRate");
  check_probability(injections.latency.probability, "latency probability");
  for (const auto& e : tracing.extra_triggers) {
    check_probability(e.probability, "extra trigger probability");
  }
  if (!(workload.rate_per_sec > 0) || !(workload.duration_sec > 0)) {
    throw std::invalid_argument("workload rate and duration must be > 0");
  }
  root_api_index();

  // Acyclic over (service, api) nodes.
  std::map<std::pair<std::size_t, std::size_t>, int> color;
  std::function<void(std::size_t, std::size_t)> visit = [&](std::size_t s,
                                                            std::size_t a) {
    int& c = color[{s, a}];
    if (c == 1) throw std::invalid_argument("call graph has a cycle");
    if (c == 2) return;
    c = 1;
    for (const auto& ch : services[s].apis[a].children) {
      visit(ch.service_index, ch.api_index);
    }
    color[{s, a}] = 2;
  };
  for (std::size_t s = 0; s < services.size(); ++s) {
    for (std::size_t a = 0; a < services[s].apis.size(); ++a) visit(s, a);
  }
}

namespace {

TopologySpec parse_topology_json(const json& j) {
  TopologySpec spec;
  spec.name = j.value("name", "");
  for (const json& js : j.at("services")) {
    ServiceSpec s;
    s.name = js.at("name").get<std::string>();
    s.agent = js.value("agent", s.name);
    s.queue = js.value("queue", false);
    for (const json& ja : js.at("apis")) {
      ApiSpec a;
      a.name = ja.value("name", "");
      if (ja.contains("execTime")) a.exec = parse_exec(ja.at("execTime"));
      if (ja.contains("children")) {
        for (const json& jc : ja.at("children")) {
          ChildCall c;
          c.service = jc.at("service").get<std::string>();
          c.api = jc.value("api", "");
          c.call_probability = jc.value("callProbability", 1.0);
          c.concurrent = jc.value("concurrent", false);
          a.children.push_back(c);
        }
      }
      s.apis.push_back(std::move(a));
    }
    spec.services.push_back(std::move(s));
  }
  const json& w = j.at("workload");
  spec.workload.rate_per_sec = w.value("ratePerSec", 100.0);
  spec.workload.duration_sec = w.value("durationSec", 10.0);
  spec.workload.root_service =
      w.value("rootService", spec.services.front().name);
  spec.workload.root_api = w.value("rootApi", "");
  if (j.contains("injections")) {
    const json& ji = j.at("injections");
    spec.injections.edge_case_probability =
        ji.value("edgeCaseProbability", 0.0);
    spec.injections.exception_rate = ji.value("exceptionRate", 0.0);
    if (ji.contains("latencyInjection")) {
      const json& jl = ji.at("latencyInjection");
      spec.injections.latency.probability = jl.value("probability", 0.0);
      spec.injections.latency.min_ms = jl.value("minMs", 0.0);
      spec.injections.latency.max_ms = jl.value("maxMs", 0.0);
    }
    if (ji.contains("queueBurst")) {
      const json& jq = ji.at("queueBurst");
      spec.injections.queue_burst.at_sec = jq.value("atSec", -1.0);
      spec.injections.queue_burst.count = jq.value("count", std::size_t{0});
      spec.injections.queue_burst.cost_ms = jq.value("costMs", 0.0);
    }
  }
  if (j.contains("tracing")) spec.tracing = parse_tracing(j.at("tracing"));
  if (j.contains("expect")) {
    spec.expect.min_capture_percent =
        j.at("expect").value("minCapturePercent", -1.0);
  }
  spec.validate();
  return spec;
}

}  // namespace

TopologySpec parse_topology(const std::string& json_text) {
  try {
    return parse_topology_json(json::parse(json_text));
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("topology: ") + e.what());
  }
}

TopologySpec load_topology(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_topology(ss.str());
}

std::string topology_to_json(const TopologySpec& spec) {
  json services = json::array();
  for (const auto& s : spec.services) {
    json apis = json::array();
    for (const auto& a : s.apis) {
      json children = json::array();
      for (const auto& c : a.children) {
        children.push_back({{"service", c.service},
                            {"api", c.api},
                            {"callProbability", c.call_probability},
                            {"concurrent", c.concurrent}});
      }
      apis.push_back({{"name", a.name},
                      {"execTime", exec_to_json(a.exec)},
                      {"children", children}});
    }
    services.push_back(
        {{"name", s.name}, {"agent", s.agent}, {"queue", s.queue}, {"apis", apis}});
  }
  const auto& inj = spec.injections;
  json j = {
      {"name", spec.name},
      {"services", services},
      {"workload",
       {{"ratePerSec", spec.workload.rate_per_sec},
        {"durationSec", spec.workload.duration_sec},
        {"rootService", spec.workload.root_service},
        {"rootApi", spec.workload.root_api}}},
      {"injections",
       {{"edgeCaseProbability", inj.edge_case_probability},
        {"exceptionRate", inj.exception_rate},
        {"latencyInjection",
         {{"probability", inj.latency.probability},
          {"minMs", inj.latency.min_ms},
          {"maxMs", inj.latency.max_ms}}},
        {"queueBurst",
         {{"atSec", inj.queue_burst.at_sec},
          {"count", inj.queue_burst.count},
          {"costMs", inj.queue_burst.cost_ms}}}}},
      {"tracing", tracing_to_json(spec.tracing)},
      {"expect", {{"minCapturePercent", spec.expect.min_capture_percent}}}};
  return j.dump(2);
}

TopologySpec random_dag(std::mt19937_64& rng, std::size_t services,
                        std::size_t max_fanout) {
  if (services == 0) throw std::invalid_argument("need at least one service");
  TopologySpec spec;
  spec.name = "random-dag";
  std::uniform_real_distribution<double> prob(0.3, 1.0);
  std::uniform_real_distribution<double> exec(0.2, 2.0);
  for (std::size_t i = 0; i < services; ++i) {
    ServiceSpec s;
    s.name = "s" + std::to_string(i);
    s.agent = "agent-" + std::to_string(i);
    ApiSpec a;
    a.name = "call";
    a.exec.kind = ExecTime::Kind::kConstant;
    a.exec.ms = exec(rng);
    s.apis.push_back(a);
    spec.services.push_back(std::move(s));
  }
  // Edges only point to higher indices, so the graph is acyclic. Every
  // node but the root gets at least one parent to stay reachable.
  std::vector<std::size_t> fanout(services, 0);
  for (std::size_t i = 1; i < services; ++i) {
    std::vector<std::size_t> parents;
    for (std::size_t p = 0; p < i; ++p) {
      if (fanout[p] < max_fanout) parents.push_back(p);
    }
    if (parents.empty()) break;
    std::size_t p = parents[std::uniform_int_distribution<std::size_t>(
        0, parents.size() - 1)(rng)];
    fanout[p]++;
    ChildCall c;
    c.service = spec.services[i].name;
    c.api = "call";
    c.call_probability = prob(rng);
    c.concurrent = (rng() & 1) != 0;
    spec.services[p].apis[0].children.push_back(c);
  }
  // A few extra forward edges.
  for (std::size_t i = 0; i + 1 < services; ++i) {
    if (fanout[i] >= max_fanout || (rng() % 3) != 0) continue;
    std::size_t j =
        std::uniform_int_distribution<std::size_t>(i + 1, services - 1)(rng);
    auto& children = spec.services[i].apis[0].children;
    bool dup = std::any_of(children.begin(), children.end(), [&](auto& c) {
      return c.service == spec.services[j].name;
    });
    if (dup) continue;
    fanout[i]++;
    ChildCall c;
    c.service = spec.services[j].name;
    c.api = "call";
    c.call_probability = prob(rng);
    c.concurrent = (rng() & 1) != 0;
    children.push_back(c);
  }
  spec.workload.root_service = spec.services[0].name;
  spec.workload.root_api = "call";
  spec.validate();
  return spec;
}

}  // namespace retrotrace::harness
