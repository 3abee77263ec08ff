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

#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <span>
#include <stdexcept>

#include "retrotrace/clock.h"
#include "retrotrace/types.h"
#include "retrotrace/wire.h"

namespace retrotrace {

class TransportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Coordinator -> agent.
class AgentEndpoint {
 public:
  virtual ~AgentEndpoint() = default;
  // Acknowledges with every breadcrumb the agent knows for the group.
  virtual BreadcrumbMap trigger_notify(const TriggerNotify& msg) = 0;
  virtual BreadcrumbMap get_breadcrumbs(std::span<const TraceId> ids) = 0;
};

// Agent -> coordinator.
class CoordinatorEndpoint {
 public:
  virtual ~CoordinatorEndpoint() = default;
  virtual void local_trigger(const LocalTrigger& msg) = 0;
};

// Agent -> collector.
class CollectorEndpoint {
 public:
  virtual ~CollectorEndpoint() = default;
  virtual void report_data(const ReportData& msg) = 0;
};

// Maps a breadcrumb to something that can be called. Returns nullptr for
// addresses it cannot resolve; callers treat that as unreachable.
class AgentDirectory {
 public:
  virtual ~AgentDirectory() = default;
  virtual std::shared_ptr<AgentEndpoint> resolve(const Breadcrumb& address) = 0;
  // Whether resolved endpoints may be called from several threads at once.
  virtual bool supports_concurrent_calls() const { return true; }
};

// Directory of agents living in this process. Can inject per-call latency
// (real sleeps) and mark addresses unreachable for fault tests.
class InProcessDirectory final : public AgentDirectory {
 public:
  void add(const Breadcrumb& address, AgentEndpoint* agent);
  void set_unreachable(const Breadcrumb& address, bool unreachable);
  void set_call_latency(Nanos latency);

  std::shared_ptr<AgentEndpoint> resolve(const Breadcrumb& address) override;

 private:
  class Wrapper;

  mutable std::mutex mu_;
  std::map<Breadcrumb, AgentEndpoint*> agents_;
  std::set<Breadcrumb> unreachable_;
  Nanos latency_{0};
};

}  // namespace retrotrace
