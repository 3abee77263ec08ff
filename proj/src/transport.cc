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

#include "retrotrace/transport.h"

#include <thread>

namespace retrotrace {

class InProcessDirectory::Wrapper final : public AgentEndpoint {
 public:
  Wrapper(AgentEndpoint* target, bool unreachable, Nanos latency)
      : target_(target), unreachable_(unreachable), latency_(latency) {}

  BreadcrumbMap trigger_notify(const TriggerNotify& msg) override {
    simulate();
    return target_->trigger_notify(msg);
  }

  BreadcrumbMap get_breadcrumbs(std::span<const TraceId> ids) override {
    simulate();
    return target_->get_breadcrumbs(ids);
  }

 private:
  void simulate() const {
    if (latency_.count() > 0) std::this_thread::sleep_for(latency_);
    if (unreachable_) throw TransportError("agent unreachable");
  }

  AgentEndpoint* target_;
  bool unreachable_;
  Nanos latency_;
};

void InProcessDirectory::add(const Breadcrumb& address, AgentEndpoint* agent) {
  std::lock_guard lock(mu_);
  agents_[address] = agent;
}

void InProcessDirectory::set_unreachable(const Breadcrumb& address,
                                         bool unreachable) {
  std::lock_guard lock(mu_);
  if (unreachable) {
    unreachable_.insert(address);
  } else {
    unreachable_.erase(address);
  }
}

void InProcessDirectory::set_call_latency(Nanos latency) {
  std::lock_guard lock(mu_);
  latency_ = latency;
}

std::shared_ptr<AgentEndpoint> InProcessDirectory::resolve(
    const Breadcrumb& address) {
  std::lock_guard lock(mu_);
  auto it = agents_.find(address);
  if (it == agents_.end()) return nullptr;
  return std::make_shared<Wrapper>(it->second, unreachable_.contains(address),
                                   latency_);
}

}  // namespace retrotrace
