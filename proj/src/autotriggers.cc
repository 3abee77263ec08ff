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

#include "retrotrace/autotriggers.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace retrotrace {

PercentileTrigger::PercentileTrigger(TriggerId id, double p,
                                     std::size_t window, std::size_t warmup)
    : id_(id), p_(p), warmup_(warmup), window_(window) {
  if (!(p > 0 && p < 100)) throw std::invalid_argument("p must be in (0,100)");
}

std::optional<Trigger> PercentileTrigger::add_sample(TraceId trace_id,
                                                     double measurement) {
  std::lock_guard lock(mu_);
  if (!std::isfinite(measurement) || measurement < 0) {
    rejected_++;
    return std::nullopt;
  }
  bool fire = window_.size() >= warmup_ && window_.size() > 0 &&
              measurement > window_.percentile(p_);
  window_.add(measurement);
  if (!fire) return std::nullopt;
  fired_++;
  return make_trigger(trace_id, id_);
}

uint64_t PercentileTrigger::rejected() const {
  std::lock_guard lock(mu_);
  return rejected_;
}

uint64_t PercentileTrigger::fired() const {
  std::lock_guard lock(mu_);
  return fired_;
}

CategoryTrigger::CategoryTrigger(TriggerId id, double f, std::size_t warmup)
    : id_(id), f_(f), warmup_(warmup) {
  if (!(f > 0 && f < 1)) throw std::invalid_argument("f must be in (0,1)");
}

std::optional<Trigger> CategoryTrigger::add_sample(TraceId trace_id,
                                                   const std::string& label) {
  if (label.empty()) throw std::invalid_argument("empty label");
  std::lock_guard lock(mu_);
  uint64_t c = ++counts_[label];
  ++total_;
  // c / total < f, kept in floating point: both sides are exact below 2^53.
  if (total_ < warmup_ ||
      !(static_cast<double>(c) < f_ * static_cast<double>(total_))) {
    return std::nullopt;
  }
  return make_trigger(trace_id, id_);
}

uint64_t CategoryTrigger::total() const {
  std::lock_guard lock(mu_);
  return total_;
}

uint64_t CategoryTrigger::count(const std::string& label) const {
  std::lock_guard lock(mu_);
  auto it = counts_.find(label);
  return it == counts_.end() ? 0 : it->second;
}

TriggerSet::TriggerSet(std::size_t n) : n_(n) {}

void TriggerSet::observe(TraceId trace_id) {
  std::lock_guard lock(mu_);
  recent_.push_back(trace_id);
  while (recent_.size() > n_ + 1) recent_.pop_front();
}

Trigger TriggerSet::on_fire(const Trigger& inner) const {
  std::vector<TraceId> laterals;
  {
    std::lock_guard lock(mu_);
    for (auto it = recent_.rbegin();
         it != recent_.rend() && laterals.size() < n_; ++it) {
      if (*it == inner.trace_id || it->is_zero()) continue;
      if (std::find(laterals.begin(), laterals.end(), *it) != laterals.end()) {
        continue;
      }
      laterals.push_back(*it);
    }
  }
  for (const TraceId& l : inner.laterals) {
    if (std::find(laterals.begin(), laterals.end(), l) == laterals.end()) {
      laterals.push_back(l);
    }
  }
  return make_trigger(inner.trace_id, inner.trigger_id, std::move(laterals));
}

QueueTrigger::QueueTrigger(TriggerId id, double p, std::size_t n,
                           std::size_t window, std::size_t warmup)
    : percentile_(id, p, window, warmup), set_(n) {}

std::optional<Trigger> QueueTrigger::add_sample(TraceId trace_id,
                                                double queue_ms) {
  set_.observe(trace_id);
  auto fired = percentile_.add_sample(trace_id, queue_ms);
  if (!fired) return std::nullopt;
  return set_.on_fire(*fired);
}

}  // namespace retrotrace
