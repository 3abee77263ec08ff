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
#include <deque>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "retrotrace/sliding_quantile.h"
#include "retrotrace/types.h"

namespace retrotrace {

// Fires for measurements strictly above the p-th percentile of the samples
// seen before this one (sliding window). Quiet until `warmup` samples.
class PercentileTrigger {
 public:
  static constexpr std::size_t kDefaultWindow = 10000;
  static constexpr std::size_t kDefaultWarmup = 100;

  PercentileTrigger(TriggerId id, double p,
                    std::size_t window = kDefaultWindow,
                    std::size_t warmup = kDefaultWarmup);

  std::optional<Trigger> add_sample(TraceId trace_id, double measurement);

  TriggerId trigger_id() const { return id_; }
  double p() const { return p_; }
  uint64_t rejected() const;
  uint64_t fired() const;

 private:
  const TriggerId id_;
  const double p_;
  const std::size_t warmup_;
  mutable std::mutex mu_;
  SlidingQuantile window_;
  uint64_t rejected_ = 0;
  uint64_t fired_ = 0;
};

// Fires for labels rarer than fraction f of everything seen so far.
class CategoryTrigger {
 public:
  static constexpr std::size_t kDefaultWarmup = 100;

  CategoryTrigger(TriggerId id, double f,
                  std::size_t warmup = kDefaultWarmup);

  std::optional<Trigger> add_sample(TraceId trace_id, const std::string& label);

  TriggerId trigger_id() const { return id_; }
  uint64_t total() const;
  uint64_t count(const std::string& label) const;

 private:
  const TriggerId id_;
  const double f_;
  const std::size_t warmup_;
  mutable std::mutex mu_;
  std::map<std::string, uint64_t> counts_;
  uint64_t total_ = 0;
};

class ExceptionTrigger {
 public:
  explicit ExceptionTrigger(TriggerId id) : id_(id) {}
  Trigger notify(TraceId trace_id) const { return make_trigger(trace_id, id_); }
  TriggerId trigger_id() const { return id_; }

 private:
  const TriggerId id_;
};

// Remembers the most recent traces so a firing trigger can take its
// neighbours along as laterals.
class TriggerSet {
 public:
  explicit TriggerSet(std::size_t n);

  void observe(TraceId trace_id);
  // Laterals are the N most recent distinct observed ids other than the
  // firing one, newest first.
  Trigger on_fire(const Trigger& inner) const;
  std::size_t n() const { return n_; }

 private:
  const std::size_t n_;
  mutable std::mutex mu_;
  std::deque<TraceId> recent_;  // oldest at front, at most n_ + 1
};

// TriggerSet over a PercentileTrigger on queueing time: a slow dequeue
// collects the requests queued just before it.
class QueueTrigger {
 public:
  QueueTrigger(TriggerId id, double p = 99.99, std::size_t n = 10,
               std::size_t window = PercentileTrigger::kDefaultWindow,
               std::size_t warmup = PercentileTrigger::kDefaultWarmup);

  // Call once per request at dequeue.
  std::optional<Trigger> add_sample(TraceId trace_id, double queue_ms);

  TriggerId trigger_id() const { return percentile_.trigger_id(); }

 private:
  PercentileTrigger percentile_;
  TriggerSet set_;
};

}  // namespace retrotrace
