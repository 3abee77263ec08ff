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

#include <algorithm>
#include <limits>

#include "retrotrace/clock.h"

namespace retrotrace {

// Classic token bucket. Not thread-safe; owners serialize access.
//
// take() admits a unit cost only when a whole token is available.
// spend() admits whenever the balance is non-negative and may drive it
// negative, which paces byte streams whose item sizes exceed the burst.
class TokenBucket {
 public:
  // rate <= 0 or infinity means unlimited.
  TokenBucket(double rate_per_sec, double burst, Nanos now)
      : rate_(rate_per_sec), burst_(burst), tokens_(burst), last_(now) {}

  static TokenBucket unlimited() {
    return TokenBucket(std::numeric_limits<double>::infinity(), 0, Nanos{0});
  }

  bool limited() const {
    return rate_ > 0 && rate_ != std::numeric_limits<double>::infinity();
  }

  void refill(Nanos now) {
    if (!limited() || now <= last_) return;
    tokens_ = std::min(burst_, tokens_ + rate_ * to_seconds(now - last_));
    last_ = now;
  }

  bool take(Nanos now, double cost = 1.0) {
    if (!limited()) return true;
    refill(now);
    if (tokens_ < cost) return false;
    tokens_ -= cost;
    return true;
  }

  bool can_spend(Nanos now) {
    if (!limited()) return true;
    refill(now);
    return tokens_ >= 0;
  }

  void spend(double cost) {
    if (limited()) tokens_ -= cost;
  }

  double tokens() const { return tokens_; }
  double rate() const { return rate_; }

 private:
  double rate_;
  double burst_;
  double tokens_;
  Nanos last_;
};

}  // namespace retrotrace
