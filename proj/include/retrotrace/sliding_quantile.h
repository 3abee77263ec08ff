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

#include <ext/pb_ds/assoc_container.hpp>
#include <ext/pb_ds/tree_policy.hpp>

#include "retrotrace/types.h"

namespace retrotrace {

// Exact order statistics over the last `capacity` samples.
class SlidingQuantile {
 public:
  explicit SlidingQuantile(std::size_t capacity);

  void add(double value);
  std::size_t size() const { return order_.size(); }
  std::size_t capacity() const { return capacity_; }

  // k-th smallest, 1-based. Requires 1 <= k <= size().
  double kth(std::size_t k) const;
  // Nearest-rank percentile: the ceil(p/100 * n)-th smallest sample.
  double percentile(double p) const;

 private:
  using Key = std::pair<double, uint64_t>;  // (value, arrival seq)
  using Tree = __gnu_pbds::tree<Key, __gnu_pbds::null_type, std::less<Key>,
                                __gnu_pbds::rb_tree_tag,
                                __gnu_pbds::tree_order_statistics_node_update>;

  std::size_t capacity_;
  uint64_t next_seq_ = 0;
  std::deque<Key> fifo_;
  Tree order_;
};

// 1-based rank used by percentile(); exposed for oracles.
std::size_t nearest_rank(double p, std::size_t n);

}  // namespace retrotrace
