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

#include "retrotrace/sliding_quantile.h"

#include <cmath>
#include <stdexcept>

namespace retrotrace {

std::size_t nearest_rank(double p, std::size_t n) {
  // Rounded to kill float fuzz such as 0.99 * 100 = 98.99999999.
  double exact = p / 100.0 * static_cast<double>(n);
  double rounded = std::round(exact);
  double r = std::abs(exact - rounded) < 1e-9 ? rounded : std::ceil(exact);
  std::size_t k = static_cast<std::size_t>(r);
  if (k < 1) k = 1;
  if (k > n) k = n;
  return k;
}

SlidingQuantile::SlidingQuantile(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw std::invalid_argument("window must be nonzero");
}

void SlidingQuantile::add(double value) {
  Key key{value, next_seq_++};
  if (fifo_.size() == capacity_) {
    order_.erase(fifo_.front());
    fifo_.pop_front();
  }
  fifo_.push_back(key);
  order_.insert(key);
}

double SlidingQuantile::kth(std::size_t k) const {
  if (k < 1 || k > order_.size()) throw std::out_of_range("rank");
  return order_.find_by_order(k - 1)->first;
}

double SlidingQuantile::percentile(double p) const {
  if (order_.empty()) throw std::out_of_range("empty window");
  return kth(nearest_rank(p, order_.size()));
}

}  // namespace retrotrace
