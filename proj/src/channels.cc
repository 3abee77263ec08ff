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

#include "retrotrace/channels.h"

#include <cstring>
#include <stdexcept>
#include <vector>

namespace retrotrace {

BufferPool::BufferPool(std::size_t pool_size, std::size_t buffer_size,
                       bool prefault)
    : pool_size_(pool_size), buffer_size_(buffer_size) {
  if (buffer_size < kMinBufferSize || pool_size < buffer_size ||
      pool_size % buffer_size != 0) {
    throw std::invalid_argument(
        "pool size must be a nonzero multiple of the buffer size");
  }
  std::size_t count = pool_size / buffer_size;
  if (count >= BufferId::kNullIndex) {
    throw std::invalid_argument("too many buffers in pool");
  }
  buffer_count_ = static_cast<uint32_t>(count);
  region_ = std::make_unique_for_overwrite<uint8_t[]>(pool_size);
  if (prefault) std::memset(region_.get(), 0, pool_size);
}

NodeMemory::NodeMemory(const ChannelConfig& cfg)
    : pool_(cfg.pool_size, cfg.buffer_size, cfg.prefault),
      available(pool_.buffer_count()),
      complete(pool_.buffer_count()),
      breadcrumbs(cfg.breadcrumb_capacity),
      triggers(cfg.trigger_capacity) {
  for (uint32_t i = 0; i < pool_.buffer_count(); ++i) {
    available.try_push(BufferId{i});
  }
}

}  // namespace retrotrace
