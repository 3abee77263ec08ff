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

#include <atomic>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <type_traits>
#include <vector>

namespace retrotrace {

// Fixed header at the start of every queue. When a queue is placed in a
// shared region the layout is: four little-endian 64-bit words, each on its
// own cache line.
//
//   offset   0  enqueue position (monotonic)
//   offset  64  dequeue position (monotonic)
//   offset 128  capacity (element slots, power of two)
//   offset 136  element size in bytes
//
// Slots follow at offset 192, each {u64 sequence, element}.
struct alignas(64) QueueHeader {
  alignas(64) std::atomic<uint64_t> enqueue_pos{0};
  alignas(64) std::atomic<uint64_t> dequeue_pos{0};
  alignas(64) uint64_t capacity = 0;
  uint64_t element_size = 0;
};

static_assert(offsetof(QueueHeader, enqueue_pos) == 0);
static_assert(offsetof(QueueHeader, dequeue_pos) == 64);
static_assert(offsetof(QueueHeader, capacity) == 128);
static_assert(offsetof(QueueHeader, element_size) == 136);

// Bounded multi-producer multi-consumer queue. Every slot carries a sequence
// number; producers and consumers claim positions with a single CAS, so a
// full or empty queue is reported without waiting on other threads.
//
// Used for all four client/agent channels regardless of their declared
// producer/consumer multiplicity.
template <typename T>
class MetadataQueue {
  static_assert(std::is_default_constructible_v<T>);
  static_assert(std::is_nothrow_move_assignable_v<T>);

 public:
  explicit MetadataQueue(std::size_t min_capacity)
      : capacity_(std::bit_ceil(min_capacity < 1 ? std::size_t{1}
                                                 : min_capacity)),
        slots_(capacity_ < 2 ? 2 : capacity_),
        mask_(slots_.size() - 1) {
    header_.capacity = capacity_;
    header_.element_size = sizeof(T);
    for (std::size_t i = 0; i < slots_.size(); ++i) {
      slots_[i].seq.store(i, std::memory_order_relaxed);
    }
  }

  MetadataQueue(const MetadataQueue&) = delete;
  MetadataQueue& operator=(const MetadataQueue&) = delete;

  std::size_t capacity() const { return capacity_; }
  const QueueHeader& header() const { return header_; }

  // Returns false, leaving `item` untouched, when the queue is full.
  bool try_push(T& item) {
    uint64_t pos = header_.enqueue_pos.load(std::memory_order_relaxed);
    for (;;) {
      Slot& s = slots_[pos & mask_];
      uint64_t seq = s.seq.load(std::memory_order_acquire);
      auto diff = static_cast<int64_t>(seq) - static_cast<int64_t>(pos);
      if (diff == 0) {
        // Sequence numbers need at least two slots; a single-slot queue
        // additionally bounds occupancy against the dequeue position.
        if (capacity_ < slots_.size() &&
            pos - header_.dequeue_pos.load(std::memory_order_acquire) >=
                capacity_) {
          return false;
        }
        if (header_.enqueue_pos.compare_exchange_weak(
                pos, pos + 1, std::memory_order_relaxed)) {
          s.value = std::move(item);
          s.seq.store(pos + 1, std::memory_order_release);
          return true;
        }
      } else if (diff < 0) {
        return false;
      } else {
        pos = header_.enqueue_pos.load(std::memory_order_relaxed);
      }
    }
  }

  bool try_push(T&& item) { return try_push(item); }

  bool try_pop(T& out) {
    uint64_t pos = header_.dequeue_pos.load(std::memory_order_relaxed);
    for (;;) {
      Slot& s = slots_[pos & mask_];
      uint64_t seq = s.seq.load(std::memory_order_acquire);
      auto diff = static_cast<int64_t>(seq) - static_cast<int64_t>(pos + 1);
      if (diff == 0) {
        if (header_.dequeue_pos.compare_exchange_weak(
                pos, pos + 1, std::memory_order_relaxed)) {
          out = std::move(s.value);
          s.seq.store(pos + mask_ + 1, std::memory_order_release);
          return true;
        }
      } else if (diff < 0) {
        return false;
      } else {
        pos = header_.dequeue_pos.load(std::memory_order_relaxed);
      }
    }
  }

  // Pushes a prefix of `items`; returns how many were accepted.
  std::size_t try_push_batch(std::span<T> items) {
    std::size_t n = 0;
    while (n < items.size() && try_push(items[n])) ++n;
    return n;
  }

  // Appends up to max_n items to `out`; returns how many were taken.
  std::size_t try_pop_batch(std::vector<T>& out, std::size_t max_n) {
    std::size_t n = 0;
    T tmp{};
    while (n < max_n && try_pop(tmp)) {
      out.push_back(std::move(tmp));
      ++n;
    }
    return n;
  }

  std::vector<T> try_pop_batch(std::size_t max_n) {
    std::vector<T> out;
    try_pop_batch(out, max_n);
    return out;
  }

  // Approximate under concurrency, exact at quiescence.
  std::size_t size_approx() const {
    uint64_t tail = header_.enqueue_pos.load(std::memory_order_acquire);
    uint64_t head = header_.dequeue_pos.load(std::memory_order_acquire);
    return tail > head ? static_cast<std::size_t>(tail - head) : 0;
  }

  bool empty_approx() const { return size_approx() == 0; }

 private:
  struct Slot {
    std::atomic<uint64_t> seq{0};
    T value{};
  };

  QueueHeader header_;
  const std::size_t capacity_;
  std::vector<Slot> slots_;
  const std::size_t mask_;
};

}  // namespace retrotrace
