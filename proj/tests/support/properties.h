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

// Randomized property suites and brute-force oracles. Shared by the unit
// tests and the acceptance runner so both exercise the same checks.

#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace retrotrace::check {

struct PropertyResult {
  std::string name;
  std::size_t cases = 0;
  std::size_t failures = 0;
  std::string first_failure;

  bool ok() const { return cases > 0 && failures == 0; }
  void fail(std::size_t case_no, const std::string& why);
  std::string summary() const;
};

inline constexpr std::size_t kDefaultCases = 10000;
inline constexpr std::size_t kOracleSamples = 100000;

// Queue model check: FIFO order, capacity bound, no loss or duplication,
// plus periodic multi-producer multi-consumer runs.
PropertyResult queue_conservation(uint64_t seed, std::size_t cases = kDefaultCases);
// At quiescence every buffer id sits in exactly one place.
PropertyResult pool_conservation(uint64_t seed, std::size_t cases = kDefaultCases);
// Priority is a pure function of the id and matches an independent hash.
PropertyResult priority_determinism(uint64_t seed, std::size_t cases = kDefaultCases);
// Context encode/decode is lossless and rejects malformed input.
PropertyResult context_round_trip(uint64_t seed, std::size_t cases = kDefaultCases);
// The agent evicts exactly what an LRU model says it should.
PropertyResult eviction_lru(uint64_t seed, std::size_t cases = kDefaultCases);
// Backlogged reporting queues are served in proportion to their weights.
PropertyResult reporting_fairness(uint64_t seed, std::size_t cases = kDefaultCases);
// Accepted operations never exceed burst + rate x elapsed.
PropertyResult rate_limit_bound(uint64_t seed, std::size_t cases = kDefaultCases);

std::vector<PropertyResult> all_properties(uint64_t seed,
                                           std::size_t cases = kDefaultCases);

// Autotrigger decisions against brute-force recomputation.
PropertyResult percentile_oracle(uint64_t seed, std::size_t samples = kOracleSamples);
PropertyResult category_oracle(uint64_t seed, std::size_t samples = kOracleSamples);
PropertyResult trigger_set_oracle(uint64_t seed, std::size_t samples = kOracleSamples);

std::vector<PropertyResult> all_oracles(uint64_t seed,
                                        std::size_t samples = kOracleSamples);

// Smallest k >= 1 with k / n >= p / 100, found by scanning.
std::size_t oracle_rank(double p, std::size_t n);

}  // namespace retrotrace::check
