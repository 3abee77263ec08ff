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

// Acceptance scenarios. Each returns one pass/fail verdict with the numbers
// behind it.

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace retrotrace::check {

struct CriterionResult {
  std::string id;     // "AC1" ...
  std::string title;
  bool pass = false;
  std::string detail;
  double seconds = 0;
};

struct AcceptanceOptions {
  std::filesystem::path topologies;
  uint64_t seed = 1;
};

CriterionResult edge_case_capture(const AcceptanceOptions& opt);
CriterionResult coherent_shedding(const AcceptanceOptions& opt);
CriterionResult event_horizon(const AcceptanceOptions& opt);
CriterionResult traversal_correctness(const AcceptanceOptions& opt);
CriterionResult autotrigger_oracles(const AcceptanceOptions& opt);
CriterionResult queue_provenance(const AcceptanceOptions& opt);
CriterionResult tracepoint_latency(const AcceptanceOptions& opt);
CriterionResult buffer_tradeoff(const AcceptanceOptions& opt);
CriterionResult property_suites(const AcceptanceOptions& opt);

using CriterionFn = CriterionResult (*)(const AcceptanceOptions&);
struct Criterion {
  const char* id;
  CriterionFn run;
};
// In order AC1..AC9.
const std::vector<Criterion>& criteria();

}  // namespace retrotrace::check
