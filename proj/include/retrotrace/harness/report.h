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

#include <filesystem>
#include <string>

#include "retrotrace/harness/microbench.h"
#include "retrotrace/harness/simulation.h"

namespace retrotrace::harness {

// Run directory layout:
//   metrics.json   every metric of the run
//   topology.json  the effective topology and tracing config
//   triggers.csv   per-trigger coherence counts
//   agents.csv     per-agent counters
//   summary.txt    human-readable summary
//   traces/        one file per collected trace
void write_run(const std::filesystem::path& dir, const RunResult& run);

std::string metrics_json(const RunMetrics& m);
std::string summary_text(const RunMetrics& m);

// Reads a run directory back and renders its tables as CSV followed by
// the summary. Throws std::runtime_error if metrics.json is missing.
std::string render_report(const std::filesystem::path& dir);

std::string tracepoint_bench_csv(const TracepointBenchResult& r);
std::string buffer_bench_csv(const std::vector<BufferBenchRow>& rows);

}  // namespace retrotrace::harness
