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

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "retrotrace/clock.h"
#include "retrotrace/transport.h"
#include "retrotrace/types.h"
#include "retrotrace/wire.h"

namespace retrotrace {

using Payload = std::vector<uint8_t>;

// Decodes the frames of one slice (buffers in arrival order) back into
// whole payloads. Throws DecodeError when a frame overruns its buffer.
// `incomplete` is set when the last fragment is still waiting for its
// continuation.
std::vector<Payload> decode_slice(std::span<const std::vector<uint8_t>> buffers,
                                  bool* incomplete = nullptr);

struct AssembledTrace {
  TraceId trace_id;
  std::map<std::string, std::vector<Payload>> slices;  // agent -> payloads
  std::set<std::string> incomplete_slices;
  Nanos first_seen{0};
  Nanos last_seen{0};
  std::size_t total_bytes = 0;  // payload bytes across slices
  bool suspect = false;
};

enum class Coherence { kCoherent, kIncoherent, kMissing };
const char* to_string(Coherence c);

// What the harness knows about a trace independently of the tracing path.
struct ExpectedTrace {
  std::set<std::string> agents;
  // Payload bytes written per agent; empty means "don't check".
  std::map<std::string, uint64_t> bytes_per_agent;
  bool lost_data = false;  // any byte went to a null buffer
  std::set<TriggerId> triggers;
};

using GroundTruth = std::map<TraceId, ExpectedTrace>;

struct CoherenceCounts {
  std::size_t coherent = 0;
  std::size_t incoherent = 0;
  std::size_t missing = 0;

  std::size_t total() const { return coherent + incoherent + missing; }
  double coherent_percent() const {
    return total() == 0 ? 100.0 : 100.0 * coherent / total();
  }
};

struct CoherenceReport {
  std::map<TraceId, Coherence> per_trace;
  CoherenceCounts overall;
  std::map<TriggerId, CoherenceCounts> per_trigger;
};

struct IngestResult {
  std::size_t accepted_buffers = 0;
  std::size_t duplicate_buffers = 0;
  bool rejected = false;
};

struct CollectorStats {
  uint64_t reports = 0;
  uint64_t bytes_received = 0;
  uint64_t duplicate_buffers = 0;
  uint64_t malformed_reports = 0;
  std::size_t traces = 0;
};

// Backend that reassembles reported buffers into per-trace records.
// Ingest is safe from many agents at once; merges for one trace are
// serialized by its shard lock.
class Collector final : public CollectorEndpoint {
 public:
  explicit Collector(const Clock& clock = steady_clock()) : clock_(clock) {}

  IngestResult ingest(const ReportData& report);
  void report_data(const ReportData& report) override { ingest(report); }

  std::optional<AssembledTrace> assembled(TraceId id) const;
  std::vector<TraceId> trace_ids() const;
  bool has_trace(TraceId id) const;

  Coherence classify(TraceId id, const ExpectedTrace& expected) const;
  CoherenceReport coherence_report(const GroundTruth& truth) const;

  // One file per trace under dir/traces: a header line with the trace id
  // and agent list, then each slice's payloads as "<agent> <length>\n"
  // followed by the raw bytes and a newline.
  void persist(const std::filesystem::path& dir) const;

  CollectorStats stats() const;

 private:
  struct Slice {
    std::map<uint64_t, std::vector<uint8_t>> buffers;  // by agent seq
    std::map<uint64_t, uint64_t> hashes;
  };
  struct Record {
    std::map<std::string, Slice> slices;
    Nanos first_seen{0};
    Nanos last_seen{0};
    bool suspect = false;
  };
  struct Shard {
    mutable std::mutex mu;
    std::unordered_map<TraceId, Record> traces;
  };
  static constexpr std::size_t kShards = 16;

  Shard& shard_for(TraceId id) {
    return shards_[std::hash<TraceId>{}(id) % kShards];
  }
  const Shard& shard_for(TraceId id) const {
    return shards_[std::hash<TraceId>{}(id) % kShards];
  }
  AssembledTrace assemble(TraceId id, const Record& rec) const;

  const Clock& clock_;
  std::array<Shard, kShards> shards_;

  mutable std::mutex stats_mu_;
  CollectorStats stats_;
};

}  // namespace retrotrace
