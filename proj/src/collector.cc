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

#include "retrotrace/collector.h"

#include <algorithm>
#include <fstream>

namespace retrotrace {

namespace {

uint32_t load_le32(const uint8_t* p) {
  return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
         (static_cast<uint32_t>(p[2]) << 16) |
         (static_cast<uint32_t>(p[3]) << 24);
}

// Throws DecodeError unless frames tile the buffer exactly.
void check_frames(std::span<const uint8_t> buf) {
  std::size_t pos = 0;
  while (pos < buf.size()) {
    if (buf.size() - pos < kFrameHeaderBytes) {
      throw DecodeError("truncated frame header");
    }
    uint32_t len = load_le32(buf.data() + pos) & kFrameLengthMask;
    pos += kFrameHeaderBytes;
    if (buf.size() - pos < len) throw DecodeError("frame overruns buffer");
    pos += len;
  }
}

}  // namespace

const char* to_string(Coherence c) {
  switch (c) {
    case Coherence::kCoherent:
      return "coherent";
    case Coherence::kIncoherent:
      return "incoherent";
    case Coherence::kMissing:
      return "missing";
  }
  return "?";
}

std::vector<Payload> decode_slice(std::span<const std::vector<uint8_t>> buffers,
                                  bool* incomplete) {
  std::vector<Payload> out;
  Payload partial;
  bool in_fragment = false;
  for (const auto& buf : buffers) {
    std::size_t pos = 0;
    while (pos < buf.size()) {
      if (buf.size() - pos < kFrameHeaderBytes) {
        throw DecodeError("truncated frame header");
      }
      uint32_t header = load_le32(buf.data() + pos);
      uint32_t len = header & kFrameLengthMask;
      bool continued = (header & kFrameContinued) != 0;
      pos += kFrameHeaderBytes;
      if (buf.size() - pos < len) throw DecodeError("frame overruns buffer");
      partial.insert(partial.end(), buf.begin() + pos, buf.begin() + pos + len);
      pos += len;
      in_fragment = continued;
      if (!continued) {
        out.push_back(std::move(partial));
        partial.clear();
      }
    }
  }
  if (incomplete != nullptr) *incomplete = in_fragment;
  return out;
}

IngestResult Collector::ingest(const ReportData& report) {
  IngestResult result;
  for (const auto& b : report.buffers) {
    try {
      check_frames(b.bytes);
    } catch (const DecodeError&) {
      result.rejected = true;
    }
  }

  Nanos now = clock_.now();
  {
    Shard& shard = shard_for(report.trace_id);
    std::lock_guard lock(shard.mu);
    auto [it, inserted] = shard.traces.try_emplace(report.trace_id);
    Record& rec = it->second;
    if (inserted) rec.first_seen = now;
    rec.last_seen = now;
    if (result.rejected) {
      rec.suspect = true;
    } else {
      Slice& slice = rec.slices[report.agent_id];
      for (const auto& b : report.buffers) {
        uint64_t h = fnv1a64(b.bytes.data(), b.bytes.size());
        auto [hit, fresh] = slice.hashes.try_emplace(b.seq, h);
        if (!fresh) {
          if (hit->second != h) rec.suspect = true;
          result.duplicate_buffers++;
          continue;
        }
        slice.buffers.emplace(b.seq, b.bytes);
        result.accepted_buffers++;
      }
    }
  }

  std::lock_guard lock(stats_mu_);
  stats_.reports++;
  stats_.bytes_received += report.payload_bytes();
  stats_.duplicate_buffers += result.duplicate_buffers;
  if (result.rejected) stats_.malformed_reports++;
  return result;
}

AssembledTrace Collector::assemble(TraceId id, const Record& rec) const {
  AssembledTrace out;
  out.trace_id = id;
  out.first_seen = rec.first_seen;
  out.last_seen = rec.last_seen;
  out.suspect = rec.suspect;
  for (const auto& [agent, slice] : rec.slices) {
    std::vector<std::vector<uint8_t>> ordered;
    ordered.reserve(slice.buffers.size());
    for (const auto& [seq, bytes] : slice.buffers) ordered.push_back(bytes);
    bool incomplete = false;
    auto payloads = decode_slice(ordered, &incomplete);
    if (incomplete) out.incomplete_slices.insert(agent);
    for (const auto& p : payloads) out.total_bytes += p.size();
    out.slices.emplace(agent, std::move(payloads));
  }
  return out;
}

std::optional<AssembledTrace> Collector::assembled(TraceId id) const {
  const Shard& shard = shard_for(id);
  std::lock_guard lock(shard.mu);
  auto it = shard.traces.find(id);
  if (it == shard.traces.end()) return std::nullopt;
  return assemble(id, it->second);
}

bool Collector::has_trace(TraceId id) const {
  const Shard& shard = shard_for(id);
  std::lock_guard lock(shard.mu);
  return shard.traces.contains(id);
}

std::vector<TraceId> Collector::trace_ids() const {
  std::vector<TraceId> ids;
  for (const Shard& shard : shards_) {
    std::lock_guard lock(shard.mu);
    for (const auto& [id, rec] : shard.traces) ids.push_back(id);
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

Coherence Collector::classify(TraceId id, const ExpectedTrace& expected) const {
  auto trace = assembled(id);
  if (!trace || trace->slices.empty()) return Coherence::kMissing;
  if (expected.lost_data || trace->suspect) return Coherence::kIncoherent;
  for (const std::string& agent : expected.agents) {
    auto it = trace->slices.find(agent);
    if (it == trace->slices.end()) return Coherence::kIncoherent;
    if (trace->incomplete_slices.contains(agent)) return Coherence::kIncoherent;
    auto want = expected.bytes_per_agent.find(agent);
    if (want != expected.bytes_per_agent.end()) {
      uint64_t got = 0;
      for (const auto& p : it->second) got += p.size();
      if (got != want->second) return Coherence::kIncoherent;
    }
  }
  return Coherence::kCoherent;
}

CoherenceReport Collector::coherence_report(const GroundTruth& truth) const {
  CoherenceReport report;
  for (const auto& [id, expected] : truth) {
    Coherence c = classify(id, expected);
    report.per_trace[id] = c;
    auto bump = [c](CoherenceCounts& counts) {
      switch (c) {
        case Coherence::kCoherent:
          counts.coherent++;
          break;
        case Coherence::kIncoherent:
          counts.incoherent++;
          break;
        case Coherence::kMissing:
          counts.missing++;
          break;
      }
    };
    bump(report.overall);
    for (TriggerId t : expected.triggers) bump(report.per_trigger[t]);
  }
  return report;
}

void Collector::persist(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir / "traces");
  for (TraceId id : trace_ids()) {
    auto trace = assembled(id);
    if (!trace) continue;
    std::ofstream out(dir / "traces" / (id.to_hex() + ".trace"),
                      std::ios::binary);
    out << "trace " << id.to_hex() << " agents";
    for (const auto& [agent, payloads] : trace->slices) out << ' ' << agent;
    out << '\n';
    for (const auto& [agent, payloads] : trace->slices) {
      for (const auto& p : payloads) {
        out << agent << ' ' << p.size() << '\n';
        out.write(reinterpret_cast<const char*>(p.data()),
                  static_cast<std::streamsize>(p.size()));
        out << '\n';
      }
    }
  }
}

CollectorStats Collector::stats() const {
  CollectorStats s;
  {
    std::lock_guard lock(stats_mu_);
    s = stats_;
  }
  std::size_t n = 0;
  for (const Shard& shard : shards_) {
    std::lock_guard lock(shard.mu);
    n += shard.traces.size();
  }
  s.traces = n;
  return s;
}

}  // namespace retrotrace
