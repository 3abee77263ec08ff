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

// Binary formats shared by the client, agent, coordinator and collector.
//
// Trace context (propagated with every request, big-endian):
//
//   traceId        16 bytes
//   addressLength   1 byte
//   address         addressLength bytes (UTF-8)
//   triggerCount    2 bytes
//   triggerIds      4 bytes each
//
// RPC messages travel as: u32 length | u8 type | body, where length counts
// the type byte plus the body. All integers inside bodies are big-endian.
//
// Tracepoint frames inside pool buffers use a 4-byte little-endian length
// whose high bit marks a fragment that continues in the next buffer.

#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "retrotrace/types.h"

namespace retrotrace {

class DecodeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr uint32_t kFrameContinued = 0x80000000u;
inline constexpr uint32_t kFrameLengthMask = 0x7FFFFFFFu;
inline constexpr std::size_t kFrameHeaderBytes = 4;

class ByteWriter {
 public:
  void u8(uint8_t v) { out_.push_back(v); }
  void u16(uint16_t v);
  void u32(uint32_t v);
  void u64(uint64_t v);
  void trace_id(TraceId id);
  void bytes(std::span<const uint8_t> data);
  // 1-byte length prefix; throws std::invalid_argument past 255 bytes.
  void short_string(std::string_view s);
  // 4-byte length prefix.
  void blob(std::span<const uint8_t> data);

  std::vector<uint8_t>& buffer() { return out_; }
  std::vector<uint8_t> take() { return std::move(out_); }

 private:
  std::vector<uint8_t> out_;
};

class ByteReader {
 public:
  explicit ByteReader(std::span<const uint8_t> in) : in_(in) {}

  uint8_t u8();
  uint16_t u16();
  uint32_t u32();
  uint64_t u64();
  TraceId trace_id();
  std::span<const uint8_t> bytes(std::size_t n);
  std::string short_string();
  std::vector<uint8_t> blob();

  std::size_t remaining() const { return in_.size() - pos_; }
  bool done() const { return pos_ == in_.size(); }
  void expect_done() const;

 private:
  void need(std::size_t n) const;

  std::span<const uint8_t> in_;
  std::size_t pos_ = 0;
};

std::vector<uint8_t> serialize_context(const TraceContext& ctx);
// Throws DecodeError on truncated or trailing input.
TraceContext deserialize_context(std::span<const uint8_t> bytes);

void write_trigger(ByteWriter& w, const Trigger& t);
Trigger read_trigger(ByteReader& r);
void write_breadcrumbs(ByteWriter& w, const BreadcrumbMap& m);
BreadcrumbMap read_breadcrumbs(ByteReader& r);

enum class MessageType : uint8_t {
  kTriggerNotify = 1,
  kTriggerNotifyAck = 2,
  kGetBreadcrumbs = 3,
  kBreadcrumbs = 4,
  kReportData = 5,
  kReportAck = 6,
  kLocalTrigger = 7,
  kLocalTriggerAck = 8,
  kError = 127,
};

struct ReportBuffer {
  uint64_t seq = 0;  // per-agent arrival order
  std::vector<uint8_t> bytes;

  friend bool operator==(const ReportBuffer&, const ReportBuffer&) = default;
};

struct ReportData {
  std::string agent_id;
  TraceId trace_id;
  std::vector<ReportBuffer> buffers;

  std::size_t payload_bytes() const;
  friend bool operator==(const ReportData&, const ReportData&) = default;
};

struct TriggerNotify {
  Trigger trigger;
  BreadcrumbMap breadcrumbs;
};

struct LocalTrigger {
  Breadcrumb origin;
  Trigger trigger;
  BreadcrumbMap breadcrumbs;
};

std::vector<uint8_t> encode_report_data(const ReportData& m);
ReportData decode_report_data(std::span<const uint8_t> body);
std::vector<uint8_t> encode_trigger_notify(const TriggerNotify& m);
TriggerNotify decode_trigger_notify(std::span<const uint8_t> body);
std::vector<uint8_t> encode_local_trigger(const LocalTrigger& m);
LocalTrigger decode_local_trigger(std::span<const uint8_t> body);
std::vector<uint8_t> encode_breadcrumb_map(const BreadcrumbMap& m);
BreadcrumbMap decode_breadcrumb_map(std::span<const uint8_t> body);
std::vector<uint8_t> encode_trace_ids(std::span<const TraceId> ids);
std::vector<TraceId> decode_trace_ids(std::span<const uint8_t> body);

// u32 length | u8 type | body
std::vector<uint8_t> frame_message(MessageType type,
                                   std::span<const uint8_t> body);

}  // namespace retrotrace
