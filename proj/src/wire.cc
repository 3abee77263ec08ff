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

#include "retrotrace/wire.h"

#include <limits>

namespace retrotrace {

void ByteWriter::u16(uint16_t v) {
  out_.push_back(static_cast<uint8_t>(v >> 8));
  out_.push_back(static_cast<uint8_t>(v));
}

void ByteWriter::u32(uint32_t v) {
  for (int s = 24; s >= 0; s -= 8) out_.push_back(static_cast<uint8_t>(v >> s));
}

void ByteWriter::u64(uint64_t v) {
  for (int s = 56; s >= 0; s -= 8) out_.push_back(static_cast<uint8_t>(v >> s));
}

void ByteWriter::trace_id(TraceId id) {
  auto b = id.to_bytes();
  out_.insert(out_.end(), b.begin(), b.end());
}

void ByteWriter::bytes(std::span<const uint8_t> data) {
  out_.insert(out_.end(), data.begin(), data.end());
}

void ByteWriter::short_string(std::string_view s) {
  if (s.size() > kMaxBreadcrumbBytes) {
    throw std::invalid_argument("string longer than 255 bytes");
  }
  u8(static_cast<uint8_t>(s.size()));
  out_.insert(out_.end(), s.begin(), s.end());
}

void ByteWriter::blob(std::span<const uint8_t> data) {
  u32(static_cast<uint32_t>(data.size()));
  bytes(data);
}

void ByteReader::need(std::size_t n) const {
  if (in_.size() - pos_ < n) throw DecodeError("truncated input");
}

uint8_t ByteReader::u8() {
  need(1);
  return in_[pos_++];
}

uint16_t ByteReader::u16() {
  need(2);
  uint16_t v = static_cast<uint16_t>((in_[pos_] << 8) | in_[pos_ + 1]);
  pos_ += 2;
  return v;
}

uint32_t ByteReader::u32() {
  need(4);
  uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v = (v << 8) | in_[pos_ + i];
  pos_ += 4;
  return v;
}

uint64_t ByteReader::u64() {
  need(8);
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v = (v << 8) | in_[pos_ + i];
  pos_ += 8;
  return v;
}

TraceId ByteReader::trace_id() {
  need(16);
  TraceId id = TraceId::from_bytes(in_.data() + pos_);
  pos_ += 16;
  return id;
}

std::span<const uint8_t> ByteReader::bytes(std::size_t n) {
  need(n);
  auto s = in_.subspan(pos_, n);
  pos_ += n;
  return s;
}

std::string ByteReader::short_string() {
  std::size_t n = u8();
  auto s = bytes(n);
  return std::string(s.begin(), s.end());
}

std::vector<uint8_t> ByteReader::blob() {
  std::size_t n = u32();
  auto s = bytes(n);
  return std::vector<uint8_t>(s.begin(), s.end());
}

void ByteReader::expect_done() const {
  if (!done()) throw DecodeError("trailing bytes after message");
}

std::vector<uint8_t> serialize_context(const TraceContext& ctx) {
  if (ctx.origin.size() > kMaxBreadcrumbBytes) {
    throw std::invalid_argument("breadcrumb address longer than 255 bytes");
  }
  if (ctx.fired_triggers.size() > std::numeric_limits<uint16_t>::max()) {
    throw std::invalid_argument("too many fired triggers");
  }
  ByteWriter w;
  w.buffer().reserve(16 + 1 + ctx.origin.size() + 2 +
                     4 * ctx.fired_triggers.size());
  w.trace_id(ctx.trace_id);
  w.short_string(ctx.origin);
  w.u16(static_cast<uint16_t>(ctx.fired_triggers.size()));
  for (TriggerId t : ctx.fired_triggers) w.u32(t.value);
  return w.take();
}

TraceContext deserialize_context(std::span<const uint8_t> bytes) {
  ByteReader r(bytes);
  TraceContext ctx;
  ctx.trace_id = r.trace_id();
  ctx.origin = r.short_string();
  uint16_t n = r.u16();
  for (uint16_t i = 0; i < n; ++i) ctx.fired_triggers.insert(TriggerId{r.u32()});
  r.expect_done();
  return ctx;
}

void write_trigger(ByteWriter& w, const Trigger& t) {
  w.trace_id(t.trace_id);
  w.u32(t.trigger_id.value);
  w.u32(static_cast<uint32_t>(t.laterals.size()));
  for (const TraceId& l : t.laterals) w.trace_id(l);
}

Trigger read_trigger(ByteReader& r) {
  Trigger t;
  t.trace_id = r.trace_id();
  t.trigger_id = TriggerId{r.u32()};
  uint32_t n = r.u32();
  if (n > r.remaining() / 16) throw DecodeError("lateral count exceeds input");
  t.laterals.reserve(n);
  for (uint32_t i = 0; i < n; ++i) t.laterals.push_back(r.trace_id());
  return t;
}

void write_breadcrumbs(ByteWriter& w, const BreadcrumbMap& m) {
  w.u32(static_cast<uint32_t>(m.size()));
  for (const auto& [id, crumbs] : m) {
    w.trace_id(id);
    w.u16(static_cast<uint16_t>(crumbs.size()));
    for (const auto& c : crumbs) w.short_string(c);
  }
}

BreadcrumbMap read_breadcrumbs(ByteReader& r) {
  BreadcrumbMap m;
  uint32_t n = r.u32();
  for (uint32_t i = 0; i < n; ++i) {
    TraceId id = r.trace_id();
    uint16_t k = r.u16();
    auto& set = m[id];
    for (uint16_t j = 0; j < k; ++j) set.insert(r.short_string());
  }
  return m;
}

std::size_t ReportData::payload_bytes() const {
  std::size_t n = 0;
  for (const auto& b : buffers) n += b.bytes.size();
  return n;
}

std::vector<uint8_t> encode_report_data(const ReportData& m) {
  ByteWriter w;
  w.short_string(m.agent_id);
  w.trace_id(m.trace_id);
  w.u32(static_cast<uint32_t>(m.buffers.size()));
  for (const auto& b : m.buffers) {
    w.u64(b.seq);
    w.blob(b.bytes);
  }
  return w.take();
}

ReportData decode_report_data(std::span<const uint8_t> body) {
  ByteReader r(body);
  ReportData m;
  m.agent_id = r.short_string();
  m.trace_id = r.trace_id();
  uint32_t n = r.u32();
  if (n > r.remaining() / 12) throw DecodeError("buffer count exceeds input");
  m.buffers.reserve(n);
  for (uint32_t i = 0; i < n; ++i) {
    ReportBuffer b;
    b.seq = r.u64();
    b.bytes = r.blob();
    m.buffers.push_back(std::move(b));
  }
  r.expect_done();
  return m;
}

std::vector<uint8_t> encode_trigger_notify(const TriggerNotify& m) {
  ByteWriter w;
  write_trigger(w, m.trigger);
  write_breadcrumbs(w, m.breadcrumbs);
  return w.take();
}

TriggerNotify decode_trigger_notify(std::span<const uint8_t> body) {
  ByteReader r(body);
  TriggerNotify m;
  m.trigger = read_trigger(r);
  m.breadcrumbs = read_breadcrumbs(r);
  r.expect_done();
  return m;
}

std::vector<uint8_t> encode_local_trigger(const LocalTrigger& m) {
  ByteWriter w;
  w.short_string(m.origin);
  write_trigger(w, m.trigger);
  write_breadcrumbs(w, m.breadcrumbs);
  return w.take();
}

LocalTrigger decode_local_trigger(std::span<const uint8_t> body) {
  ByteReader r(body);
  LocalTrigger m;
  m.origin = r.short_string();
  m.trigger = read_trigger(r);
  m.breadcrumbs = read_breadcrumbs(r);
  r.expect_done();
  return m;
}

std::vector<uint8_t> encode_breadcrumb_map(const BreadcrumbMap& m) {
  ByteWriter w;
  write_breadcrumbs(w, m);
  return w.take();
}

BreadcrumbMap decode_breadcrumb_map(std::span<const uint8_t> body) {
  ByteReader r(body);
  BreadcrumbMap m = read_breadcrumbs(r);
  r.expect_done();
  return m;
}

std::vector<uint8_t> encode_trace_ids(std::span<const TraceId> ids) {
  ByteWriter w;
  w.u32(static_cast<uint32_t>(ids.size()));
  for (const TraceId& id : ids) w.trace_id(id);
  return w.take();
}

std::vector<TraceId> decode_trace_ids(std::span<const uint8_t> body) {
  ByteReader r(body);
  uint32_t n = r.u32();
  if (n > r.remaining() / 16) throw DecodeError("id count exceeds input");
  std::vector<TraceId> ids;
  ids.reserve(n);
  for (uint32_t i = 0; i < n; ++i) ids.push_back(r.trace_id());
  r.expect_done();
  return ids;
}

std::vector<uint8_t> frame_message(MessageType type,
                                   std::span<const uint8_t> body) {
  ByteWriter w;
  w.buffer().reserve(5 + body.size());
  w.u32(static_cast<uint32_t>(body.size() + 1));
  w.u8(static_cast<uint8_t>(type));
  w.bytes(body);
  return w.take();
}

}  // namespace retrotrace
