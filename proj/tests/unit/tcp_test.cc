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

#include <gtest/gtest.h>

#include "retrotrace/agent.h"
#include "retrotrace/client.h"
#include "retrotrace/collector.h"
#include "retrotrace/coordinator.h"
#include "retrotrace/tcp_transport.h"

namespace retrotrace {
namespace {

const TraceId kX = TraceId::from_u64(77);

TEST(Tcp, ParsesAddresses) {
  EXPECT_EQ(parse_address("127.0.0.1:80"), (std::pair<std::string, uint16_t>{"127.0.0.1", 80}));
  EXPECT_THROW(parse_address("nohost"), std::invalid_argument);
  EXPECT_THROW(parse_address("h:99999"), std::invalid_argument);
}

TEST(Tcp, EchoAndErrorReplies) {
  TcpServer server([](const Message& m) {
    if (m.body.empty()) throw std::runtime_error("empty");
    return Message{MessageType::kReportAck, m.body};
  });
  TcpConnection conn("127.0.0.1", server.port());
  Message reply = conn.call({MessageType::kReportData, {1, 2, 3}});
  EXPECT_EQ(reply.type, MessageType::kReportAck);
  EXPECT_EQ(reply.body, (std::vector<uint8_t>{1, 2, 3}));
  EXPECT_THROW(conn.call({MessageType::kReportData, {}}), TransportError);
  // The connection stays usable after an error reply.
  EXPECT_EQ(conn.call({MessageType::kReportData, {9}}).body, std::vector<uint8_t>{9});
}

TEST(Tcp, ConnectFailureThrows) {
  uint16_t port;
  {
    TcpServer s([](const Message& m) { return m; });
    port = s.port();
    s.stop();
  }
  TcpConnection conn("127.0.0.1", port);
  EXPECT_THROW(conn.call({MessageType::kReportData, {1}}), TransportError);
}

TEST(Tcp, EndToEndTriggerOverLoopback) {
  Collector collector;
  auto collector_server = serve_collector(collector);
  TcpCollectorEndpoint collector_ep(collector_server->address());

  ChannelConfig ch;
  ch.pool_size = 64 * 1024;
  ch.buffer_size = 1024;
  NodeMemory mem_a(ch), mem_b(ch);
  // Agents learn their addresses only after binding, so servers come first
  // and forward into agents built afterwards.
  std::unique_ptr<Agent> agent_a, agent_b;
  struct Forward : AgentEndpoint {
    std::unique_ptr<Agent>* target;
    BreadcrumbMap trigger_notify(const TriggerNotify& m) override {
      return (*target)->trigger_notify(m);
    }
    BreadcrumbMap get_breadcrumbs(std::span<const TraceId> ids) override {
      return (*target)->get_breadcrumbs(ids);
    }
  } fa, fb;
  fa.target = &agent_a;
  fb.target = &agent_b;
  auto server_a = serve_agent(fa);
  auto server_b = serve_agent(fb);

  TcpDirectory dir;
  CoordinatorConfig ccfg;
  Coordinator coordinator(dir, ccfg);
  auto coord_server = serve_coordinator(coordinator);
  TcpCoordinatorEndpoint coord_ep(coord_server->address());

  AgentConfig ca, cb;
  ca.address = server_a->address();
  cb.address = server_b->address();
  agent_a = std::make_unique<Agent>(mem_a, ca, steady_clock(), &coord_ep, &collector_ep);
  agent_b = std::make_unique<Agent>(mem_b, cb, steady_clock(), &coord_ep, &collector_ep);

  Client client_a(mem_a, {ca.address, 1.0});
  Client client_b(mem_b, {cb.address, 1.0});

  client_a.begin(kX);
  client_a.tracepoint("front");
  auto ctx = client_a.serialize();
  client_b.begin(client_b.deserialize(ctx));
  client_b.tracepoint("back");
  client_b.end();
  client_a.breadcrumb(cb.address);
  client_a.end();

  agent_b->poll();
  client_a.trigger(kX, TriggerId{16});
  agent_a->poll();
  agent_a->report_phase();
  agent_b->report_phase();

  auto t = collector.assembled(kX);
  ASSERT_TRUE(t.has_value());
  EXPECT_EQ(t->slices.size(), 2u);
  EXPECT_TRUE(t->slices.contains(ca.address));
  EXPECT_TRUE(t->slices.contains(cb.address));
  agent_a.reset();
  agent_b.reset();
}

}  // namespace
}  // namespace retrotrace
