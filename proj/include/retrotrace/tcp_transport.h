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

// Loopback TCP carriage for the RPC envelope. One request, one response,
// per call; connections are reused and re-dialed after a failure.

#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "retrotrace/transport.h"
#include "retrotrace/wire.h"

namespace retrotrace {

struct Message {
  MessageType type = MessageType::kError;
  std::vector<uint8_t> body;
};

// Handlers throw to answer with an Error message carrying what().
using MessageHandler = std::function<Message(const Message&)>;

class TcpServer {
 public:
  // port 0 picks an ephemeral port.
  TcpServer(MessageHandler handler, uint16_t port = 0);
  ~TcpServer();

  TcpServer(const TcpServer&) = delete;
  TcpServer& operator=(const TcpServer&) = delete;

  uint16_t port() const { return port_; }
  std::string address() const { return "127.0.0.1:" + std::to_string(port_); }
  void stop();

 private:
  void accept_loop();
  void serve(int fd);

  MessageHandler handler_;
  int listen_fd_ = -1;
  uint16_t port_ = 0;
  std::atomic<bool> running_{true};
  std::thread accept_thread_;
  std::mutex mu_;
  std::vector<int> client_fds_;
  std::vector<std::thread> workers_;
};

class TcpConnection {
 public:
  TcpConnection(std::string host, uint16_t port);
  ~TcpConnection();

  // Throws TransportError on I/O failure, or on an Error reply.
  Message call(const Message& request);

 private:
  void connect_locked();
  void close_locked();

  std::string host_;
  uint16_t port_;
  std::mutex mu_;
  int fd_ = -1;
};

// Splits "host:port"; throws std::invalid_argument.
std::pair<std::string, uint16_t> parse_address(const std::string& address);

class TcpAgentEndpoint final : public AgentEndpoint {
 public:
  explicit TcpAgentEndpoint(const std::string& address);
  BreadcrumbMap trigger_notify(const TriggerNotify& msg) override;
  BreadcrumbMap get_breadcrumbs(std::span<const TraceId> ids) override;

 private:
  TcpConnection conn_;
};

class TcpCoordinatorEndpoint final : public CoordinatorEndpoint {
 public:
  explicit TcpCoordinatorEndpoint(const std::string& address);
  void local_trigger(const LocalTrigger& msg) override;

 private:
  TcpConnection conn_;
};

class TcpCollectorEndpoint final : public CollectorEndpoint {
 public:
  explicit TcpCollectorEndpoint(const std::string& address);
  void report_data(const ReportData& msg) override;

 private:
  TcpConnection conn_;
};

// Resolves breadcrumbs as "host:port" TCP addresses, one cached
// connection per address.
class TcpDirectory final : public AgentDirectory {
 public:
  std::shared_ptr<AgentEndpoint> resolve(const Breadcrumb& address) override;

 private:
  std::mutex mu_;
  std::map<Breadcrumb, std::shared_ptr<TcpAgentEndpoint>> cache_;
};

std::unique_ptr<TcpServer> serve_agent(AgentEndpoint& agent,
                                       uint16_t port = 0);
std::unique_ptr<TcpServer> serve_coordinator(CoordinatorEndpoint& coordinator,
                                             uint16_t port = 0);
std::unique_ptr<TcpServer> serve_collector(CollectorEndpoint& collector,
                                           uint16_t port = 0);

}  // namespace retrotrace
