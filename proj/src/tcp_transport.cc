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

#include "retrotrace/tcp_transport.h"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

namespace retrotrace {

namespace {

constexpr uint32_t kMaxMessageBytes = 256u << 20;

bool write_all(int fd, const uint8_t* data, std::size_t n) {
  while (n > 0) {
    ssize_t w = ::send(fd, data, n, MSG_NOSIGNAL);
    if (w < 0 && errno == EINTR) continue;
    if (w <= 0) return false;
    data += w;
    n -= static_cast<std::size_t>(w);
  }
  return true;
}

bool read_all(int fd, uint8_t* data, std::size_t n) {
  while (n > 0) {
    ssize_t r = ::recv(fd, data, n, 0);
    if (r < 0 && errno == EINTR) continue;
    if (r <= 0) return false;
    data += r;
    n -= static_cast<std::size_t>(r);
  }
  return true;
}

bool send_message(int fd, const Message& m) {
  auto framed = frame_message(m.type, m.body);
  return write_all(fd, framed.data(), framed.size());
}

// Returns false on EOF or a malformed envelope.
bool recv_message(int fd, Message& out) {
  uint8_t hdr[5];
  if (!read_all(fd, hdr, 4)) return false;
  uint32_t len = (uint32_t{hdr[0]} << 24) | (uint32_t{hdr[1]} << 16) |
                 (uint32_t{hdr[2]} << 8) | uint32_t{hdr[3]};
  if (len < 1 || len > kMaxMessageBytes) return false;
  if (!read_all(fd, hdr + 4, 1)) return false;
  out.type = static_cast<MessageType>(hdr[4]);
  out.body.resize(len - 1);
  return out.body.empty() || read_all(fd, out.body.data(), out.body.size());
}

Message error_message(const std::string& what) {
  Message m{MessageType::kError, {}};
  m.body.assign(what.begin(), what.end());
  return m;
}

}  // namespace

std::pair<std::string, uint16_t> parse_address(const std::string& address) {
  auto colon = address.rfind(':');
  if (colon == std::string::npos || colon + 1 == address.size()) {
    throw std::invalid_argument("address must be host:port: " + address);
  }
  unsigned long port = std::stoul(address.substr(colon + 1));
  if (port == 0 || port > 65535) {
    throw std::invalid_argument("bad port in " + address);
  }
  return {address.substr(0, colon), static_cast<uint16_t>(port)};
}

TcpServer::TcpServer(MessageHandler handler, uint16_t port)
    : handler_(std::move(handler)) {
  listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listen_fd_ < 0) throw TransportError("socket failed");
  int one = 1;
  ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = htons(port);
  if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) <
          0 ||
      ::listen(listen_fd_, 128) < 0) {
    ::close(listen_fd_);
    throw TransportError(std::string("bind/listen failed: ") +
                         std::strerror(errno));
  }
  socklen_t len = sizeof(addr);
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
  accept_thread_ = std::thread([this] { accept_loop(); });
}

TcpServer::~TcpServer() { stop(); }

void TcpServer::stop() {
  if (!running_.exchange(false)) return;
  ::shutdown(listen_fd_, SHUT_RDWR);
  ::close(listen_fd_);
  if (accept_thread_.joinable()) accept_thread_.join();
  std::vector<std::thread> workers;
  {
    std::lock_guard lock(mu_);
    for (int fd : client_fds_) ::shutdown(fd, SHUT_RDWR);
    workers.swap(workers_);
  }
  for (auto& t : workers) t.join();
}

void TcpServer::accept_loop() {
  while (running_) {
    int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) {
      if (errno == EINTR) continue;
      return;
    }
    int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
    std::lock_guard lock(mu_);
    if (!running_) {
      ::close(fd);
      return;
    }
    client_fds_.push_back(fd);
    workers_.emplace_back([this, fd] { serve(fd); });
  }
}

void TcpServer::serve(int fd) {
  Message req;
  while (running_ && recv_message(fd, req)) {
    Message resp;
    try {
      resp = handler_(req);
    } catch (const std::exception& e) {
      resp = error_message(e.what());
    }
    if (!send_message(fd, resp)) break;
  }
  std::lock_guard lock(mu_);
  std::erase(client_fds_, fd);
  ::close(fd);
}

TcpConnection::TcpConnection(std::string host, uint16_t port)
    : host_(std::move(host)), port_(port) {}

TcpConnection::~TcpConnection() {
  std::lock_guard lock(mu_);
  close_locked();
}

void TcpConnection::close_locked() {
  if (fd_ >= 0) ::close(fd_);
  fd_ = -1;
}

void TcpConnection::connect_locked() {
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  std::string service = std::to_string(port_);
  if (::getaddrinfo(host_.c_str(), service.c_str(), &hints, &res) != 0 ||
      res == nullptr) {
    throw TransportError("cannot resolve " + host_);
  }
  int fd = ::socket(res->ai_family, res->ai_socktype, res->ai_protocol);
  if (fd < 0) {
    ::freeaddrinfo(res);
    throw TransportError("socket failed");
  }
  int rc = ::connect(fd, res->ai_addr, res->ai_addrlen);
  ::freeaddrinfo(res);
  if (rc < 0) {
    ::close(fd);
    throw TransportError("connect to " + host_ + ":" + service + " failed");
  }
  int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
  fd_ = fd;
}

Message TcpConnection::call(const Message& request) {
  std::lock_guard lock(mu_);
  // A cached connection may have gone stale; dial once more before giving up.
  for (int attempt = 0; attempt < 2; ++attempt) {
    bool fresh = fd_ < 0;
    if (fresh) connect_locked();
    Message resp;
    if (send_message(fd_, request) && recv_message(fd_, resp)) {
      if (resp.type == MessageType::kError) {
        throw TransportError("remote error: " +
                             std::string(resp.body.begin(), resp.body.end()));
      }
      return resp;
    }
    close_locked();
    if (fresh) break;
  }
  throw TransportError("call to " + host_ + " failed");
}

namespace {

void expect_type(const Message& m, MessageType want) {
  if (m.type != want) throw TransportError("unexpected reply type");
}

}  // namespace

TcpAgentEndpoint::TcpAgentEndpoint(const std::string& address)
    : conn_(parse_address(address).first, parse_address(address).second) {}

BreadcrumbMap TcpAgentEndpoint::trigger_notify(const TriggerNotify& msg) {
  Message resp =
      conn_.call({MessageType::kTriggerNotify, encode_trigger_notify(msg)});
  expect_type(resp, MessageType::kTriggerNotifyAck);
  return decode_breadcrumb_map(resp.body);
}

BreadcrumbMap TcpAgentEndpoint::get_breadcrumbs(std::span<const TraceId> ids) {
  Message resp = conn_.call({MessageType::kGetBreadcrumbs, encode_trace_ids(ids)});
  expect_type(resp, MessageType::kBreadcrumbs);
  return decode_breadcrumb_map(resp.body);
}

TcpCoordinatorEndpoint::TcpCoordinatorEndpoint(const std::string& address)
    : conn_(parse_address(address).first, parse_address(address).second) {}

void TcpCoordinatorEndpoint::local_trigger(const LocalTrigger& msg) {
  expect_type(
      conn_.call({MessageType::kLocalTrigger, encode_local_trigger(msg)}),
      MessageType::kLocalTriggerAck);
}

TcpCollectorEndpoint::TcpCollectorEndpoint(const std::string& address)
    : conn_(parse_address(address).first, parse_address(address).second) {}

void TcpCollectorEndpoint::report_data(const ReportData& msg) {
  expect_type(conn_.call({MessageType::kReportData, encode_report_data(msg)}),
              MessageType::kReportAck);
}

std::shared_ptr<AgentEndpoint> TcpDirectory::resolve(
    const Breadcrumb& address) {
  std::lock_guard lock(mu_);
  auto it = cache_.find(address);
  if (it != cache_.end()) return it->second;
  try {
    auto ep = std::make_shared<TcpAgentEndpoint>(address);
    cache_.emplace(address, ep);
    return ep;
  } catch (const std::invalid_argument&) {
    return nullptr;
  }
}

std::unique_ptr<TcpServer> serve_agent(AgentEndpoint& agent, uint16_t port) {
  return std::make_unique<TcpServer>(
      [&agent](const Message& m) -> Message {
        switch (m.type) {
          case MessageType::kTriggerNotify:
            return {MessageType::kTriggerNotifyAck,
                    encode_breadcrumb_map(
                        agent.trigger_notify(decode_trigger_notify(m.body)))};
          case MessageType::kGetBreadcrumbs: {
            auto ids = decode_trace_ids(m.body);
            return {MessageType::kBreadcrumbs,
                    encode_breadcrumb_map(agent.get_breadcrumbs(ids))};
          }
          default:
            return error_message("agent: unsupported message");
        }
      },
      port);
}

std::unique_ptr<TcpServer> serve_coordinator(CoordinatorEndpoint& coordinator,
                                             uint16_t port) {
  return std::make_unique<TcpServer>(
      [&coordinator](const Message& m) -> Message {
        if (m.type != MessageType::kLocalTrigger) {
          return error_message("coordinator: unsupported message");
        }
        coordinator.local_trigger(decode_local_trigger(m.body));
        return {MessageType::kLocalTriggerAck, {}};
      },
      port);
}

std::unique_ptr<TcpServer> serve_collector(CollectorEndpoint& collector,
                                           uint16_t port) {
  return std::make_unique<TcpServer>(
      [&collector](const Message& m) -> Message {
        if (m.type != MessageType::kReportData) {
          return error_message("collector: unsupported message");
        }
        collector.report_data(decode_report_data(m.body));
        return {MessageType::kReportAck, {}};
      },
      port);
}

}  // namespace retrotrace
