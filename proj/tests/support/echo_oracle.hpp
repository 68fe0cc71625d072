// Copyright 2026 The rxngen Authors
// SPDX-License-Identifier: Apache-2.0

// In-process TCP oracle double speaking the line-JSON apply protocol.

#pragma once

#include <arpa/inet.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <atomic>
#include <json.hpp>
#include <string>
#include <thread>

namespace rxngen::testing {

class EchoOracle {
 public:
  enum class Mode { kEcho, kRefuse, kSilent, kGarbage };

  explicit EchoOracle(Mode mode = Mode::kEcho) : mode_(mode) {
    listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    int one = 1;
    ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    addr.sin_port = 0;
    ::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr);
    ::listen(listen_fd_, 4);
    socklen_t len = sizeof addr;
    ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
    port_ = ntohs(addr.sin_port);
    thread_ = std::thread([this] { serve(); });
  }

  ~EchoOracle() {
    stop_ = true;
    thread_.join();
    ::close(listen_fd_);
  }

  std::string endpoint() const { return "127.0.0.1:" + std::to_string(port_); }
  int requests() const { return requests_; }

 private:
  void serve() {
    while (!stop_) {
      pollfd p{listen_fd_, POLLIN, 0};
      if (::poll(&p, 1, 20) <= 0) continue;
      const int fd = ::accept(listen_fd_, nullptr, nullptr);
      if (fd < 0) continue;
      handle(fd);
      ::close(fd);
    }
  }

  void handle(int fd) {
    std::string buffer;
    char chunk[512];
    while (!stop_) {
      pollfd p{fd, POLLIN, 0};
      if (::poll(&p, 1, 20) <= 0) continue;
      const ssize_t n = ::recv(fd, chunk, sizeof chunk, 0);
      if (n <= 0) return;
      buffer.append(chunk, static_cast<std::size_t>(n));
      std::size_t nl;
      while ((nl = buffer.find('\n')) != std::string::npos) {
        const std::string line = buffer.substr(0, nl);
        buffer.erase(0, nl + 1);
        ++requests_;
        std::string reply = respond(line);
        if (reply.empty()) continue;
        reply += '\n';
        ::send(fd, reply.data(), reply.size(), MSG_NOSIGNAL);
      }
    }
  }

  std::string respond(const std::string& line) {
    switch (mode_) {
      case Mode::kSilent: return {};
      case Mode::kGarbage: return "this is not json";
      case Mode::kRefuse: return R"({"ok":false,"reason":"no match"})";
      case Mode::kEcho: break;
    }
    const auto req = nlohmann::json::parse(line);
    std::string joined = req.at("template").get<std::string>();
    for (const auto& r : req.at("reactants")) joined += "." + r.get<std::string>();
    return nlohmann::json{{"ok", true}, {"product", joined}}.dump();
  }

  Mode mode_;
  int listen_fd_ = -1;
  int port_ = 0;
  std::atomic<bool> stop_{false};
  std::atomic<int> requests_{0};
  std::thread thread_;
};

}  // namespace rxngen::testing
