// Copyright 2026 The rxngen Authors
// SPDX-License-Identifier: Apache-2.0

#include "rxngen/trees/oracle.hpp"

#include <fcntl.h>
#include <netdb.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include "json.hpp"

namespace rxngen::trees {

namespace {

using Clock = std::chrono::steady_clock;

int remaining_ms(Clock::time_point deadline) {
  const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now()).count();
  return left > 0 ? static_cast<int>(left) : 0;
}

}  // namespace

OracleClient::OracleClient(std::string endpoint, std::chrono::milliseconds timeout)
    : endpoint_(std::move(endpoint)), timeout_(timeout) {
  std::string rest = endpoint_;
  if (rest.rfind("tcp://", 0) == 0) rest = rest.substr(6);
  const auto colon = rest.rfind(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 == rest.size()) {
    throw OracleError("oracle endpoint must be host:port, got '" + endpoint_ + "'");
  }
  host_ = rest.substr(0, colon);
  port_ = rest.substr(colon + 1);
}

OracleClient::~OracleClient() { close_locked(); }

void OracleClient::close_locked() {
  if (fd_ >= 0) ::close(fd_);
  fd_ = -1;
  buffer_.clear();
}

void OracleClient::connect_locked() {
  if (fd_ >= 0) return;
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  if (int rc = ::getaddrinfo(host_.c_str(), port_.c_str(), &hints, &res); rc != 0) {
    throw OracleError("oracle: cannot resolve " + endpoint_ + ": " + ::gai_strerror(rc));
  }
  const auto deadline = Clock::now() + timeout_;
  std::string last_error = "no addresses";
  for (addrinfo* ai = res; ai; ai = ai->ai_next) {
    int fd = ::socket(ai->ai_family, ai->ai_socktype | SOCK_CLOEXEC, ai->ai_protocol);
    if (fd < 0) continue;
    ::fcntl(fd, F_SETFL, ::fcntl(fd, F_GETFL) | O_NONBLOCK);
    int rc = ::connect(fd, ai->ai_addr, ai->ai_addrlen);
    if (rc != 0 && errno == EINPROGRESS) {
      pollfd p{fd, POLLOUT, 0};
      rc = ::poll(&p, 1, remaining_ms(deadline));
      if (rc == 0) {
        ::close(fd);
        ::freeaddrinfo(res);
        throw OracleTimeout("oracle: connect to " + endpoint_ + " timed out");
      }
      int err = 0;
      socklen_t len = sizeof(err);
      ::getsockopt(fd, SOL_SOCKET, SO_ERROR, &err, &len);
      rc = (rc > 0 && err == 0) ? 0 : -1;
      if (err) errno = err;
    }
    if (rc == 0) {
      fd_ = fd;
      ::freeaddrinfo(res);
      return;
    }
    last_error = std::strerror(errno);
    ::close(fd);
  }
  ::freeaddrinfo(res);
  throw OracleError("oracle: cannot connect to " + endpoint_ + ": " + last_error);
}

void OracleClient::send_all(const std::string& data) {
  const auto deadline = Clock::now() + timeout_;
  std::size_t sent = 0;
  while (sent < data.size()) {
    pollfd p{fd_, POLLOUT, 0};
    const int rc = ::poll(&p, 1, remaining_ms(deadline));
    if (rc == 0) throw OracleTimeout("oracle: send timed out");
    if (rc < 0) throw OracleError(std::string("oracle: poll failed: ") + std::strerror(errno));
    const ssize_t n = ::send(fd_, data.data() + sent, data.size() - sent, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EAGAIN || errno == EINTR) continue;
      throw OracleError(std::string("oracle: send failed: ") + std::strerror(errno));
    }
    sent += static_cast<std::size_t>(n);
  }
}

std::string OracleClient::read_line() {
  const auto deadline = Clock::now() + timeout_;
  for (;;) {
    if (auto nl = buffer_.find('\n'); nl != std::string::npos) {
      std::string line = buffer_.substr(0, nl);
      buffer_.erase(0, nl + 1);
      return line;
    }
    pollfd p{fd_, POLLIN, 0};
    const int rc = ::poll(&p, 1, remaining_ms(deadline));
    if (rc == 0) throw OracleTimeout("oracle: no response within timeout");
    if (rc < 0) throw OracleError(std::string("oracle: poll failed: ") + std::strerror(errno));
    char chunk[4096];
    const ssize_t n = ::recv(fd_, chunk, sizeof(chunk), 0);
    if (n == 0) throw OracleError("oracle: connection closed before a response line");
    if (n < 0) {
      if (errno == EAGAIN || errno == EINTR) continue;
      throw OracleError(std::string("oracle: recv failed: ") + std::strerror(errno));
    }
    buffer_.append(chunk, static_cast<std::size_t>(n));
  }
}

ApplyOutcome OracleClient::apply(const std::string& template_ref, std::span<const std::string> reactants) {
  std::lock_guard lock(mu_);
  nlohmann::json request = {{"op", "apply"},
                            {"template", template_ref},
                            {"reactants", std::vector<std::string>(reactants.begin(), reactants.end())}};
  std::string line;
  try {
    connect_locked();
    send_all(request.dump() + "\n");
    line = read_line();
  } catch (...) {
    close_locked();
    throw;
  }
  nlohmann::json response;
  try {
    response = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception&) {
    throw OracleError("oracle: malformed response: " + line);
  }
  if (!response.is_object() || !response.contains("ok") || !response["ok"].is_boolean()) {
    throw OracleError("oracle: response lacks boolean 'ok': " + line);
  }
  if (response["ok"].get<bool>()) {
    if (!response.contains("product") || !response["product"].is_string()) {
      throw OracleError("oracle: ok response without product string: " + line);
    }
    return ApplyOutcome::success(response["product"].get<std::string>());
  }
  std::string reason = response.contains("reason") && response["reason"].is_string()
                           ? response["reason"].get<std::string>()
                           : std::string("oracle rejected the reaction");
  return ApplyOutcome::precondition_failed(-1, std::move(reason));
}

ApplyOutcome OracleBackend::apply(int template_id, std::span<const std::string> reactants) const {
  const Template& t = registry_->at(template_id);
  if (static_cast<int>(reactants.size()) != t.arity) {
    throw ArityMismatch("template " + std::to_string(template_id) + " expects " + std::to_string(t.arity) +
                        " reactants, got " + std::to_string(reactants.size()));
  }
  return client_->apply("T" + std::to_string(template_id), reactants);
}

}  // namespace rxngen::trees
