// Copyright 2026 The rxngen Authors
// SPDX-License-Identifier: Apache-2.0

// Client for an external reaction oracle speaking line-delimited JSON over
// TCP:
//   request  {"op":"apply","template":<string>,"reactants":[<string>...]}
//   response {"ok":true,"product":<string>} | {"ok":false,"reason":<string>}

#pragma once

#include <chrono>
#include <mutex>
#include <span>
#include <stdexcept>
#include <string>

#include "rxngen/trees/chemistry.hpp"

namespace rxngen::trees {

class OracleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class OracleTimeout : public OracleError {
 public:
  using OracleError::OracleError;
};

class OracleClient {
 public:
  /// endpoint is "host:port" or "tcp://host:port".
  explicit OracleClient(std::string endpoint, std::chrono::milliseconds timeout = std::chrono::seconds(10));
  ~OracleClient();
  OracleClient(const OracleClient&) = delete;
  OracleClient& operator=(const OracleClient&) = delete;

  /// One request/response round trip. ok:false maps to a precondition
  /// failure; transport problems throw OracleError / OracleTimeout.
  ApplyOutcome apply(const std::string& template_ref, std::span<const std::string> reactants);

  const std::string& endpoint() const { return endpoint_; }

 private:
  void connect_locked();
  void close_locked();
  void send_all(const std::string& data);
  std::string read_line();

  std::string endpoint_;
  std::string host_;
  std::string port_;
  std::chrono::milliseconds timeout_;
  int fd_ = -1;
  std::string buffer_;
  std::mutex mu_;
};

/// Backend that delegates every template application to an oracle. Template
/// references are "T<id>"; arity is still checked locally.
class OracleBackend final : public TemplateBackend {
 public:
  OracleBackend(OracleClient& client, const TemplateRegistry& registry) : client_(&client), registry_(&registry) {}
  ApplyOutcome apply(int template_id, std::span<const std::string> reactants) const override;

 private:
  OracleClient* client_;
  const TemplateRegistry* registry_;
};

}  // namespace rxngen::trees
