// Copyright 2026 The rxngen Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <json.hpp>
#include <string>

namespace rxngen::cli {

/// Git blob hash ("blob <size>\0" + content, SHA-1, lowercase hex).
std::string git_blob_sha1(const std::filesystem::path& path);

std::string utc_timestamp();

/// Run record written next to a command's primary output.
struct Manifest {
  std::string command;
  nlohmann::json config = nlohmann::json::object();
  std::uint64_t seed = 0;
  nlohmann::json inputs = nlohmann::json::object();
  nlohmann::json outputs = nlohmann::json::object();
  nlohmann::json extra = nlohmann::json::object();
  std::string started_at = utc_timestamp();

  /// Writes "<primary>.manifest.json"; a "checkpoint" input or output gets
  /// its blob hash recorded.
  void write(const std::filesystem::path& primary) const;
};

std::filesystem::path manifest_path(const std::filesystem::path& primary);

void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace rxngen::cli
