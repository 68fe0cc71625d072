// Copyright 2026 The rxngen Authors
// SPDX-License-Identifier: Apache-2.0

// Checkpoint layout: one UTF-8 JSON header line
//   {"format_version":1,"tensors":{name:{"shape":[...],"byte_offset":o,"byte_len":n}}}
// followed by the raw little-endian float32 blobs. Offsets count from the
// first byte after the header's newline.

#pragma once

#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "rxngen/numerics/tensor.hpp"

namespace rxngen::numerics {

inline constexpr int kCheckpointFormatVersion = 1;

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Tensor values rounded to float32, keyed by name.
using TensorMap = std::map<std::string, Tensor>;

std::string encode_checkpoint(const TensorMap& tensors);
TensorMap decode_checkpoint(const std::string& bytes);

void save_checkpoint(const std::filesystem::path& path, const ParameterStore& store);
TensorMap read_checkpoint(const std::filesystem::path& path);
/// Loads every parameter of `store` from the file. Names and shapes must
/// match exactly; extra or missing tensors are an error.
void load_checkpoint(const std::filesystem::path& path, ParameterStore& store);

}  // namespace rxngen::numerics
