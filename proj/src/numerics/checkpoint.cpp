// Copyright 2026 The rxngen Authors
// SPDX-License-Identifier: Apache-2.0

#include "rxngen/numerics/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <sstream>

#include "json.hpp"

namespace rxngen::numerics {

namespace {

void put_f32(std::string& out, double value) {
  const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(value));
  for (int s = 0; s < 32; s += 8) out.push_back(static_cast<char>((bits >> s) & 0xFFu));
}

double get_f32(const char* p) {
  std::uint32_t bits = 0;
  for (int i = 0; i < 4; ++i) bits |= static_cast<std::uint32_t>(static_cast<unsigned char>(p[i])) << (8 * i);
  return static_cast<double>(std::bit_cast<float>(bits));
}

}  // namespace

std::string encode_checkpoint(const TensorMap& tensors) {
  nlohmann::json index = nlohmann::json::object();
  std::string blob;
  for (const auto& [name, tensor] : tensors) {
    const std::size_t offset = blob.size();
    for (double v : tensor.data()) put_f32(blob, v);
    index[name] = {{"shape", tensor.shape()}, {"byte_offset", offset}, {"byte_len", blob.size() - offset}};
  }
  nlohmann::json header = {{"format_version", kCheckpointFormatVersion}, {"tensors", index}};
  return header.dump() + "\n" + blob;
}

TensorMap decode_checkpoint(const std::string& bytes) {
  const auto newline = bytes.find('\n');
  if (newline == std::string::npos) throw CheckpointError("checkpoint: missing header line");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(bytes.substr(0, newline));
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(std::string("checkpoint: malformed header: ") + e.what());
  }
  if (header.value("format_version", -1) != kCheckpointFormatVersion) {
    throw CheckpointError("checkpoint: unsupported format_version");
  }
  const std::size_t base = newline + 1;
  const std::size_t blob_size = bytes.size() - base;
  TensorMap out;
  for (const auto& [name, entry] : header.at("tensors").items()) {
    const auto shape = entry.at("shape").get<Shape>();
    const auto offset = entry.at("byte_offset").get<std::size_t>();
    const auto len = entry.at("byte_len").get<std::size_t>();
    if (len != 4 * shape_size(shape)) throw CheckpointError("checkpoint: byte_len mismatch for " + name);
    if (offset + len > blob_size) throw CheckpointError("checkpoint: truncated blob for " + name);
    std::vector<double> data(shape_size(shape));
    for (std::size_t i = 0; i < data.size(); ++i) data[i] = get_f32(bytes.data() + base + offset + 4 * i);
    out.emplace(name, Tensor(shape, std::move(data)));
  }
  return out;
}

void save_checkpoint(const std::filesystem::path& path, const ParameterStore& store) {
  TensorMap tensors;
  for (std::size_t i = 0; i < store.size(); ++i) tensors.emplace(store[i].name(), store[i].value());
  const std::string bytes = encode_checkpoint(tensors);
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw CheckpointError("cannot open " + path.string() + " for writing");
  os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!os) throw CheckpointError("write failed: " + path.string());
}

TensorMap read_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw CheckpointError("cannot open " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  return decode_checkpoint(bytes);
}

void load_checkpoint(const std::filesystem::path& path, ParameterStore& store) {
  TensorMap tensors = read_checkpoint(path);
  if (tensors.size() != store.size()) {
    throw CheckpointError("checkpoint has " + std::to_string(tensors.size()) + " tensors, model expects " +
                          std::to_string(store.size()));
  }
  for (std::size_t i = 0; i < store.size(); ++i) {
    auto it = tensors.find(store[i].name());
    if (it == tensors.end()) throw CheckpointError("checkpoint is missing tensor " + store[i].name());
    if (it->second.shape() != store[i].value().shape()) {
      throw CheckpointError("shape mismatch for " + store[i].name() + ": file " + shape_string(it->second.shape()) +
                            ", model " + shape_string(store[i].value().shape()));
    }
    store[i].value() = std::move(it->second);
  }
}

}  // namespace rxngen::numerics
