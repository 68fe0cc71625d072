// Copyright 2026 The rxngen Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "rxngen/numerics/tensor.hpp"

namespace rxngen::numerics {

class Tape;

/// Raised when a forward op produces NaN or Inf.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Handle to a value recorded on a Tape. Cheap to copy; becomes stale once
/// the tape is cleared (after backward or an explicit clear()).
class Var {
 public:
  Var() = default;

  bool valid() const;
  Tape& tape() const;
  std::int32_t id() const { return id_; }

  std::span<const double> value() const;
  std::size_t size() const;
  std::size_t rows() const;
  std::size_t cols() const;
  double item() const;
  Tensor tensor() const;

 private:
  friend class Tape;
  Var(Tape* tape, std::int32_t id, std::uint64_t generation) : tape_(tape), id_(id), generation_(generation) {}

  Tape* tape_ = nullptr;
  std::int32_t id_ = -1;
  std::uint64_t generation_ = 0;
};

/// Per-parameter gradient accumulators kept outside the parameters, so a
/// frozen model can be differentiated from several threads at once.
class GradientBuffer {
 public:
  explicit GradientBuffer(const ParameterStore& store);
  std::vector<double>& operator[](std::size_t param_index) { return grads_[param_index]; }
  const std::vector<double>& operator[](std::size_t param_index) const { return grads_[param_index]; }
  std::size_t size() const { return grads_.size(); }
  void zero();
  /// Adds this buffer into the parameters' own gradients.
  void accumulate_into(ParameterStore& store) const;

 private:
  std::vector<std::vector<double>> grads_;
};

/// Define-by-run reverse-mode tape. Every primitive appends one node whose
/// inputs precede it, so the node vector is already in topological order.
class Tape {
 public:
  enum class Op : std::uint8_t {
    kConstant,
    kParameter,
    kLinear,
    kMatTVec,
    kAdd,
    kSub,
    kMul,
    kScale,
    kOneMinus,
    kSum,
    kSigmoid,
    kTanh,
    kRelu,
    kExp,
    kConcat,
    kStackRows,
    kRow,
    kDot,
    kReduceSum,
    kSoftmax,
    kCrossEntropy,
    kBceLogits,
    kKlDiag,
  };

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(const Tensor& t);
  Var constant(std::vector<double> values);
  Var zeros(std::size_t n);
  /// Leaf for a parameter; repeated calls return the same node.
  Var param(Parameter& p);

  Var linear(Var w, Var b, Var x);  // b may be default-constructed (no bias)
  Var mat_t_vec(Var m, Var x);
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);
  Var scale(Var a, double k);
  Var one_minus(Var a);
  Var sum(std::span<const Var> xs);
  Var sigmoid(Var a);
  Var tanh(Var a);
  Var relu(Var a);
  Var exp(Var a);
  Var concat(std::span<const Var> xs);
  Var stack_rows(std::span<const Var> xs);
  Var row(Var m, std::size_t index);
  Var dot(Var a, Var b);
  Var reduce_sum(Var a);
  Var softmax(Var a);
  Var cross_entropy(Var logits, std::size_t target);
  Var bce_with_logits(Var logit, bool target);
  Var kl_diag_gaussian(Var mu, Var logvar);

  /// Accumulates d(loss)/d(param) into each reached Parameter::grad(), then
  /// clears the tape. A loss that depends on no parameter is a no-op.
  void backward(Var loss);
  /// Same, but accumulates into an external buffer instead of the parameters.
  void backward(Var loss, GradientBuffer& sink);

  void clear();
  std::size_t node_count() const { return nodes_.size(); }

 private:
  friend class Var;

  struct Node {
    Op op = Op::kConstant;
    bool needs_grad = false;
    std::int32_t a = -1;
    std::int32_t b = -1;
    std::int32_t c = -1;
    std::uint32_t rows = 0;
    std::uint32_t cols = 1;
    double k = 0.0;
    std::vector<std::int32_t> args;
    std::vector<double> value;
    std::vector<double> aux;
    Parameter* param = nullptr;
  };

  const double* values_of(std::int32_t id) const;
  std::size_t size_of(std::int32_t id) const { return std::size_t{nodes_[id].rows} * nodes_[id].cols; }
  std::int32_t check(Var v) const;
  Var push(Node node);
  void run_backward(Var loss, GradientBuffer* sink);

  std::vector<Node> nodes_;
  std::unordered_map<const Parameter*, std::int32_t> param_nodes_;
  std::uint64_t generation_ = 1;
};

}  // namespace rxngen::numerics
