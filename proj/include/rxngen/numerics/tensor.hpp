// Copyright 2026 The rxngen Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <initializer_list>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace rxngen::numerics {

class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

using Shape = std::vector<std::size_t>;

std::size_t shape_size(const Shape& shape);
std::string shape_string(const Shape& shape);

/// Dense row-major tensor of rank 0, 1 or 2 holding 64-bit reals.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape);
  Tensor(Shape shape, std::vector<double> data);

  static Tensor vector(std::vector<double> data);
  static Tensor matrix(std::size_t rows, std::size_t cols, std::vector<double> data);
  static Tensor scalar(double value);

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const { return data_.size(); }
  std::size_t rows() const { return shape_.empty() ? 1 : shape_[0]; }
  std::size_t cols() const { return shape_.size() == 2 ? shape_[1] : 1; }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }
  std::vector<double>& storage() { return data_; }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols() + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols() + c]; }

  bool all_finite() const;

 private:
  Shape shape_;
  std::vector<double> data_;
};

/// A named learnable tensor with its gradient accumulator.
///
/// The gradient buffer is allocated on first accumulation; an empty buffer
/// means no backward pass has reached this parameter yet.
class Parameter {
 public:
  Parameter(std::string name, Tensor value, std::size_t index)
      : name_(std::move(name)), value_(std::move(value)), index_(index) {}

  const std::string& name() const { return name_; }
  std::size_t index() const { return index_; }
  Tensor& value() { return value_; }
  const Tensor& value() const { return value_; }

  bool has_grad() const { return !grad_.empty(); }
  std::vector<double>& grad();  // allocates zeros on first use
  const std::vector<double>& grad() const { return grad_; }
  void zero_grad();

 private:
  std::string name_;
  Tensor value_;
  std::size_t index_;
  std::vector<double> grad_;
};

/// Owns every parameter of a model; insertion order is the stable order used
/// by optimizers and checkpoints. References returned by add() stay valid.
class ParameterStore {
 public:
  Parameter& add(std::string name, Tensor init);
  Parameter& at(std::string_view name);
  const Parameter& at(std::string_view name) const;
  Parameter* find(std::string_view name);

  std::size_t size() const { return params_.size(); }
  std::size_t element_count() const;
  Parameter& operator[](std::size_t i) { return *params_[i]; }
  const Parameter& operator[](std::size_t i) const { return *params_[i]; }

  void zero_grad();
  double grad_norm() const;
  /// Rescales all gradients so their global L2 norm is at most max_norm.
  /// Returns the norm before clipping.
  double clip_grad_norm(double max_norm);

 private:
  std::vector<std::unique_ptr<Parameter>> params_;
  std::unordered_map<std::string, std::size_t> by_name_;
};

}  // namespace rxngen::numerics
