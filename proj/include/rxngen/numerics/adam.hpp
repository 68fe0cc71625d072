// Copyright 2026 The rxngen Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

#include "rxngen/numerics/tensor.hpp"

namespace rxngen::numerics {

struct AdamOptions {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Bias-corrected Adam over every parameter of a store.
class Adam {
 public:
  Adam(const ParameterStore& store, AdamOptions options = {});

  /// Applies one update from the parameters' gradients, then zeroes them.
  /// Throws std::logic_error if any parameter has no gradient buffer.
  void step(ParameterStore& store);

  std::uint64_t steps() const { return t_; }
  const AdamOptions& options() const { return options_; }

 private:
  AdamOptions options_;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
  std::uint64_t t_ = 0;
};

}  // namespace rxngen::numerics
