// Copyright 2026 The rxngen Authors
// SPDX-License-Identifier: Apache-2.0

#include "rxngen/numerics/ops.hpp"

#include <algorithm>

namespace rxngen::numerics {

Var canonical_sum(Tape& tape, std::vector<Var> xs, std::size_t size) {
  if (xs.empty()) return tape.zeros(size);
  if (xs.size() == 1) return xs.front();
  std::stable_sort(xs.begin(), xs.end(), [](const Var& a, const Var& b) {
    const auto va = a.value();
    const auto vb = b.value();
    return std::lexicographical_compare(va.begin(), va.end(), vb.begin(), vb.end());
  });
  return tape.sum(xs);
}

}  // namespace rxngen::numerics
