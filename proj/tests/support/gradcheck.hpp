// Copyright 2026 The rxngen Authors
// SPDX-License-Identifier: Apache-2.0

// Central finite-difference gradient checks against the tape.

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>

#include "rxngen/numerics/tape.hpp"

namespace rxngen::testing {

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::string worst_param;
};

/// For every parameter tensor p, compares the tape gradient g with
/// fourth-order central differences n and reports ||g - n|| / max(||g||, ||n||, floor).
/// The floor is raised to 1e4 times the stencil's rounding noise, so a
/// gradient that is zero on both sides compares at the noise level. The loss
/// function must be deterministic (re-seed any rng inside it).
inline GradCheckResult check_gradients(numerics::ParameterStore& store,
                                       const std::function<numerics::Var(numerics::Tape&)>& loss_fn,
                                       double step = 2e-4, double floor = 1e-7) {
  store.zero_grad();
  double f0 = 0.0;
  {
    numerics::Tape tape;
    const numerics::Var loss = loss_fn(tape);
    f0 = loss.item();
    tape.backward(loss);
  }
  const double eps = std::numeric_limits<double>::epsilon();
  auto eval = [&] {
    numerics::Tape tape;
    return loss_fn(tape).item();
  };

  GradCheckResult result;
  for (std::size_t k = 0; k < store.size(); ++k) {
    numerics::Parameter& p = store[k];
    auto& value = p.value().storage();
    const std::vector<double> analytic = p.has_grad() ? p.grad() : std::vector<double>(value.size(), 0.0);
    double diff2 = 0.0, a2 = 0.0, n2 = 0.0;
    for (std::size_t i = 0; i < value.size(); ++i) {
      const double saved = value[i];
      auto at = [&](double offset) {
        value[i] = saved + offset;
        return eval();
      };
      const double numeric = (at(-2 * step) - 8 * at(-step) + 8 * at(step) - at(2 * step)) / (12.0 * step);
      value[i] = saved;
      diff2 += (analytic[i] - numeric) * (analytic[i] - numeric);
      a2 += analytic[i] * analytic[i];
      n2 += numeric * numeric;
    }
    const double noise = 1.5 * eps * std::max(std::abs(f0), 1.0) / step * std::sqrt(static_cast<double>(value.size()));
    const double rel = std::sqrt(diff2) / std::max({std::sqrt(a2), std::sqrt(n2), floor, 1e4 * noise});
    if (rel > result.max_rel_error || result.worst_param.empty()) {
      result.max_rel_error = std::max(result.max_rel_error, rel);
      if (rel >= result.max_rel_error) result.worst_param = p.name();
    }
  }
  store.zero_grad();
  return result;
}

}  // namespace rxngen::testing
