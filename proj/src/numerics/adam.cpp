// Copyright 2026 The rxngen Authors
// SPDX-License-Identifier: Apache-2.0

#include "rxngen/numerics/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace rxngen::numerics {

Adam::Adam(const ParameterStore& store, AdamOptions options) : options_(options) {
  m_.resize(store.size());
  v_.resize(store.size());
  for (std::size_t i = 0; i < store.size(); ++i) {
    m_[i].assign(store[i].value().size(), 0.0);
    v_[i].assign(store[i].value().size(), 0.0);
  }
}

void Adam::step(ParameterStore& store) {
  if (store.size() != m_.size()) throw std::logic_error("Adam: parameter store changed since construction");
  for (std::size_t i = 0; i < store.size(); ++i) {
    if (!store[i].has_grad()) throw std::logic_error("Adam: missing gradient for " + store[i].name());
  }
  ++t_;
  const auto& o = options_;
  const double c1 = 1.0 - std::pow(o.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(o.beta2, static_cast<double>(t_));
  for (std::size_t i = 0; i < store.size(); ++i) {
    auto w = store[i].value().data();
    auto& g = store[i].grad();
    auto& m = m_[i];
    auto& v = v_[i];
    for (std::size_t j = 0; j < w.size(); ++j) {
      m[j] = o.beta1 * m[j] + (1.0 - o.beta1) * g[j];
      v[j] = o.beta2 * v[j] + (1.0 - o.beta2) * g[j] * g[j];
      const double mhat = m[j] / c1;
      const double vhat = v[j] / c2;
      w[j] -= o.lr * mhat / (std::sqrt(vhat) + o.eps);
    }
    std::fill(g.begin(), g.end(), 0.0);
  }
}

}  // namespace rxngen::numerics
