// Copyright 2026 The rxngen Authors
// SPDX-License-Identifier: Apache-2.0

// Free-function spelling of the tape primitives. Every operand must live on
// the same tape; the result is recorded there.

#pragma once

#include <initializer_list>
#include <vector>

#include "rxngen/numerics/tape.hpp"

namespace rxngen::numerics {

inline Var linear(Var w, Var b, Var x) { return w.tape().linear(w, b, x); }
inline Var matvec(Var w, Var x) { return w.tape().linear(w, Var{}, x); }
inline Var mat_t_vec(Var m, Var x) { return m.tape().mat_t_vec(m, x); }
inline Var add(Var a, Var b) { return a.tape().add(a, b); }
inline Var sub(Var a, Var b) { return a.tape().sub(a, b); }
inline Var mul(Var a, Var b) { return a.tape().mul(a, b); }
inline Var scale(Var a, double k) { return a.tape().scale(a, k); }
inline Var one_minus(Var a) { return a.tape().one_minus(a); }
inline Var sigmoid(Var a) { return a.tape().sigmoid(a); }
inline Var tanh(Var a) { return a.tape().tanh(a); }
inline Var relu(Var a) { return a.tape().relu(a); }
inline Var exp(Var a) { return a.tape().exp(a); }
inline Var dot(Var a, Var b) { return a.tape().dot(a, b); }
inline Var reduce_sum(Var a) { return a.tape().reduce_sum(a); }
inline Var softmax(Var a) { return a.tape().softmax(a); }
inline Var cross_entropy(Var logits, std::size_t target) { return logits.tape().cross_entropy(logits, target); }
inline Var bce_with_logits(Var logit, bool target) { return logit.tape().bce_with_logits(logit, target); }
inline Var kl_diag_gaussian(Var mu, Var logvar) { return mu.tape().kl_diag_gaussian(mu, logvar); }
inline Var row(Var m, std::size_t index) { return m.tape().row(m, index); }

inline Var sum(const std::vector<Var>& xs) { return xs.at(0).tape().sum(xs); }
inline Var concat(std::initializer_list<Var> xs) {
  std::vector<Var> v(xs);
  return v.at(0).tape().concat(v);
}
inline Var concat(const std::vector<Var>& xs) { return xs.at(0).tape().concat(xs); }
inline Var stack_rows(const std::vector<Var>& xs) { return xs.at(0).tape().stack_rows(xs); }

/// Sums xs in a canonical order (lexicographic on their current values), so
/// the bits of the result do not depend on the order of the input list.
/// Returns a zero vector of length `size` when xs is empty.
Var canonical_sum(Tape& tape, std::vector<Var> xs, std::size_t size);

}  // namespace rxngen::numerics
