// Copyright 2026 The rxngen Authors
// SPDX-License-Identifier: Apache-2.0

#include "rxngen/numerics/tape.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace rxngen::numerics {

namespace {

const char* op_name(Tape::Op op) {
  switch (op) {
    case Tape::Op::kConstant: return "constant";
    case Tape::Op::kParameter: return "parameter";
    case Tape::Op::kLinear: return "linear";
    case Tape::Op::kMatTVec: return "mat_t_vec";
    case Tape::Op::kAdd: return "add";
    case Tape::Op::kSub: return "sub";
    case Tape::Op::kMul: return "mul";
    case Tape::Op::kScale: return "scale";
    case Tape::Op::kOneMinus: return "one_minus";
    case Tape::Op::kSum: return "sum";
    case Tape::Op::kSigmoid: return "sigmoid";
    case Tape::Op::kTanh: return "tanh";
    case Tape::Op::kRelu: return "relu";
    case Tape::Op::kExp: return "exp";
    case Tape::Op::kConcat: return "concat";
    case Tape::Op::kStackRows: return "stack_rows";
    case Tape::Op::kRow: return "row";
    case Tape::Op::kDot: return "dot";
    case Tape::Op::kReduceSum: return "reduce_sum";
    case Tape::Op::kSoftmax: return "softmax";
    case Tape::Op::kCrossEntropy: return "cross_entropy";
    case Tape::Op::kBceLogits: return "bce_with_logits";
    case Tape::Op::kKlDiag: return "kl_diag_gaussian";
  }
  return "?";
}

double stable_sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

// ---------------------------------------------------------------------------
// Var

bool Var::valid() const { return tape_ != nullptr && tape_->generation_ == generation_; }

Tape& Var::tape() const {
  if (!valid()) throw std::logic_error("stale or empty Var");
  return *tape_;
}

std::span<const double> Var::value() const {
  const Tape& t = tape();
  return {t.values_of(id_), t.size_of(id_)};
}

std::size_t Var::size() const { return tape().size_of(id_); }
std::size_t Var::rows() const { return tape().nodes_[id_].rows; }
std::size_t Var::cols() const { return tape().nodes_[id_].cols; }

double Var::item() const {
  if (size() != 1) throw ShapeError("item() on a non-scalar value");
  return value()[0];
}

Tensor Var::tensor() const {
  auto v = value();
  std::vector<double> data(v.begin(), v.end());
  if (cols() == 1) return Tensor::vector(std::move(data));
  return Tensor::matrix(rows(), cols(), std::move(data));
}

// ---------------------------------------------------------------------------
// GradientBuffer

GradientBuffer::GradientBuffer(const ParameterStore& store) : grads_(store.size()) {
  for (std::size_t i = 0; i < store.size(); ++i) grads_[i].assign(store[i].value().size(), 0.0);
}

void GradientBuffer::zero() {
  for (auto& g : grads_) std::fill(g.begin(), g.end(), 0.0);
}

void GradientBuffer::accumulate_into(ParameterStore& store) const {
  for (std::size_t i = 0; i < grads_.size(); ++i) {
    auto& dst = store[i].grad();
    for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += grads_[i][j];
  }
}

// ---------------------------------------------------------------------------
// Tape: bookkeeping

const double* Tape::values_of(std::int32_t id) const {
  const Node& n = nodes_[id];
  return n.param ? n.param->value().data().data() : n.value.data();
}

std::int32_t Tape::check(Var v) const {
  if (v.tape_ != this || v.generation_ != generation_) {
    throw std::logic_error("Var does not belong to the active tape");
  }
  return v.id_;
}

Var Tape::push(Node node) {
  if (node.op != Op::kParameter) {
    for (double x : node.value) {
      if (!std::isfinite(x)) throw NumericError(std::string("non-finite value produced by ") + op_name(node.op));
    }
  }
  nodes_.push_back(std::move(node));
  return Var(this, static_cast<std::int32_t>(nodes_.size() - 1), generation_);
}

void Tape::clear() {
  nodes_.clear();
  param_nodes_.clear();
  ++generation_;
}

Var Tape::constant(const Tensor& t) {
  Node n;
  n.op = Op::kConstant;
  n.rows = static_cast<std::uint32_t>(t.rows());
  n.cols = static_cast<std::uint32_t>(t.cols());
  n.value.assign(t.data().begin(), t.data().end());
  return push(std::move(n));
}

Var Tape::constant(std::vector<double> values) {
  Node n;
  n.op = Op::kConstant;
  n.rows = static_cast<std::uint32_t>(values.size());
  n.value = std::move(values);
  return push(std::move(n));
}

Var Tape::zeros(std::size_t size) { return constant(std::vector<double>(size, 0.0)); }

Var Tape::param(Parameter& p) {
  if (auto it = param_nodes_.find(&p); it != param_nodes_.end()) return Var(this, it->second, generation_);
  Node n;
  n.op = Op::kParameter;
  n.needs_grad = true;
  n.param = &p;
  n.rows = static_cast<std::uint32_t>(p.value().rows());
  n.cols = static_cast<std::uint32_t>(p.value().cols());
  Var v = push(std::move(n));
  param_nodes_.emplace(&p, v.id_);
  return v;
}

// ---------------------------------------------------------------------------
// Tape: forward primitives

Var Tape::linear(Var w, Var b, Var x) {
  const auto wi = check(w), xi = check(x);
  const std::int32_t bi = b.tape_ ? check(b) : -1;
  const std::size_t m = nodes_[wi].rows, n = nodes_[wi].cols;
  if (size_of(xi) != n) {
    throw ShapeError("linear: weight is " + std::to_string(m) + "x" + std::to_string(n) + " but input has " +
                     std::to_string(size_of(xi)) + " elements");
  }
  if (bi >= 0 && size_of(bi) != m) throw ShapeError("linear: bias size does not match weight rows");
  Node node;
  node.op = Op::kLinear;
  node.a = wi;
  node.b = xi;
  node.c = bi;
  node.rows = static_cast<std::uint32_t>(m);
  node.needs_grad = nodes_[wi].needs_grad || nodes_[xi].needs_grad || (bi >= 0 && nodes_[bi].needs_grad);
  node.value.resize(m);
  const double* W = values_of(wi);
  const double* X = values_of(xi);
  const double* B = bi >= 0 ? values_of(bi) : nullptr;
  for (std::size_t r = 0; r < m; ++r) {
    const double* row = W + r * n;
    double acc = 0.0;
    for (std::size_t c = 0; c < n; ++c) acc += row[c] * X[c];
    node.value[r] = B ? acc + B[r] : acc;
  }
  return push(std::move(node));
}

Var Tape::mat_t_vec(Var m, Var x) {
  const auto mi = check(m), xi = check(x);
  const std::size_t rows = nodes_[mi].rows, cols = nodes_[mi].cols;
  if (size_of(xi) != rows) throw ShapeError("mat_t_vec: row count does not match input size");
  Node node;
  node.op = Op::kMatTVec;
  node.a = mi;
  node.b = xi;
  node.rows = static_cast<std::uint32_t>(cols);
  node.needs_grad = nodes_[mi].needs_grad || nodes_[xi].needs_grad;
  node.value.assign(cols, 0.0);
  const double* M = values_of(mi);
  const double* X = values_of(xi);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) node.value[c] += M[r * cols + c] * X[r];
  }
  return push(std::move(node));
}

namespace {
template <class F>
void binary_values(std::size_t n, const double* a, const double* b, std::vector<double>& out, F f) {
  out.resize(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = f(a[i], b[i]);
}
}  // namespace

#define RXNGEN_BINARY_OP(NAME, OPKIND, EXPR)                                              \
  Var Tape::NAME(Var a, Var b) {                                                          \
    const auto ai = check(a), bi = check(b);                                              \
    if (size_of(ai) != size_of(bi)) throw ShapeError(#NAME ": operand sizes differ");     \
    Node node;                                                                            \
    node.op = Op::OPKIND;                                                                 \
    node.a = ai;                                                                          \
    node.b = bi;                                                                          \
    node.rows = nodes_[ai].rows;                                                          \
    node.cols = nodes_[ai].cols;                                                          \
    node.needs_grad = nodes_[ai].needs_grad || nodes_[bi].needs_grad;                     \
    binary_values(size_of(ai), values_of(ai), values_of(bi), node.value,                  \
                  [](double x, double y) { return EXPR; });                               \
    return push(std::move(node));                                                         \
  }

RXNGEN_BINARY_OP(add, kAdd, x + y)
RXNGEN_BINARY_OP(sub, kSub, x - y)
RXNGEN_BINARY_OP(mul, kMul, x* y)
#undef RXNGEN_BINARY_OP

namespace {
template <class F>
void unary_values(std::size_t n, const double* a, std::vector<double>& out, F f) {
  out.resize(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = f(a[i]);
}
}  // namespace

#define RXNGEN_UNARY_OP(NAME, OPKIND, EXPR)                                            \
  Var Tape::NAME(Var a) {                                                              \
    const auto ai = check(a);                                                          \
    Node node;                                                                         \
    node.op = Op::OPKIND;                                                              \
    node.a = ai;                                                                       \
    node.rows = nodes_[ai].rows;                                                       \
    node.cols = nodes_[ai].cols;                                                       \
    node.needs_grad = nodes_[ai].needs_grad;                                           \
    unary_values(size_of(ai), values_of(ai), node.value, [](double x) { return EXPR; }); \
    return push(std::move(node));                                                      \
  }

RXNGEN_UNARY_OP(one_minus, kOneMinus, 1.0 - x)
RXNGEN_UNARY_OP(sigmoid, kSigmoid, stable_sigmoid(x))
RXNGEN_UNARY_OP(tanh, kTanh, std::tanh(x))
RXNGEN_UNARY_OP(relu, kRelu, x > 0.0 ? x : 0.0)
RXNGEN_UNARY_OP(exp, kExp, std::exp(x))
#undef RXNGEN_UNARY_OP

Var Tape::scale(Var a, double k) {
  const auto ai = check(a);
  Node node;
  node.op = Op::kScale;
  node.a = ai;
  node.k = k;
  node.rows = nodes_[ai].rows;
  node.cols = nodes_[ai].cols;
  node.needs_grad = nodes_[ai].needs_grad;
  unary_values(size_of(ai), values_of(ai), node.value, [k](double x) { return k * x; });
  return push(std::move(node));
}

Var Tape::sum(std::span<const Var> xs) {
  if (xs.empty()) throw ShapeError("sum of an empty list");
  Node node;
  node.op = Op::kSum;
  const auto first = check(xs[0]);
  const std::size_t n = size_of(first);
  node.rows = nodes_[first].rows;
  node.cols = nodes_[first].cols;
  node.value.assign(n, 0.0);
  for (const Var& x : xs) {
    const auto xi = check(x);
    if (size_of(xi) != n) throw ShapeError("sum: operand sizes differ");
    node.args.push_back(xi);
    node.needs_grad = node.needs_grad || nodes_[xi].needs_grad;
    const double* v = values_of(xi);
    for (std::size_t i = 0; i < n; ++i) node.value[i] += v[i];
  }
  return push(std::move(node));
}

Var Tape::concat(std::span<const Var> xs) {
  Node node;
  node.op = Op::kConcat;
  for (const Var& x : xs) {
    const auto xi = check(x);
    node.args.push_back(xi);
    node.needs_grad = node.needs_grad || nodes_[xi].needs_grad;
    const double* v = values_of(xi);
    node.value.insert(node.value.end(), v, v + size_of(xi));
  }
  node.rows = static_cast<std::uint32_t>(node.value.size());
  return push(std::move(node));
}

Var Tape::stack_rows(std::span<const Var> xs) {
  if (xs.empty()) throw ShapeError("stack_rows of an empty list");
  Node node;
  node.op = Op::kStackRows;
  const std::size_t width = size_of(check(xs[0]));
  for (const Var& x : xs) {
    const auto xi = check(x);
    if (size_of(xi) != width) throw ShapeError("stack_rows: rows have different widths");
    node.args.push_back(xi);
    node.needs_grad = node.needs_grad || nodes_[xi].needs_grad;
    const double* v = values_of(xi);
    node.value.insert(node.value.end(), v, v + width);
  }
  node.rows = static_cast<std::uint32_t>(xs.size());
  node.cols = static_cast<std::uint32_t>(width);
  return push(std::move(node));
}

Var Tape::row(Var m, std::size_t index) {
  const auto mi = check(m);
  const std::size_t rows = nodes_[mi].rows, cols = nodes_[mi].cols;
  if (index >= rows) {
    throw ShapeError("row index " + std::to_string(index) + " out of range for " + std::to_string(rows) + " rows");
  }
  Node node;
  node.op = Op::kRow;
  node.a = mi;
  node.c = static_cast<std::int32_t>(index);
  node.rows = static_cast<std::uint32_t>(cols);
  node.needs_grad = nodes_[mi].needs_grad;
  const double* v = values_of(mi) + index * cols;
  node.value.assign(v, v + cols);
  return push(std::move(node));
}

Var Tape::dot(Var a, Var b) {
  const auto ai = check(a), bi = check(b);
  if (size_of(ai) != size_of(bi)) throw ShapeError("dot: operand sizes differ");
  Node node;
  node.op = Op::kDot;
  node.a = ai;
  node.b = bi;
  node.rows = 1;
  node.needs_grad = nodes_[ai].needs_grad || nodes_[bi].needs_grad;
  const double* x = values_of(ai);
  const double* y = values_of(bi);
  double acc = 0.0;
  for (std::size_t i = 0; i < size_of(ai); ++i) acc += x[i] * y[i];
  node.value = {acc};
  return push(std::move(node));
}

Var Tape::reduce_sum(Var a) {
  const auto ai = check(a);
  Node node;
  node.op = Op::kReduceSum;
  node.a = ai;
  node.rows = 1;
  node.needs_grad = nodes_[ai].needs_grad;
  double acc = 0.0;
  const double* x = values_of(ai);
  for (std::size_t i = 0; i < size_of(ai); ++i) acc += x[i];
  node.value = {acc};
  return push(std::move(node));
}

namespace {
// Writes softmax(x) into out and returns log-sum-exp.
double softmax_into(const double* x, std::size_t n, std::vector<double>& out) {
  const double mx = *std::max_element(x, x + n);
  out.resize(n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = std::exp(x[i] - mx);
    total += out[i];
  }
  for (double& v : out) v /= total;
  return mx + std::log(total);
}
}  // namespace

Var Tape::softmax(Var a) {
  const auto ai = check(a);
  if (size_of(ai) == 0) throw ShapeError("softmax of an empty vector");
  Node node;
  node.op = Op::kSoftmax;
  node.a = ai;
  node.rows = static_cast<std::uint32_t>(size_of(ai));
  node.needs_grad = nodes_[ai].needs_grad;
  softmax_into(values_of(ai), size_of(ai), node.value);
  return push(std::move(node));
}

Var Tape::cross_entropy(Var logits, std::size_t target) {
  const auto li = check(logits);
  const std::size_t k = size_of(li);
  if (target >= k) {
    throw std::out_of_range("cross_entropy: target " + std::to_string(target) + " out of range for " +
                            std::to_string(k) + " classes");
  }
  Node node;
  node.op = Op::kCrossEntropy;
  node.a = li;
  node.c = static_cast<std::int32_t>(target);
  node.rows = 1;
  node.needs_grad = nodes_[li].needs_grad;
  const double lse = softmax_into(values_of(li), k, node.aux);
  node.value = {lse - values_of(li)[target]};
  return push(std::move(node));
}

Var Tape::bce_with_logits(Var logit, bool target) {
  const auto li = check(logit);
  if (size_of(li) != 1) throw ShapeError("bce_with_logits expects a scalar logit");
  Node node;
  node.op = Op::kBceLogits;
  node.a = li;
  node.k = target ? 1.0 : 0.0;
  node.rows = 1;
  node.needs_grad = nodes_[li].needs_grad;
  const double x = values_of(li)[0];
  node.value = {std::max(x, 0.0) - x * node.k + std::log1p(std::exp(-std::abs(x)))};
  return push(std::move(node));
}

Var Tape::kl_diag_gaussian(Var mu, Var logvar) {
  const auto mi = check(mu), li = check(logvar);
  if (size_of(mi) != size_of(li)) throw ShapeError("kl_diag_gaussian: mu and logvar sizes differ");
  Node node;
  node.op = Op::kKlDiag;
  node.a = mi;
  node.b = li;
  node.rows = 1;
  node.needs_grad = nodes_[mi].needs_grad || nodes_[li].needs_grad;
  const double* m = values_of(mi);
  const double* l = values_of(li);
  double acc = 0.0;
  for (std::size_t i = 0; i < size_of(mi); ++i) acc += std::exp(l[i]) + m[i] * m[i] - 1.0 - l[i];
  node.value = {0.5 * acc};
  return push(std::move(node));
}

// ---------------------------------------------------------------------------
// Tape: reverse sweep

void Tape::backward(Var loss) { run_backward(loss, nullptr); }

void Tape::backward(Var loss, GradientBuffer& sink) { run_backward(loss, &sink); }

void Tape::run_backward(Var loss, GradientBuffer* sink) {
  if (!loss.tape_ || loss.tape_ != this) throw std::logic_error("backward: loss does not belong to this tape");
  if (loss.generation_ != generation_) {
    throw std::logic_error("backward called twice without a new forward pass");
  }
  const std::int32_t root = loss.id_;
  if (size_of(root) != 1) throw ShapeError("backward requires a scalar loss");
  if (!nodes_[root].needs_grad) {
    clear();
    return;
  }

  std::vector<std::vector<double>> grads(nodes_.size());
  auto target = [&](std::int32_t id) -> double* {
    Node& n = nodes_[id];
    if (!n.needs_grad) return nullptr;
    if (n.param) {
      auto& g = sink ? (*sink)[n.param->index()] : n.param->grad();
      if (g.size() != n.param->value().size()) g.assign(n.param->value().size(), 0.0);
      return g.data();
    }
    auto& g = grads[id];
    if (g.empty()) g.assign(size_of(id), 0.0);
    return g.data();
  };

  grads[root] = {1.0};
  for (std::int32_t i = root; i >= 0; --i) {
    Node& node = nodes_[i];
    if (!node.needs_grad || node.param || grads[i].empty()) continue;
    const double* gy = grads[i].data();
    const std::size_t n = size_of(i);

    switch (node.op) {
      case Op::kConstant:
      case Op::kParameter:
        break;
      case Op::kLinear: {
        const std::size_t rows = nodes_[node.a].rows, cols = nodes_[node.a].cols;
        const double* W = values_of(node.a);
        const double* X = values_of(node.b);
        if (double* gw = target(node.a)) {
          for (std::size_t r = 0; r < rows; ++r) {
            const double g = gy[r];
            if (g == 0.0) continue;
            double* row = gw + r * cols;
            for (std::size_t c = 0; c < cols; ++c) row[c] += g * X[c];
          }
        }
        if (double* gx = target(node.b)) {
          for (std::size_t r = 0; r < rows; ++r) {
            const double g = gy[r];
            if (g == 0.0) continue;
            const double* row = W + r * cols;
            for (std::size_t c = 0; c < cols; ++c) gx[c] += g * row[c];
          }
        }
        if (node.c >= 0) {
          if (double* gb = target(node.c)) {
            for (std::size_t r = 0; r < rows; ++r) gb[r] += gy[r];
          }
        }
        break;
      }
      case Op::kMatTVec: {
        const std::size_t rows = nodes_[node.a].rows, cols = nodes_[node.a].cols;
        const double* M = values_of(node.a);
        const double* X = values_of(node.b);
        if (double* gm = target(node.a)) {
          for (std::size_t r = 0; r < rows; ++r) {
            for (std::size_t c = 0; c < cols; ++c) gm[r * cols + c] += X[r] * gy[c];
          }
        }
        if (double* gx = target(node.b)) {
          for (std::size_t r = 0; r < rows; ++r) {
            double acc = 0.0;
            for (std::size_t c = 0; c < cols; ++c) acc += M[r * cols + c] * gy[c];
            gx[r] += acc;
          }
        }
        break;
      }
      case Op::kAdd:
      case Op::kSub: {
        const double sign = node.op == Op::kAdd ? 1.0 : -1.0;
        if (double* ga = target(node.a)) {
          for (std::size_t j = 0; j < n; ++j) ga[j] += gy[j];
        }
        if (double* gb = target(node.b)) {
          for (std::size_t j = 0; j < n; ++j) gb[j] += sign * gy[j];
        }
        break;
      }
      case Op::kMul: {
        const double* A = values_of(node.a);
        const double* B = values_of(node.b);
        if (double* ga = target(node.a)) {
          for (std::size_t j = 0; j < n; ++j) ga[j] += gy[j] * B[j];
        }
        if (double* gb = target(node.b)) {
          for (std::size_t j = 0; j < n; ++j) gb[j] += gy[j] * A[j];
        }
        break;
      }
      case Op::kScale:
        if (double* ga = target(node.a)) {
          for (std::size_t j = 0; j < n; ++j) ga[j] += node.k * gy[j];
        }
        break;
      case Op::kOneMinus:
        if (double* ga = target(node.a)) {
          for (std::size_t j = 0; j < n; ++j) ga[j] -= gy[j];
        }
        break;
      case Op::kSum:
        for (std::int32_t arg : node.args) {
          if (double* ga = target(arg)) {
            for (std::size_t j = 0; j < n; ++j) ga[j] += gy[j];
          }
        }
        break;
      case Op::kSigmoid:
        if (double* ga = target(node.a)) {
          for (std::size_t j = 0; j < n; ++j) ga[j] += gy[j] * node.value[j] * (1.0 - node.value[j]);
        }
        break;
      case Op::kTanh:
        if (double* ga = target(node.a)) {
          for (std::size_t j = 0; j < n; ++j) ga[j] += gy[j] * (1.0 - node.value[j] * node.value[j]);
        }
        break;
      case Op::kRelu:
        if (double* ga = target(node.a)) {
          const double* A = values_of(node.a);
          for (std::size_t j = 0; j < n; ++j) {
            if (A[j] > 0.0) ga[j] += gy[j];
          }
        }
        break;
      case Op::kExp:
        if (double* ga = target(node.a)) {
          for (std::size_t j = 0; j < n; ++j) ga[j] += gy[j] * node.value[j];
        }
        break;
      case Op::kConcat:
      case Op::kStackRows: {
        std::size_t offset = 0;
        for (std::int32_t arg : node.args) {
          const std::size_t len = size_of(arg);
          if (double* ga = target(arg)) {
            for (std::size_t j = 0; j < len; ++j) ga[j] += gy[offset + j];
          }
          offset += len;
        }
        break;
      }
      case Op::kRow:
        if (double* gm = target(node.a)) {
          double* row = gm + static_cast<std::size_t>(node.c) * n;
          for (std::size_t j = 0; j < n; ++j) row[j] += gy[j];
        }
        break;
      case Op::kDot: {
        const std::size_t len = size_of(node.a);
        const double* A = values_of(node.a);
        const double* B = values_of(node.b);
        if (double* ga = target(node.a)) {
          for (std::size_t j = 0; j < len; ++j) ga[j] += gy[0] * B[j];
        }
        if (double* gb = target(node.b)) {
          for (std::size_t j = 0; j < len; ++j) gb[j] += gy[0] * A[j];
        }
        break;
      }
      case Op::kReduceSum:
        if (double* ga = target(node.a)) {
          for (std::size_t j = 0; j < size_of(node.a); ++j) ga[j] += gy[0];
        }
        break;
      case Op::kSoftmax:
        if (double* ga = target(node.a)) {
          double inner = 0.0;
          for (std::size_t j = 0; j < n; ++j) inner += gy[j] * node.value[j];
          for (std::size_t j = 0; j < n; ++j) ga[j] += node.value[j] * (gy[j] - inner);
        }
        break;
      case Op::kCrossEntropy:
        if (double* ga = target(node.a)) {
          for (std::size_t j = 0; j < node.aux.size(); ++j) {
            const double onehot = static_cast<std::int32_t>(j) == node.c ? 1.0 : 0.0;
            ga[j] += gy[0] * (node.aux[j] - onehot);
          }
        }
        break;
      case Op::kBceLogits:
        if (double* ga = target(node.a)) {
          ga[0] += gy[0] * (stable_sigmoid(values_of(node.a)[0]) - node.k);
        }
        break;
      case Op::kKlDiag: {
        const std::size_t len = size_of(node.a);
        if (double* gm = target(node.a)) {
          const double* M = values_of(node.a);
          for (std::size_t j = 0; j < len; ++j) gm[j] += gy[0] * M[j];
        }
        if (double* gl = target(node.b)) {
          const double* L = values_of(node.b);
          for (std::size_t j = 0; j < len; ++j) gl[j] += gy[0] * 0.5 * (std::exp(L[j]) - 1.0);
        }
        break;
      }
    }
    grads[i].clear();
    grads[i].shrink_to_fit();
  }
  clear();
}

}  // namespace rxngen::numerics
