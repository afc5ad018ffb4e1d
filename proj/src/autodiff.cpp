// Copyright 2026 The raflow Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "raflow/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

namespace raflow::ad {
namespace {

thread_local bool g_grad_enabled = true;

Node& parent(Node& out, std::size_t i) { return *out.parents[i]; }

bool wants(const Node& n) { return n.requires_grad; }

double softplus(double u) { return u > 0 ? u + std::log1p(std::exp(-u)) : std::log1p(std::exp(u)); }

double logistic_scalar(double u) {
  if (u >= 0) return 1.0 / (1.0 + std::exp(-u));
  const double e = std::exp(u);
  return e / (1.0 + e);
}

}  // namespace

Matrix& Node::grad_buffer() {
  if (grad.size() == 0) grad = Matrix::Zero(value.rows(), value.cols());
  return grad;
}

Var::Var(Matrix value, bool requires_grad) : node_(std::make_shared<Node>()) {
  require_finite(value, "leaf");
  node_->value = std::move(value);
  node_->requires_grad = requires_grad;
  if (requires_grad) node_->grad = Matrix::Zero(node_->value.rows(), node_->value.cols());
}

double Var::scalar() const {
  if (rows() != 1 || cols() != 1)
    throw ContractError("scalar(): value is " + shape_string(rows(), cols()));
  return node_->value(0, 0);
}

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }

bool grad_enabled() { return g_grad_enabled; }

Var make_result(Matrix value, std::span<const Var> parents, std::function<void(Node&)> backward,
                const char* op) {
  if (!value.allFinite()) throw NumericError(std::string(op) + ": non-finite value");
  auto node = std::make_shared<Node>();
  node->value = std::move(value);
  node->op = op;
  if (g_grad_enabled) {
    bool any = false;
    for (const auto& p : parents) any = any || p.requires_grad();
    if (any) {
      node->requires_grad = true;
      node->parents.reserve(parents.size());
      for (const auto& p : parents) node->parents.push_back(p.node());
      node->backward_fn = std::move(backward);
    }
  }
  return Var(std::move(node));
}

Var make_result(Matrix value, std::initializer_list<Var> parents,
                std::function<void(Node&)> backward, const char* op) {
  return make_result(std::move(value), std::span<const Var>(parents.begin(), parents.size()),
                     std::move(backward), op);
}

Var constant(Matrix value) { return Var(std::move(value), false); }

Var constant_scalar(double value) { return constant(Matrix::Constant(1, 1, value)); }

Var detach(const Var& v) { return constant(v.value()); }

Var matmul(const Var& a, const Var& b) {
  if (a.cols() != b.rows())
    throw DimensionError("matmul: inner extents disagree " + shape_string(a.rows(), a.cols()) +
                         " x " + shape_string(b.rows(), b.cols()));
  return make_result(
      a.value() * b.value(), {a, b},
      [](Node& out) {
        Node& x = parent(out, 0);
        Node& y = parent(out, 1);
        if (wants(x)) x.grad_buffer().noalias() += out.grad * y.value.transpose();
        if (wants(y)) y.grad_buffer().noalias() += x.value.transpose() * out.grad;
      },
      "matmul");
}

Var add(const Var& a, const Var& b) {
  require_same_shape(a.value(), b.value(), "add");
  return make_result(
      a.value() + b.value(), {a, b},
      [](Node& out) {
        for (std::size_t i = 0; i < 2; ++i)
          if (wants(parent(out, i))) parent(out, i).grad_buffer() += out.grad;
      },
      "add");
}

Var sub(const Var& a, const Var& b) {
  require_same_shape(a.value(), b.value(), "sub");
  return make_result(
      a.value() - b.value(), {a, b},
      [](Node& out) {
        if (wants(parent(out, 0))) parent(out, 0).grad_buffer() += out.grad;
        if (wants(parent(out, 1))) parent(out, 1).grad_buffer() -= out.grad;
      },
      "sub");
}

Var mul(const Var& a, const Var& b) {
  require_same_shape(a.value(), b.value(), "mul");
  return make_result(
      a.value().cwiseProduct(b.value()), {a, b},
      [](Node& out) {
        Node& x = parent(out, 0);
        Node& y = parent(out, 1);
        if (wants(x)) x.grad_buffer() += out.grad.cwiseProduct(y.value);
        if (wants(y)) y.grad_buffer() += out.grad.cwiseProduct(x.value);
      },
      "mul");
}

Var scale(const Var& a, double factor) {
  return make_result(
      a.value() * factor, {a},
      [factor](Node& out) { parent(out, 0).grad_buffer() += factor * out.grad; }, "scale");
}

Var add_scalar(const Var& a, double offset) {
  return make_result(
      a.value().array() + offset, {a},
      [](Node& out) { parent(out, 0).grad_buffer() += out.grad; }, "add_scalar");
}

Var logistic(const Var& a) {
  Matrix s = a.value().unaryExpr([](double u) { return logistic_scalar(u); });
  return make_result(
      std::move(s), {a},
      [](Node& out) {
        const auto s = out.value.array();
        parent(out, 0).grad_buffer().array() += out.grad.array() * s * (1.0 - s);
      },
      "logistic");
}

Var tanh(const Var& a) {
  return make_result(
      a.value().array().tanh().matrix(), {a},
      [](Node& out) {
        const auto t = out.value.array();
        parent(out, 0).grad_buffer().array() += out.grad.array() * (1.0 - t * t);
      },
      "tanh");
}

Var exp(const Var& a) {
  return make_result(
      a.value().array().exp().matrix(), {a},
      [](Node& out) {
        parent(out, 0).grad_buffer().array() += out.grad.array() * out.value.array();
      },
      "exp");
}

Var log(const Var& a) {
  if ((a.value().array() <= 0.0).any()) throw DomainError("log: non-positive input");
  return make_result(
      a.value().array().log().matrix(), {a},
      [](Node& out) {
        Node& x = parent(out, 0);
        x.grad_buffer().array() += out.grad.array() / x.value.array();
      },
      "log");
}

Var abs(const Var& a) {
  return make_result(
      a.value().cwiseAbs(), {a},
      [](Node& out) {
        Node& x = parent(out, 0);
        x.grad_buffer().array() += out.grad.array() * x.value.array().sign();
      },
      "abs");
}

Var leaky_linear(const Var& a, double slope) {
  Matrix v = a.value().unaryExpr([slope](double u) { return u >= 0 ? u : slope * u; });
  return make_result(
      std::move(v), {a},
      [slope](Node& out) {
        Node& x = parent(out, 0);
        x.grad_buffer().array() +=
            (x.value.array() >= 0.0).select(out.grad.array(), slope * out.grad.array());
      },
      "leaky_linear");
}

Var log_logistic_derivative(const Var& a) {
  Matrix v = a.value().unaryExpr([](double u) { return -softplus(u) - softplus(-u); });
  return make_result(
      std::move(v), {a},
      [](Node& out) {
        // d/du [ln s + ln(1-s)] = 1 - 2 s
        Node& x = parent(out, 0);
        x.grad_buffer().array() +=
            out.grad.array() *
            x.value.unaryExpr([](double u) { return 1.0 - 2.0 * logistic_scalar(u); }).array();
      },
      "log_logistic_derivative");
}

Var soft_leaky(const Var& a, double slope) {
  Matrix v = a.value().unaryExpr([slope](double u) { return slope * u + (1.0 - slope) * softplus(u); });
  return make_result(
      std::move(v), {a},
      [slope](Node& out) {
        Node& x = parent(out, 0);
        x.grad_buffer().array() +=
            out.grad.array() *
            x.value.unaryExpr([slope](double u) { return slope + (1.0 - slope) * logistic_scalar(u); })
                .array();
      },
      "soft_leaky");
}

Var log_soft_leaky_derivative(const Var& a, double slope) {
  Matrix v = a.value().unaryExpr(
      [slope](double u) { return std::log(slope + (1.0 - slope) * logistic_scalar(u)); });
  return make_result(
      std::move(v), {a},
      [slope](Node& out) {
        Node& x = parent(out, 0);
        x.grad_buffer().array() +=
            out.grad.array() * x.value
                                   .unaryExpr([slope](double u) {
                                     const double s = logistic_scalar(u);
                                     return (1.0 - slope) * s * (1.0 - s) / (slope + (1.0 - slope) * s);
                                   })
                                   .array();
      },
      "log_soft_leaky_derivative");
}

Var clamp_min(const Var& a, double floor) {
  return make_result(
      a.value().cwiseMax(floor), {a},
      [floor](Node& out) {
        Node& x = parent(out, 0);
        x.grad_buffer().array() += (x.value.array() > floor).select(out.grad.array(), 0.0);
      },
      "clamp_min");
}

Var add_columnwise(const Var& a, const Var& bias) {
  if (bias.cols() != 1 || bias.rows() != a.rows())
    throw DimensionError("add_columnwise: bias " + shape_string(bias.rows(), bias.cols()) +
                         " for operand " + shape_string(a.rows(), a.cols()));
  Matrix v = a.value();
  v.colwise() += bias.value().col(0);
  return make_result(
      std::move(v), {a, bias},
      [](Node& out) {
        if (wants(parent(out, 0))) parent(out, 0).grad_buffer() += out.grad;
        if (wants(parent(out, 1))) parent(out, 1).grad_buffer() += out.grad.rowwise().sum();
      },
      "add_columnwise");
}

Var repeat_columns(const Var& a, Index count) {
  if (count < 1) throw DimensionError("repeat_columns: count must be positive");
  Matrix v(a.rows(), a.cols() * count);
  for (Index j = 0; j < a.cols(); ++j)
    v.middleCols(j * count, count) = a.value().col(j).replicate(1, count);
  return make_result(
      std::move(v), {a},
      [count](Node& out) {
        Matrix& g = parent(out, 0).grad_buffer();
        for (Index j = 0; j < g.cols(); ++j)
          g.col(j) += out.grad.middleCols(j * count, count).rowwise().sum();
      },
      "repeat_columns");
}

Var rows(const Var& a, Index start, Index count) {
  if (start < 0 || count < 0 || start + count > a.rows())
    throw DimensionError("rows: range [" + std::to_string(start) + ", " +
                         std::to_string(start + count) + ") outside " +
                         shape_string(a.rows(), a.cols()));
  return make_result(
      a.value().middleRows(start, count), {a},
      [start, count](Node& out) {
        parent(out, 0).grad_buffer().middleRows(start, count) += out.grad;
      },
      "rows");
}

Var select_rows(const Var& a, std::span<const Index> indices) {
  Matrix v(static_cast<Index>(indices.size()), a.cols());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] < 0 || indices[i] >= a.rows())
      throw DimensionError("select_rows: index out of range");
    v.row(static_cast<Index>(i)) = a.value().row(indices[i]);
  }
  std::vector<Index> idx(indices.begin(), indices.end());
  return make_result(
      std::move(v), {a},
      [idx = std::move(idx)](Node& out) {
        Matrix& g = parent(out, 0).grad_buffer();
        for (std::size_t i = 0; i < idx.size(); ++i) g.row(idx[i]) += out.grad.row(static_cast<Index>(i));
      },
      "select_rows");
}

Var vstack(std::span<const Var> parts) {
  if (parts.empty()) throw DimensionError("vstack: no operands");
  Index total = 0;
  for (const auto& p : parts) {
    if (p.cols() != parts[0].cols()) throw DimensionError("vstack: column extents disagree");
    total += p.rows();
  }
  Matrix v(total, parts[0].cols());
  Index at = 0;
  for (const auto& p : parts) {
    v.middleRows(at, p.rows()) = p.value();
    at += p.rows();
  }
  return make_result(
      std::move(v), parts,
      [](Node& out) {
        Index at = 0;
        for (auto& p : out.parents) {
          if (p->requires_grad) p->grad_buffer() += out.grad.middleRows(at, p->value.rows());
          at += p->value.rows();
        }
      },
      "vstack");
}

Var hstack(std::span<const Var> parts) {
  if (parts.empty()) throw DimensionError("hstack: no operands");
  Index total = 0;
  for (const auto& p : parts) {
    if (p.rows() != parts[0].rows()) throw DimensionError("hstack: row extents disagree");
    total += p.cols();
  }
  Matrix v(parts[0].rows(), total);
  Index at = 0;
  for (const auto& p : parts) {
    v.middleCols(at, p.cols()) = p.value();
    at += p.cols();
  }
  return make_result(
      std::move(v), parts,
      [](Node& out) {
        Index at = 0;
        for (auto& p : out.parents) {
          if (p->requires_grad) p->grad_buffer() += out.grad.middleCols(at, p->value.cols());
          at += p->value.cols();
        }
      },
      "hstack");
}

Var sum(const Var& a) {
  return make_result(
      Matrix::Constant(1, 1, a.value().sum()), {a},
      [](Node& out) { parent(out, 0).grad_buffer().array() += out.grad(0, 0); }, "sum");
}

Var column_sums(const Var& a) {
  return make_result(
      a.value().colwise().sum(), {a},
      [](Node& out) { parent(out, 0).grad_buffer().rowwise() += out.grad.row(0); },
      "column_sums");
}

Var mean(const Var& a) {
  const double n = static_cast<double>(a.value().size());
  if (n == 0) throw ContractError("mean: empty operand");
  return scale(sum(a), 1.0 / n);
}

Var log_softmax_blocks(const Var& row, Index block) {
  if (row.rows() != 1 || block < 1 || row.cols() % block != 0)
    throw DimensionError("log_softmax_blocks: row of " + std::to_string(row.cols()) +
                         " columns is not a whole number of blocks of " + std::to_string(block));
  Matrix v(1, row.cols());
  for (Index s = 0; s < row.cols(); s += block) {
    const auto seg = row.value().middleCols(s, block);
    const double m = seg.maxCoeff();
    const double lse = m + std::log((seg.array() - m).exp().sum());
    v.middleCols(s, block) = seg.array() - lse;
  }
  return make_result(
      std::move(v), {row},
      [block](Node& out) {
        Matrix& g = parent(out, 0).grad_buffer();
        for (Index s = 0; s < out.value.cols(); s += block) {
          const auto go = out.grad.middleCols(s, block);
          const double total = go.sum();
          g.middleCols(s, block).array() +=
              go.array() - out.value.middleCols(s, block).array().exp() * total;
        }
      },
      "log_softmax_blocks");
}

void backward(const Var& loss) {
  if (!loss.defined() || loss.rows() != 1 || loss.cols() != 1)
    throw ContractError("backward: loss must be a 1x1 scalar, got " +
                        (loss.defined() ? shape_string(loss.rows(), loss.cols()) : "undefined"));
  if (!loss.requires_grad()) return;

  // Iterative post-order DFS yields a topological order of the graph.
  std::vector<Node*> order;
  std::unordered_set<Node*> seen;
  std::vector<std::pair<Node*, std::size_t>> stack{{loss.node().get(), 0}};
  seen.insert(loss.node().get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      Node* p = node->parents[next++].get();
      if (p->requires_grad && seen.insert(p).second) stack.emplace_back(p, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  loss.node()->grad_buffer()(0, 0) += 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* n = *it;
    if (!n->backward_fn || n->grad.size() == 0) continue;
    n->backward_fn(*n);
    for (const auto& p : n->parents) {
      if (p->requires_grad && !p->grad.allFinite())
        throw NumericError(std::string("backward through ") + n->op + ": non-finite gradient");
    }
  }
}

}  // namespace raflow::ad
