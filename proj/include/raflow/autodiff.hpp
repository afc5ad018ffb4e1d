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

// Reverse-mode differentiation over dense matrices.
//
// Every operation returns a Var that owns its value and, when any operand
// requires a gradient, a closure that pushes the output gradient back to the
// operands. The graph is kept alive by the Vars that reference it, so a
// training step is: build the loss, call backward(loss), drop the loss.
//
// All operations check their outputs for NaN/Inf and throw NumericError
// naming the operation.

#ifndef RAFLOW_AUTODIFF_HPP
#define RAFLOW_AUTODIFF_HPP

#include "raflow/core.hpp"

#include <functional>
#include <memory>
#include <span>
#include <vector>

namespace raflow::ad {

struct Node {
  Matrix value;
  Matrix grad;  // empty until something flows back into this node
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backward_fn;
  const char* op = "leaf";
  bool requires_grad = false;

  /// Gradient buffer, zero-initialized on first access.
  Matrix& grad_buffer();
};

class Var {
 public:
  Var() = default;
  explicit Var(Matrix value, bool requires_grad = false);
  explicit Var(std::shared_ptr<Node> node) : node_(std::move(node)) {}

  const Matrix& value() const { return node_->value; }
  Matrix& mutable_value() { return node_->value; }
  const Matrix& grad() const { return node_->grad; }
  Index rows() const { return node_->value.rows(); }
  Index cols() const { return node_->value.cols(); }
  bool requires_grad() const { return node_ && node_->requires_grad; }
  bool defined() const { return static_cast<bool>(node_); }
  double scalar() const;

  const std::shared_ptr<Node>& node() const { return node_; }

 private:
  std::shared_ptr<Node> node_;
};

/// Disables graph recording on the current thread while alive.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

bool grad_enabled();

/// Builds a result node. `backward` receives the result node (whose grad is
/// populated) and must accumulate into the parents' grad_buffer().
Var make_result(Matrix value, std::initializer_list<Var> parents,
                std::function<void(Node&)> backward, const char* op);
Var make_result(Matrix value, std::span<const Var> parents,
                std::function<void(Node&)> backward, const char* op);

Var constant(Matrix value);
Var constant_scalar(double value);

/// Detached copy: same value, no history.
Var detach(const Var& v);

Var matmul(const Var& a, const Var& b);
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var scale(const Var& a, double factor);
Var add_scalar(const Var& a, double offset);
Var logistic(const Var& a);
Var tanh(const Var& a);
Var exp(const Var& a);
/// Requires strictly positive input; DomainError otherwise.
Var log(const Var& a);
Var abs(const Var& a);
/// u for u >= 0, slope * u otherwise.
Var leaky_linear(const Var& a, double slope);
/// ln(logistic'(u)) = -softplus(u) - softplus(-u), evaluated stably.
Var log_logistic_derivative(const Var& a);
/// slope * a + (1 - slope) * softplus(a), elementwise.
Var soft_leaky(const Var& a, double slope);
/// ln(slope + (1 - slope) * logistic(a)), elementwise.
Var log_soft_leaky_derivative(const Var& a, double slope);
/// Elementwise max(a, floor); gradient is zero where the floor is active.
Var clamp_min(const Var& a, double floor);

/// Broadcasts an m x 1 bias over the columns of an m x n operand.
Var add_columnwise(const Var& a, const Var& bias);
/// Column j of `a` becomes columns j*count .. j*count+count-1.
Var repeat_columns(const Var& a, Index count);
Var rows(const Var& a, Index start, Index count);
Var select_rows(const Var& a, std::span<const Index> indices);
Var vstack(std::span<const Var> parts);
Var hstack(std::span<const Var> parts);

Var sum(const Var& a);
Var column_sums(const Var& a);
Var mean(const Var& a);
/// Log-softmax over each contiguous block of `block` columns of a 1 x n row.
Var log_softmax_blocks(const Var& row, Index block);

inline Var operator+(const Var& a, const Var& b) { return add(a, b); }
inline Var operator-(const Var& a, const Var& b) { return sub(a, b); }
inline Var operator*(double s, const Var& a) { return scale(a, s); }

/// Populates grad on every reachable node; leaves accumulate additively.
/// Throws ContractError if `loss` is not 1 x 1.
void backward(const Var& loss);

}  // namespace raflow::ad

#endif  // RAFLOW_AUTODIFF_HPP
