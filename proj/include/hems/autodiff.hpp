// Copyright 2026 The hemscast Authors
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

#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace hems::ad {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowVector = Eigen::Matrix<double, 1, Eigen::Dynamic>;

struct Var {
  int id = -1;
};

// Reverse-mode tape over dense matrices. Each op records its output value
// and, when gradients are requested, a closure that pushes the output
// gradient back to its inputs. Parameters are views into one flat vector;
// their gradients accumulate into a flat vector of the same layout.
class Tape {
 public:
  using Backward = std::function<void(Tape&)>;

  // `grads` may be empty: the tape then records values only (inference).
  Tape(std::span<const double> params, std::span<double> grads);

  bool recording() const { return !grads_.empty(); }

  Var constant(Matrix value);
  // Row-major block of `rows x cols` parameters starting at `offset`.
  Var parameter(std::size_t offset, Eigen::Index rows, Eigen::Index cols);

  const Matrix& value(Var v) const { return nodes_[v.id].value; }
  // Gradient buffer of `v`, allocated as zeros on first access.
  Matrix& grad(Var v);
  bool has_grad(Var v) const { return nodes_[v.id].grad.size() > 0; }

  Var push(Matrix value, Backward backward);

  // Seeds d(root)/d(root) = 1 for a 1x1 root and runs all closures in
  // reverse order.
  void backward(Var root);

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    Backward backward;
  };

  std::span<const double> params_;
  std::span<double> grads_;
  std::vector<Node> nodes_;
};

Var matmul(Tape& t, Var a, Var b);
// x (n x in) * w (in x out) + b (1 x out) broadcast over rows.
Var linear(Tape& t, Var x, Var w, Var b);
Var add(Tape& t, Var a, Var b);
Var mul(Tape& t, Var a, Var b);
// Elementwise product with a constant mask (dropout).
Var mul_constant(Tape& t, Var a, Matrix mask);

Var elu(Tape& t, Var x);
Var sigmoid(Tape& t, Var x);
Var softplus(Tape& t, Var x);

// Row-wise layer normalisation with learned gain and bias (1 x cols).
Var layer_norm(Tape& t, Var x, Var gain, Var bias, double eps = 1e-5);
Var softmax_rows(Tape& t, Var x);

// x (n x vars), w and b (vars x h): out(n, j*h + k) = x(n, j) * w(j, k) + b(j, k).
Var embed(Tape& t, Var x, Var w, Var b);
// weights (n x vars), e (n x vars*h): out(n, k) = sum_j weights(n, j) * e(n, j*h + k).
Var weighted_sum(Tape& t, Var weights, Var e);

Var slice_rows(Tape& t, Var x, Eigen::Index start, Eigen::Index count);
Var concat_rows(Tape& t, Var top, Var bottom);

// Single-layer GRU over the rows of x (seq x in) from a zero initial state.
// wx (in x 3h), bx (1 x 3h), wh (h x 3h), bh (1 x 3h); gate order r, z, n.
Var gru(Tape& t, Var x, Var wx, Var bx, Var wh, Var bh);

// Multi-head scaled dot-product attention. Query row i sits at sequence
// position query_offset + i and may only attend to keys at positions <= it.
Var masked_attention(Tape& t, Var q, Var k, Var v, int heads, Eigen::Index query_offset);

// Non-crossing quantile assembly from raw head outputs (n x Q): column
// `anchor` passes through, columns above add softplus increments, columns
// below subtract them.
Var monotone_quantiles(Tape& t, Var raw, int anchor);

// Mean pinball loss of predictions (n x Q) against target (n x 1).
Var pinball_mean(Tape& t, Var pred, const Matrix& target, std::span<const double> quantiles);

double softplus_value(double x);

}  // namespace hems::ad
