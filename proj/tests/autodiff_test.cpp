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

#include "hems/autodiff.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>

namespace hems::ad {
namespace {

using Build = std::function<Var(Tape&)>;

// Reduces any matrix node to a scalar through a fixed random linear functional.
Var reduce(Tape& t, Var x, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const Matrix& v = t.value(x);
  Matrix left(1, v.rows()), right(v.cols(), 1);
  for (auto& e : left.reshaped()) e = u(rng);
  for (auto& e : right.reshaped()) e = u(rng);
  return matmul(t, matmul(t, t.constant(left), x), t.constant(right));
}

double eval(const std::vector<double>& params, const Build& build) {
  Tape t(params, {});
  return t.value(build(t))(0, 0);
}

// Central differences with h = 1e-4 against the tape gradient.
void gradcheck(std::vector<double> params, const Build& build, double tol = 1e-6) {
  std::vector<double> grads(params.size(), 0.0);
  {
    Tape t(params, grads);
    t.backward(build(t));
  }
  const double h = 1e-4;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double saved = params[i];
    params[i] = saved + h;
    const double up = eval(params, build);
    params[i] = saved - h;
    const double down = eval(params, build);
    params[i] = saved;
    const double numeric = (up - down) / (2 * h);
    const double scale = std::max({std::abs(numeric), std::abs(grads[i]), 1e-6});
    EXPECT_LT(std::abs(numeric - grads[i]) / scale, tol) << "param " << i;
  }
}

std::vector<double> random_params(std::size_t n, std::uint64_t seed, double lo = -1.0,
                                  double hi = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> p(n);
  for (auto& v : p) v = u(rng);
  return p;
}

TEST(Autodiff, MatmulLinearAddMul) {
  // a 3x4 at 0, b 4x2 at 12, bias 1x2 at 20, c 3x2 at 22
  auto p = random_params(28, 1);
  gradcheck(p, [](Tape& t) {
    Var a = t.parameter(0, 3, 4), b = t.parameter(12, 4, 2), bias = t.parameter(20, 1, 2);
    Var c = t.parameter(22, 3, 2);
    Var y = add(t, linear(t, a, b, bias), mul(t, matmul(t, a, b), c));
    return reduce(t, y, 7);
  });
}

TEST(Autodiff, Activations) {
  auto p = random_params(12, 2, -3.0, 3.0);
  gradcheck(p, [](Tape& t) {
    Var x = t.parameter(0, 3, 4);
    Var y = add(t, add(t, elu(t, x), sigmoid(t, x)), softplus(t, x));
    return reduce(t, y, 8);
  });
}

TEST(Autodiff, MaskedProduct) {
  auto p = random_params(6, 3);
  Matrix mask(2, 3);
  mask << 0.0, 2.0, 2.0, 2.0, 0.0, 2.0;
  gradcheck(p, [mask](Tape& t) { return reduce(t, mul_constant(t, t.parameter(0, 2, 3), mask), 9); });
}

TEST(Autodiff, LayerNormAndSoftmax) {
  auto p = random_params(3 * 5 + 10, 4);
  gradcheck(p, [](Tape& t) {
    Var x = t.parameter(0, 3, 5);
    Var y = layer_norm(t, x, t.parameter(15, 1, 5), t.parameter(20, 1, 5));
    return reduce(t, add(t, y, softmax_rows(t, x)), 10);
  });
}

TEST(Autodiff, EmbedAndWeightedSum) {
  // x 2x3, w 3x4, b 3x4, weights 2x3
  auto p = random_params(6 + 12 + 12 + 6, 5);
  gradcheck(p, [](Tape& t) {
    Var x = t.parameter(0, 2, 3);
    Var e = embed(t, x, t.parameter(6, 3, 4), t.parameter(18, 3, 4));
    Var w = softmax_rows(t, t.parameter(30, 2, 3));
    return add(t, reduce(t, weighted_sum(t, w, e), 11), reduce(t, e, 16));
  });
}

TEST(Autodiff, EmbedValues) {
  Matrix x(1, 2);
  x << 2.0, -1.0;
  std::vector<double> p{1, 2, 3, 4, 10, 20, 30, 40};  // w 2x2, b 2x2
  Tape t(p, {});
  Var e = embed(t, t.constant(x), t.parameter(0, 2, 2), t.parameter(4, 2, 2));
  Matrix expect(1, 4);
  expect << 12, 24, 27, 36;
  EXPECT_EQ(t.value(e), expect);
  Matrix w(1, 2);
  w << 0.25, 0.75;
  Var s = weighted_sum(t, t.constant(w), e);
  EXPECT_DOUBLE_EQ(t.value(s)(0, 0), 0.25 * 12 + 0.75 * 27);
  EXPECT_DOUBLE_EQ(t.value(s)(0, 1), 0.25 * 24 + 0.75 * 36);
}

TEST(Autodiff, SliceAndConcat) {
  auto p = random_params(4 * 3, 6);
  gradcheck(p, [](Tape& t) {
    Var x = t.parameter(0, 4, 3);
    Var y = concat_rows(t, slice_rows(t, x, 2, 2), slice_rows(t, x, 0, 3));
    return reduce(t, elu(t, y), 12);
  });
}

TEST(Autodiff, Gru) {
  const int in = 2, h = 3, seq = 5;
  std::size_t n = seq * in + in * 3 * h + 3 * h + h * 3 * h + 3 * h;
  auto p = random_params(n, 7);
  gradcheck(p, [=](Tape& t) {
    std::size_t o = 0;
    Var x = t.parameter(o, seq, in);
    o += seq * in;
    Var wx = t.parameter(o, in, 3 * h);
    o += in * 3 * h;
    Var bx = t.parameter(o, 1, 3 * h);
    o += 3 * h;
    Var wh = t.parameter(o, h, 3 * h);
    o += h * 3 * h;
    Var bh = t.parameter(o, 1, 3 * h);
    return reduce(t, gru(t, x, wx, bx, wh, bh), 13);
  });
}

TEST(Autodiff, MaskedAttention) {
  // k, v over 5 positions; queries for the last 3 positions; 2 heads of width 2.
  auto p = random_params(3 * 4 + 5 * 4 + 5 * 4, 8);
  gradcheck(p, [](Tape& t) {
    Var q = t.parameter(0, 3, 4), k = t.parameter(12, 5, 4), v = t.parameter(32, 5, 4);
    return reduce(t, masked_attention(t, q, k, v, 2, 2), 14);
  });
}

TEST(Autodiff, AttentionIsCausal) {
  auto p = random_params(2 * 2 + 4 * 2 + 4 * 2, 9);
  auto run = [](const std::vector<double>& params) {
    Tape t(params, {});
    Var q = t.parameter(0, 2, 2), k = t.parameter(4, 4, 2), v = t.parameter(12, 4, 2);
    return Matrix(t.value(masked_attention(t, q, k, v, 1, 1)));
  };
  Matrix base = run(p);
  // Changing the value at position 2 cannot affect the query at position 1.
  auto q = p;
  q[12 + 2 * 2] += 5.0;
  Matrix moved = run(q);
  EXPECT_EQ(base.row(0), moved.row(0));
  EXPECT_NE(base.row(1), moved.row(1));
}

TEST(Autodiff, MonotoneQuantiles) {
  auto p = random_params(4 * 5, 10, -4.0, 4.0);
  gradcheck(p, [](Tape& t) { return reduce(t, monotone_quantiles(t, t.parameter(0, 4, 5), 2), 15); });
  Tape t(p, {});
  const Matrix& out = t.value(monotone_quantiles(t, t.parameter(0, 4, 5), 2));
  for (int i = 0; i < 4; ++i) {
    EXPECT_EQ(out(i, 2), p[i * 5 + 2]);
    for (int c = 1; c < 5; ++c) EXPECT_GT(out(i, c), out(i, c - 1));
  }
}

TEST(Autodiff, PinballMean) {
  const std::vector<double> qs{0.1, 0.5, 0.9};
  Matrix target(2, 1);
  target << 10.0, -10.0;  // far from the predictions, so no kink is crossed
  auto p = random_params(6, 11);
  gradcheck(p, [&](Tape& t) { return pinball_mean(t, t.parameter(0, 2, 3), target, qs); });

  // Hand example: q=0.1, y=1, p=2 -> 0.9; q=0.9, y=1, p=0 -> 0.9.
  std::vector<double> preds{2.0, 0.0};
  Matrix y(1, 1);
  y << 1.0;
  std::vector<double> q2{0.1, 0.9};
  Tape t(preds, {});
  EXPECT_DOUBLE_EQ(t.value(pinball_mean(t, t.parameter(0, 1, 2), y, q2))(0, 0), 0.9);
}

TEST(Autodiff, PinballGradientZeroAtTarget) {
  std::vector<double> preds{1.0, 1.0};
  std::vector<double> grads(2, 0.0);
  Matrix y(1, 1);
  y << 1.0;
  std::vector<double> qs{0.3, 0.7};
  Tape t(preds, grads);
  Var l = pinball_mean(t, t.parameter(0, 1, 2), y, qs);
  t.backward(l);
  EXPECT_EQ(t.value(l)(0, 0), 0.0);
  EXPECT_EQ(grads[0], 0.0);
  EXPECT_EQ(grads[1], 0.0);
}

TEST(Autodiff, ShapeMismatchThrows) {
  std::vector<double> p(6, 1.0);
  Tape t(p, {});
  EXPECT_THROW(matmul(t, t.parameter(0, 2, 3), t.parameter(0, 2, 3)), std::invalid_argument);
}

}  // namespace
}  // namespace hems::ad
