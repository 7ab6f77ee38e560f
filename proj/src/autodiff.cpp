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

#include <cmath>
#include <limits>
#include <stdexcept>

namespace hems::ad {

namespace {

double sigmoid_value(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

}  // namespace

double softplus_value(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

Tape::Tape(std::span<const double> params, std::span<double> grads)
    : params_(params), grads_(grads) {
  nodes_.reserve(128);
}

Var Tape::push(Matrix value, Backward backward) {
  nodes_.push_back(Node{std::move(value), Matrix(), recording() ? std::move(backward) : nullptr});
  return Var{static_cast<int>(nodes_.size()) - 1};
}

Matrix& Tape::grad(Var v) {
  Node& node = nodes_[v.id];
  if (node.grad.size() == 0) node.grad = Matrix::Zero(node.value.rows(), node.value.cols());
  return node.grad;
}

Var Tape::constant(Matrix value) { return push(std::move(value), nullptr); }

Var Tape::parameter(std::size_t offset, Eigen::Index rows, Eigen::Index cols) {
  require(offset + static_cast<std::size_t>(rows * cols) <= params_.size(),
          "parameter block outside parameter vector");
  Matrix value = Eigen::Map<const Matrix>(params_.data() + offset, rows, cols);
  Var self{static_cast<int>(nodes_.size())};
  return push(std::move(value), [self, offset](Tape& t) {
    if (!t.has_grad(self)) return;
    const Matrix& g = t.grad(self);
    Eigen::Map<Matrix>(t.grads_.data() + offset, g.rows(), g.cols()) += g;
  });
}

void Tape::backward(Var root) {
  require(recording(), "backward on a tape without gradient storage");
  require(value(root).size() == 1, "backward root must be a scalar");
  grad(root)(0, 0) = 1.0;
  for (int i = root.id; i >= 0; --i) {
    if (nodes_[i].backward) nodes_[i].backward(*this);
  }
}

Var matmul(Tape& t, Var a, Var b) {
  require(t.value(a).cols() == t.value(b).rows(), "matmul shape mismatch");
  Matrix out = t.value(a) * t.value(b);
  Var self{static_cast<int>(t.size())};
  return t.push(std::move(out), [self, a, b](Tape& t) {
    if (!t.has_grad(self)) return;
    const Matrix& g = t.grad(self);
    t.grad(a).noalias() += g * t.value(b).transpose();
    t.grad(b).noalias() += t.value(a).transpose() * g;
  });
}

Var linear(Tape& t, Var x, Var w, Var b) {
  const Matrix& xv = t.value(x);
  const Matrix& wv = t.value(w);
  const Matrix& bv = t.value(b);
  require(xv.cols() == wv.rows() && bv.rows() == 1 && bv.cols() == wv.cols(),
          "linear shape mismatch");
  Matrix out = xv * wv;
  out.rowwise() += bv.row(0);
  Var self{static_cast<int>(t.size())};
  return t.push(std::move(out), [self, x, w, b](Tape& t) {
    if (!t.has_grad(self)) return;
    const Matrix& g = t.grad(self);
    t.grad(x).noalias() += g * t.value(w).transpose();
    t.grad(w).noalias() += t.value(x).transpose() * g;
    t.grad(b).row(0) += g.colwise().sum();
  });
}

Var add(Tape& t, Var a, Var b) {
  require(t.value(a).rows() == t.value(b).rows() && t.value(a).cols() == t.value(b).cols(),
          "add shape mismatch");
  Matrix out = t.value(a) + t.value(b);
  Var self{static_cast<int>(t.size())};
  return t.push(std::move(out), [self, a, b](Tape& t) {
    if (!t.has_grad(self)) return;
    const Matrix& g = t.grad(self);
    t.grad(a) += g;
    t.grad(b) += g;
  });
}

Var mul(Tape& t, Var a, Var b) {
  require(t.value(a).rows() == t.value(b).rows() && t.value(a).cols() == t.value(b).cols(),
          "mul shape mismatch");
  Matrix out = t.value(a).cwiseProduct(t.value(b));
  Var self{static_cast<int>(t.size())};
  return t.push(std::move(out), [self, a, b](Tape& t) {
    if (!t.has_grad(self)) return;
    const Matrix& g = t.grad(self);
    t.grad(a) += g.cwiseProduct(t.value(b));
    t.grad(b) += g.cwiseProduct(t.value(a));
  });
}

Var mul_constant(Tape& t, Var a, Matrix mask) {
  require(t.value(a).rows() == mask.rows() && t.value(a).cols() == mask.cols(),
          "mask shape mismatch");
  Matrix out = t.value(a).cwiseProduct(mask);
  Var self{static_cast<int>(t.size())};
  return t.push(std::move(out), [self, a, mask = std::move(mask)](Tape& t) {
    if (!t.has_grad(self)) return;
    t.grad(a) += t.grad(self).cwiseProduct(mask);
  });
}

Var elu(Tape& t, Var x) {
  Matrix out = t.value(x).unaryExpr([](double v) { return v > 0.0 ? v : std::expm1(v); });
  Var self{static_cast<int>(t.size())};
  return t.push(std::move(out), [self, x](Tape& t) {
    if (!t.has_grad(self)) return;
    Matrix d = t.value(x).unaryExpr([](double v) { return v > 0.0 ? 1.0 : std::exp(v); });
    t.grad(x) += t.grad(self).cwiseProduct(d);
  });
}

Var sigmoid(Tape& t, Var x) {
  Matrix out = t.value(x).unaryExpr(&sigmoid_value);
  Var self{static_cast<int>(t.size())};
  return t.push(std::move(out), [self, x](Tape& t) {
    if (!t.has_grad(self)) return;
    const Matrix& s = t.value(self);
    t.grad(x) += t.grad(self).cwiseProduct(s.cwiseProduct((1.0 - s.array()).matrix()));
  });
}

Var softplus(Tape& t, Var x) {
  Matrix out = t.value(x).unaryExpr(&softplus_value);
  Var self{static_cast<int>(t.size())};
  return t.push(std::move(out), [self, x](Tape& t) {
    if (!t.has_grad(self)) return;
    t.grad(x) += t.grad(self).cwiseProduct(t.value(x).unaryExpr(&sigmoid_value));
  });
}

Var layer_norm(Tape& t, Var x, Var gain, Var bias, double eps) {
  const Matrix& xv = t.value(x);
  const Eigen::Index n = xv.rows(), d = xv.cols();
  require(t.value(gain).rows() == 1 && t.value(gain).cols() == d && t.value(bias).cols() == d,
          "layer_norm shape mismatch");
  Matrix xhat(n, d);
  RowVector inv_std(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double mean = xv.row(i).mean();
    double var = (xv.row(i).array() - mean).square().mean();
    inv_std(i) = 1.0 / std::sqrt(var + eps);
    xhat.row(i) = (xv.row(i).array() - mean) * inv_std(i);
  }
  Matrix out = xhat.array().rowwise() * t.value(gain).row(0).array();
  out.rowwise() += t.value(bias).row(0);
  Var self{static_cast<int>(t.size())};
  return t.push(std::move(out), [self, x, gain, bias, xhat = std::move(xhat),
                                 inv_std = std::move(inv_std)](Tape& t) {
    if (!t.has_grad(self)) return;
    const Matrix& g = t.grad(self);
    t.grad(gain).row(0) += g.cwiseProduct(xhat).colwise().sum();
    t.grad(bias).row(0) += g.colwise().sum();
    Matrix dxhat = g.array().rowwise() * t.value(gain).row(0).array();
    Matrix& gx = t.grad(x);
    for (Eigen::Index i = 0; i < dxhat.rows(); ++i) {
      double m1 = dxhat.row(i).mean();
      double m2 = dxhat.row(i).cwiseProduct(xhat.row(i)).mean();
      gx.row(i).array() += inv_std(i) * (dxhat.row(i).array() - m1 - xhat.row(i).array() * m2);
    }
  });
}

Var softmax_rows(Tape& t, Var x) {
  const Matrix& xv = t.value(x);
  Matrix out(xv.rows(), xv.cols());
  for (Eigen::Index i = 0; i < xv.rows(); ++i) {
    double m = xv.row(i).maxCoeff();
    out.row(i) = (xv.row(i).array() - m).exp();
    out.row(i) /= out.row(i).sum();
  }
  Var self{static_cast<int>(t.size())};
  return t.push(std::move(out), [self, x](Tape& t) {
    if (!t.has_grad(self)) return;
    const Matrix& y = t.value(self);
    const Matrix& g = t.grad(self);
    Matrix& gx = t.grad(x);
    for (Eigen::Index i = 0; i < y.rows(); ++i) {
      double dot = g.row(i).dot(y.row(i));
      gx.row(i).array() += y.row(i).array() * (g.row(i).array() - dot);
    }
  });
}

Var embed(Tape& t, Var x, Var w, Var b) {
  const Matrix& xv = t.value(x);
  const Matrix& wv = t.value(w);
  const Matrix& bv = t.value(b);
  const Eigen::Index n = xv.rows(), vars = xv.cols(), h = wv.cols();
  require(wv.rows() == vars && bv.rows() == vars && bv.cols() == h, "embed shape mismatch");
  Matrix out(n, vars * h);
  for (Eigen::Index j = 0; j < vars; ++j) {
    out.middleCols(j * h, h) = xv.col(j) * wv.row(j);
    out.middleCols(j * h, h).rowwise() += bv.row(j);
  }
  Var self{static_cast<int>(t.size())};
  return t.push(std::move(out), [self, x, w, b](Tape& t) {
    if (!t.has_grad(self)) return;
    const Matrix& g = t.grad(self);
    const Matrix& xv = t.value(x);
    const Matrix& wv = t.value(w);
    const Eigen::Index vars = xv.cols(), h = wv.cols();
    Matrix& gx = t.grad(x);
    Matrix& gw = t.grad(w);
    Matrix& gb = t.grad(b);
    for (Eigen::Index j = 0; j < vars; ++j) {
      auto gj = g.middleCols(j * h, h);
      gx.col(j) += gj * wv.row(j).transpose();
      gw.row(j) += xv.col(j).transpose() * gj;
      gb.row(j) += gj.colwise().sum();
    }
  });
}

Var weighted_sum(Tape& t, Var weights, Var e) {
  const Matrix& wv = t.value(weights);
  const Matrix& ev = t.value(e);
  const Eigen::Index n = wv.rows(), vars = wv.cols();
  require(ev.rows() == n && ev.cols() % vars == 0, "weighted_sum shape mismatch");
  const Eigen::Index h = ev.cols() / vars;
  Matrix out = Matrix::Zero(n, h);
  for (Eigen::Index j = 0; j < vars; ++j) {
    out.array() += ev.middleCols(j * h, h).array().colwise() * wv.col(j).array();
  }
  Var self{static_cast<int>(t.size())};
  return t.push(std::move(out), [self, weights, e, h](Tape& t) {
    if (!t.has_grad(self)) return;
    const Matrix& g = t.grad(self);
    const Matrix& wv = t.value(weights);
    const Matrix& ev = t.value(e);
    Matrix& gw = t.grad(weights);
    Matrix& ge = t.grad(e);
    for (Eigen::Index j = 0; j < wv.cols(); ++j) {
      gw.col(j) += ev.middleCols(j * h, h).cwiseProduct(g).rowwise().sum();
      ge.middleCols(j * h, h).array() += g.array().colwise() * wv.col(j).array();
    }
  });
}

Var slice_rows(Tape& t, Var x, Eigen::Index start, Eigen::Index count) {
  require(start >= 0 && start + count <= t.value(x).rows(), "slice_rows out of range");
  Matrix out = t.value(x).middleRows(start, count);
  Var self{static_cast<int>(t.size())};
  return t.push(std::move(out), [self, x, start, count](Tape& t) {
    if (!t.has_grad(self)) return;
    t.grad(x).middleRows(start, count) += t.grad(self);
  });
}

Var concat_rows(Tape& t, Var top, Var bottom) {
  const Matrix& a = t.value(top);
  const Matrix& b = t.value(bottom);
  require(a.cols() == b.cols(), "concat_rows column mismatch");
  Matrix out(a.rows() + b.rows(), a.cols());
  out.topRows(a.rows()) = a;
  out.bottomRows(b.rows()) = b;
  const Eigen::Index split = a.rows();
  Var self{static_cast<int>(t.size())};
  return t.push(std::move(out), [self, top, bottom, split](Tape& t) {
    if (!t.has_grad(self)) return;
    const Matrix& g = t.grad(self);
    t.grad(top) += g.topRows(split);
    t.grad(bottom) += g.bottomRows(g.rows() - split);
  });
}

Var gru(Tape& t, Var x, Var wx, Var bx, Var wh, Var bh) {
  const Matrix& xv = t.value(x);
  const Matrix& whv = t.value(wh);
  const Eigen::Index seq = xv.rows(), h = whv.rows();
  require(t.value(wx).rows() == xv.cols() && t.value(wx).cols() == 3 * h &&
              whv.cols() == 3 * h && t.value(bx).cols() == 3 * h && t.value(bh).cols() == 3 * h,
          "gru shape mismatch");
  // Input contributions for all steps in one product.
  Matrix xg = xv * t.value(wx);
  xg.rowwise() += t.value(bx).row(0);

  Matrix hs(seq, h);        // outputs h_t
  Matrix gates(seq, 3 * h);  // r, z, n after nonlinearity
  Matrix hn(seq, h);         // h_{t-1} W_hn + b_hn
  RowVector hprev = RowVector::Zero(h);
  RowVector hg(3 * h);
  for (Eigen::Index s = 0; s < seq; ++s) {
    hg.noalias() = hprev * whv;
    hg += t.value(bh).row(0);
    for (Eigen::Index k = 0; k < h; ++k) {
      double r = sigmoid_value(xg(s, k) + hg(k));
      double z = sigmoid_value(xg(s, h + k) + hg(h + k));
      double n = std::tanh(xg(s, 2 * h + k) + r * hg(2 * h + k));
      gates(s, k) = r;
      gates(s, h + k) = z;
      gates(s, 2 * h + k) = n;
      hn(s, k) = hg(2 * h + k);
      hs(s, k) = (1.0 - z) * n + z * hprev(k);
    }
    hprev = hs.row(s);
  }
  Var self{static_cast<int>(t.size())};
  return t.push(std::move(hs), [self, x, wx, bx, wh, bh, gates = std::move(gates),
                                hn = std::move(hn)](Tape& t) {
    if (!t.has_grad(self)) return;
    const Matrix& g = t.grad(self);
    const Matrix& hs = t.value(self);
    const Matrix& whv = t.value(wh);
    const Eigen::Index seq = hs.rows(), h = hs.cols();
    Matrix dxg(seq, 3 * h);
    Matrix dhg(seq, 3 * h);
    Matrix hprevs = Matrix::Zero(seq, h);
    if (seq > 1) hprevs.bottomRows(seq - 1) = hs.topRows(seq - 1);
    RowVector dh_next = RowVector::Zero(h);
    RowVector dh(h);
    for (Eigen::Index s = seq - 1; s >= 0; --s) {
      dh = g.row(s) + dh_next;
      for (Eigen::Index k = 0; k < h; ++k) {
        double r = gates(s, k), z = gates(s, h + k), n = gates(s, 2 * h + k);
        double hp = hprevs(s, k);
        double dn = dh(k) * (1.0 - z);
        double dz = dh(k) * (hp - n);
        double dn_pre = dn * (1.0 - n * n);
        double dr = dn_pre * hn(s, k);
        double dr_pre = dr * r * (1.0 - r);
        double dz_pre = dz * z * (1.0 - z);
        dxg(s, k) = dr_pre;
        dxg(s, h + k) = dz_pre;
        dxg(s, 2 * h + k) = dn_pre;
        dhg(s, k) = dr_pre;
        dhg(s, h + k) = dz_pre;
        dhg(s, 2 * h + k) = dn_pre * r;
        dh_next(k) = dh(k) * z;
      }
      dh_next.noalias() += dhg.row(s) * whv.transpose();
    }
    t.grad(wh).noalias() += hprevs.transpose() * dhg;
    t.grad(bh).row(0) += dhg.colwise().sum();
    t.grad(wx).noalias() += t.value(x).transpose() * dxg;
    t.grad(bx).row(0) += dxg.colwise().sum();
    t.grad(x).noalias() += dxg * t.value(wx).transpose();
  });
}

Var masked_attention(Tape& t, Var q, Var k, Var v, int heads, Eigen::Index query_offset) {
  const Matrix& qv = t.value(q);
  const Matrix& kv = t.value(k);
  const Matrix& vv = t.value(v);
  const Eigen::Index nq = qv.rows(), nk = kv.rows(), d = qv.cols();
  require(heads > 0 && d % heads == 0 && kv.cols() == d && vv.cols() == d && vv.rows() == nk,
          "attention shape mismatch");
  require(query_offset + nq <= nk, "attention queries extend beyond keys");
  const Eigen::Index dk = d / heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dk));
  std::vector<Matrix> probs(heads);
  Matrix out(nq, d);
  for (int hd = 0; hd < heads; ++hd) {
    Matrix s = (qv.middleCols(hd * dk, dk) * kv.middleCols(hd * dk, dk).transpose()) * scale;
    for (Eigen::Index i = 0; i < nq; ++i) {
      const Eigen::Index visible = query_offset + i + 1;
      double m = s.row(i).head(visible).maxCoeff();
      s.row(i).head(visible) = (s.row(i).head(visible).array() - m).exp();
      s.row(i).head(visible) /= s.row(i).head(visible).sum();
      s.row(i).tail(nk - visible).setZero();
    }
    out.middleCols(hd * dk, dk).noalias() = s * vv.middleCols(hd * dk, dk);
    probs[hd] = std::move(s);
  }
  Var self{static_cast<int>(t.size())};
  return t.push(std::move(out), [self, q, k, v, heads, dk, scale,
                                 probs = std::move(probs)](Tape& t) {
    if (!t.has_grad(self)) return;
    const Matrix& g = t.grad(self);
    const Matrix& qv = t.value(q);
    const Matrix& kv = t.value(k);
    const Matrix& vv = t.value(v);
    Matrix& gq = t.grad(q);
    Matrix& gk = t.grad(k);
    Matrix& gv = t.grad(v);
    for (int hd = 0; hd < heads; ++hd) {
      const Matrix& a = probs[hd];
      auto gh = g.middleCols(hd * dk, dk);
      gv.middleCols(hd * dk, dk).noalias() += a.transpose() * gh;
      Matrix da = gh * vv.middleCols(hd * dk, dk).transpose();
      Matrix ds(a.rows(), a.cols());
      for (Eigen::Index i = 0; i < a.rows(); ++i) {
        double dot = da.row(i).dot(a.row(i));
        ds.row(i) = a.row(i).array() * (da.row(i).array() - dot);
      }
      ds *= scale;
      gq.middleCols(hd * dk, dk).noalias() += ds * kv.middleCols(hd * dk, dk);
      gk.middleCols(hd * dk, dk).noalias() += ds.transpose() * qv.middleCols(hd * dk, dk);
    }
  });
}

Var monotone_quantiles(Tape& t, Var raw, int anchor) {
  const Matrix& r = t.value(raw);
  const Eigen::Index n = r.rows(), nq = r.cols();
  require(anchor >= 0 && anchor < nq, "anchor quantile out of range");
  Matrix out(n, nq);
  for (Eigen::Index i = 0; i < n; ++i) {
    out(i, anchor) = r(i, anchor);
    for (Eigen::Index c = anchor + 1; c < nq; ++c) out(i, c) = out(i, c - 1) + softplus_value(r(i, c));
    for (Eigen::Index c = anchor - 1; c >= 0; --c) out(i, c) = out(i, c + 1) - softplus_value(r(i, c));
  }
  Var self{static_cast<int>(t.size())};
  return t.push(std::move(out), [self, raw, anchor](Tape& t) {
    if (!t.has_grad(self)) return;
    Matrix g = t.grad(self);
    const Matrix& r = t.value(raw);
    Matrix& gr = t.grad(raw);
    const Eigen::Index nq = r.cols();
    for (Eigen::Index i = 0; i < r.rows(); ++i) {
      for (Eigen::Index c = nq - 1; c > anchor; --c) {
        gr(i, c) += g(i, c) * sigmoid_value(r(i, c));
        g(i, c - 1) += g(i, c);
      }
      for (Eigen::Index c = 0; c < anchor; ++c) {
        gr(i, c) -= g(i, c) * sigmoid_value(r(i, c));
        g(i, c + 1) += g(i, c);
      }
      gr(i, anchor) += g(i, anchor);
    }
  });
}

Var pinball_mean(Tape& t, Var pred, const Matrix& target, std::span<const double> quantiles) {
  const Matrix& p = t.value(pred);
  require(target.rows() == p.rows() && target.cols() == 1 &&
              static_cast<Eigen::Index>(quantiles.size()) == p.cols(),
          "pinball shape mismatch");
  const double count = static_cast<double>(p.size());
  Matrix dpred(p.rows(), p.cols());
  double sum = 0.0;
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    for (Eigen::Index c = 0; c < p.cols(); ++c) {
      const double q = quantiles[c];
      const double diff = target(i, 0) - p(i, c);
      sum += std::max(q * diff, (q - 1.0) * diff);
      dpred(i, c) = (diff > 0.0 ? -q : (diff < 0.0 ? 1.0 - q : 0.0)) / count;
    }
  }
  Matrix out(1, 1);
  out(0, 0) = sum / count;
  Var self{static_cast<int>(t.size())};
  return t.push(std::move(out), [self, pred, dpred = std::move(dpred)](Tape& t) {
    if (!t.has_grad(self)) return;
    t.grad(pred) += t.grad(self)(0, 0) * dpred;
  });
}

}  // namespace hems::ad
