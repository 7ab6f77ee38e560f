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

#include "hems/model.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "hems/errors.hpp"
#include "hems/seeding.hpp"

namespace hems {

using ad::Matrix;
using ad::Tape;
using ad::Var;

void ModelConfig::validate() const {
  auto fail = [](const std::string& msg) { throw ConfigError("model config: " + msg); };
  if (horizon < 1) fail("horizon must be >= 1");
  if (input_window < horizon) fail("input_window must be >= horizon");
  if (quantiles.empty()) fail("at least one quantile level is required");
  for (std::size_t k = 0; k < quantiles.size(); ++k) {
    if (!(quantiles[k] > 0.0 && quantiles[k] < 1.0)) fail("quantile levels must lie in (0, 1)");
    if (k > 0 && !(quantiles[k] > quantiles[k - 1])) fail("quantile levels must increase");
  }
  if (hidden_size < 1) fail("hidden_size must be >= 1");
  if (attention_heads < 1) fail("attention_heads must be >= 1");
  if (hidden_size % attention_heads != 0) {
    fail("hidden_size " + std::to_string(hidden_size) + " is not divisible by attention_heads " +
         std::to_string(attention_heads));
  }
  if (!(dropout >= 0.0 && dropout < 1.0)) fail("dropout must lie in [0, 1)");
  if (future_covariates.empty()) fail("at least one future covariate is required");
}

int ModelConfig::anchor_quantile() const {
  int best = 0;
  for (int k = 1; k < static_cast<int>(quantiles.size()); ++k) {
    if (std::abs(quantiles[k] - 0.5) < std::abs(quantiles[best] - 0.5)) best = k;
  }
  return best;
}

ParameterLayout::ParameterLayout(const ModelConfig& config) {
  config.validate();
  const int h = config.hidden_size;
  const int np = config.past_variables();
  const int nf = config.future_variables();
  const int nq = static_cast<int>(config.quantiles.size());

  add("past_embedding", "past_embedding.w", np, h, 1);
  add("past_embedding", "past_embedding.b", np, h, 1);
  add("future_embedding", "future_embedding.w", nf, h, 1);
  add("future_embedding", "future_embedding.b", nf, h, 1);
  add_grn("past_vsn", np * h, h, np);
  add_grn("future_vsn", nf * h, h, nf);
  add("encoder", "encoder.wx", h, 3 * h, h);
  add("encoder", "encoder.bx", 1, 3 * h, h);
  add("encoder", "encoder.wh", h, 3 * h, h);
  add("encoder", "encoder.bh", 1, 3 * h, h);
  add_gate("encoder_gate", h);
  add_linear("attention.q", "attention", h, h);
  add_linear("attention.k", "attention", h, h);
  add_linear("attention.v", "attention", h, h);
  add_linear("attention.o", "attention", h, h);
  add_gate("attention_gate", h);
  add_grn("post_grn", h, h, h);
  add_linear("output_heads", "output_heads", h, nq);
}

void ParameterLayout::add(const std::string& component, const std::string& name, int rows,
                          int cols, int fan_in, bool is_gain) {
  blocks_.push_back(ParamBlock{name, component, total_, rows, cols, fan_in, is_gain});
  total_ += static_cast<std::size_t>(rows) * cols;
}

void ParameterLayout::add_linear(const std::string& prefix, const std::string& component, int in,
                                 int out) {
  add(component, prefix + ".w", in, out, in);
  add(component, prefix + ".b", 1, out, in);
}

void ParameterLayout::add_grn(const std::string& component, int in, int hidden, int out) {
  add_linear(component + ".fc1", component, in, hidden);
  add_linear(component + ".fc2", component, hidden, hidden);
  add_linear(component + ".glu_a", component, hidden, out);
  add_linear(component + ".glu_b", component, hidden, out);
  if (in != out) add_linear(component + ".skip", component, in, out);
  add(component, component + ".ln.gain", 1, out, 0, true);
  add(component, component + ".ln.bias", 1, out, 0);
}

void ParameterLayout::add_gate(const std::string& component, int width) {
  add_linear(component + ".glu_a", component, width, width);
  add_linear(component + ".glu_b", component, width, width);
  add(component, component + ".ln.gain", 1, width, 0, true);
  add(component, component + ".ln.bias", 1, width, 0);
}

const ParamBlock& ParameterLayout::block(const std::string& name) const {
  for (const auto& b : blocks_) {
    if (b.name == name) return b;
  }
  throw ConfigError("unknown parameter block " + name);
}

std::vector<std::pair<std::string, std::size_t>> ParameterLayout::components() const {
  std::vector<std::pair<std::string, std::size_t>> out;
  for (const auto& b : blocks_) {
    if (out.empty() || out.back().first != b.component) out.emplace_back(b.component, 0);
    out.back().second += b.size();
  }
  return out;
}

std::size_t parameter_count(const ModelConfig& config) {
  return ParameterLayout(config).total();
}

ModelWeights init_model(const ModelConfig& config, std::uint64_t seed) {
  ParameterLayout layout(config);
  ModelWeights w{config, seed, std::vector<double>(layout.total())};
  std::mt19937_64 rng(seed);
  for (const auto& b : layout.blocks()) {
    double* p = w.values.data() + b.offset;
    if (b.fan_in == 0) {
      std::fill(p, p + b.size(), b.is_gain ? 1.0 : 0.0);
      continue;
    }
    const double bound = 1.0 / std::sqrt(static_cast<double>(b.fan_in));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (std::size_t i = 0; i < b.size(); ++i) p[i] = dist(rng);
  }
  return w;
}

std::vector<double> QuantileForecast::column(int level) const {
  std::vector<double> out(values.rows());
  for (Eigen::Index i = 0; i < values.rows(); ++i) out[i] = values(i, level);
  return out;
}

ForecastSample make_sample(const ModelConfig& config, const QuarterSeries& scaled,
                           std::size_t origin, bool with_target) {
  const auto p = static_cast<std::size_t>(config.input_window);
  const auto f = static_cast<std::size_t>(config.horizon);
  if (origin < p || origin > scaled.size()) {
    throw DataError("make_sample: origin " + std::to_string(origin) +
                    " lacks a full input window");
  }
  if (with_target && origin + f > scaled.size()) {
    throw DataError("make_sample: target window extends past the series");
  }
  ForecastSample s;
  s.past_target.assign(scaled.values().begin() + (origin - p), scaled.values().begin() + origin);
  auto past_cal = calendar_features(scaled.timestamp(origin - p), p);
  auto fut_cal = calendar_features(scaled.timestamp(origin), f);
  s.past_covariates.resize(p, config.past_covariates.size());
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t c = 0; c < config.past_covariates.size(); ++c) {
      s.past_covariates(i, c) = feature_value(past_cal[i], config.past_covariates[c]);
    }
  }
  s.future_covariates.resize(f, config.future_covariates.size());
  for (std::size_t i = 0; i < f; ++i) {
    for (std::size_t c = 0; c < config.future_covariates.size(); ++c) {
      s.future_covariates(i, c) = feature_value(fut_cal[i], config.future_covariates[c]);
    }
  }
  if (with_target) {
    s.target = std::vector<double>(scaled.values().begin() + origin,
                                   scaled.values().begin() + origin + f);
  }
  return s;
}

std::vector<ForecastSample> make_samples(const ModelConfig& config, const QuarterSeries& scaled,
                                         std::size_t first_origin, std::size_t last_end,
                                         std::size_t stride) {
  if (stride == 0) throw ConfigError("make_samples: stride must be >= 1");
  std::vector<ForecastSample> out;
  for (std::size_t origin = first_origin; origin + config.horizon <= last_end; origin += stride) {
    out.push_back(make_sample(config, scaled, origin, true));
  }
  return out;
}

namespace {

void check_sample(const ModelConfig& c, const ForecastSample& s, bool need_target) {
  const auto p = static_cast<Eigen::Index>(c.input_window);
  const auto f = static_cast<Eigen::Index>(c.horizon);
  if (static_cast<Eigen::Index>(s.past_target.size()) != p ||
      s.past_covariates.rows() != p ||
      s.past_covariates.cols() != static_cast<Eigen::Index>(c.past_covariates.size()) ||
      s.future_covariates.rows() != f ||
      s.future_covariates.cols() != static_cast<Eigen::Index>(c.future_covariates.size())) {
    throw DataError("forecast sample shape does not match model config");
  }
  if (need_target) {
    if (!s.target) throw DataError("forecast sample is missing its target");
    if (static_cast<Eigen::Index>(s.target->size()) != f) {
      throw DataError("forecast sample target length does not match horizon");
    }
  }
}

// Builds the forecaster graph on a tape. `dropout_rng` is null in inference.
class GraphBuilder {
 public:
  GraphBuilder(Tape& tape, const ModelConfig& config, const ParameterLayout& layout,
               std::mt19937_64* dropout_rng)
      : t_(tape), c_(config), layout_(layout), rng_(dropout_rng) {}

  Var build(const ForecastSample& s) {
    const int p = c_.input_window;
    const int f = c_.horizon;
    Matrix past_x(p, c_.past_variables());
    past_x.col(0) = Eigen::Map<const Eigen::VectorXd>(s.past_target.data(), p);
    if (past_x.cols() > 1) past_x.rightCols(past_x.cols() - 1) = s.past_covariates;

    Var past = select_variables("past", t_.constant(std::move(past_x)), c_.past_variables());
    Var future = select_variables("future", t_.constant(s.future_covariates),
                                  c_.future_variables());
    Var seq = ad::concat_rows(t_, past, future);

    Var encoded = ad::gru(t_, seq, param("encoder.wx"), param("encoder.bx"), param("encoder.wh"),
                          param("encoder.bh"));
    Var phi = gate("encoder_gate", encoded, seq);

    Var horizon_rows = ad::slice_rows(t_, phi, p, f);
    Var q = linear(horizon_rows, "attention.q");
    Var k = linear(phi, "attention.k");
    Var v = linear(phi, "attention.v");
    Var attended = ad::masked_attention(t_, q, k, v, c_.attention_heads, p);
    Var mixed = linear(attended, "attention.o");
    Var psi = gate("attention_gate", mixed, horizon_rows);
    Var z = grn("post_grn", psi, c_.hidden_size, c_.hidden_size);
    Var raw = linear(z, "output_heads");
    return ad::monotone_quantiles(t_, raw, c_.anchor_quantile());
  }

 private:
  Var param(const std::string& name) {
    const auto& b = layout_.block(name);
    return t_.parameter(b.offset, b.rows, b.cols);
  }

  Var linear(Var x, const std::string& prefix) {
    return ad::linear(t_, x, param(prefix + ".w"), param(prefix + ".b"));
  }

  Var dropout(Var x) {
    if (rng_ == nullptr || c_.dropout <= 0.0) return x;
    const Matrix& v = t_.value(x);
    Matrix mask(v.rows(), v.cols());
    std::bernoulli_distribution keep(1.0 - c_.dropout);
    const double scale = 1.0 / (1.0 - c_.dropout);
    for (Eigen::Index i = 0; i < mask.size(); ++i) mask.data()[i] = keep(*rng_) ? scale : 0.0;
    return ad::mul_constant(t_, x, std::move(mask));
  }

  // LayerNorm(residual + sigmoid(x Wa + ba) * (x Wb + bb)).
  Var gate(const std::string& name, Var x, Var residual) {
    Var g = ad::mul(t_, ad::sigmoid(t_, linear(x, name + ".glu_a")), linear(x, name + ".glu_b"));
    return ad::layer_norm(t_, ad::add(t_, residual, g), param(name + ".ln.gain"),
                          param(name + ".ln.bias"));
  }

  Var grn(const std::string& name, Var a, int in, int out) {
    Var h1 = ad::elu(t_, linear(a, name + ".fc1"));
    Var h2 = dropout(linear(h1, name + ".fc2"));
    Var skip = in != out ? linear(a, name + ".skip") : a;
    return gate(name, h2, skip);
  }

  // Embeds each variable, weights them by a softmax over a GRN of the
  // flattened embeddings, and returns the weighted combination (rows x H).
  Var select_variables(const std::string& side, Var x, int vars) {
    const std::string emb = side + "_embedding";
    Var e = ad::embed(t_, x, param(emb + ".w"), param(emb + ".b"));
    Var logits = grn(side + "_vsn", e, vars * c_.hidden_size, vars);
    Var weights = ad::softmax_rows(t_, logits);
    return ad::weighted_sum(t_, weights, e);
  }

  Tape& t_;
  const ModelConfig& c_;
  const ParameterLayout& layout_;
  std::mt19937_64* rng_;
};

Matrix target_matrix(const ForecastSample& s) {
  return Eigen::Map<const Matrix>(s.target->data(), static_cast<Eigen::Index>(s.target->size()), 1);
}

void check_weights(const ModelWeights& w, const ParameterLayout& layout) {
  if (w.values.size() != layout.total()) {
    throw DataError("weight vector has " + std::to_string(w.values.size()) +
                    " entries, config implies " + std::to_string(layout.total()));
  }
}

}  // namespace

QuantileForecast forward(const ModelWeights& weights, const ForecastSample& sample) {
  ParameterLayout layout(weights.config);
  check_weights(weights, layout);
  check_sample(weights.config, sample, false);
  Tape tape(weights.values, {});
  GraphBuilder builder(tape, weights.config, layout, nullptr);
  Var out = builder.build(sample);
  return QuantileForecast{tape.value(out)};
}

LossAndGradients loss_and_gradients(const ModelWeights& weights,
                                    std::span<const ForecastSample> batch,
                                    const LossOptions& options) {
  if (batch.empty()) throw DataError("loss_and_gradients: empty batch");
  ParameterLayout layout(weights.config);
  check_weights(weights, layout);
  for (const auto& s : batch) check_sample(weights.config, s, true);

  const std::size_t n = batch.size();
  const std::size_t np = layout.total();
  std::vector<double> losses(n);
  std::vector<std::vector<double>> grads(n);
  const long count = static_cast<long>(n);
#pragma omp parallel for schedule(dynamic) if (options.policy == ExecutionPolicy::kParallel)
  for (long i = 0; i < count; ++i) {
    grads[i].assign(np, 0.0);
    std::mt19937_64 rng(splitmix64(options.dropout_seed ^ splitmix64(static_cast<std::uint64_t>(i))));
    Tape tape(weights.values, grads[i]);
    GraphBuilder builder(tape, weights.config, layout, options.training ? &rng : nullptr);
    Var out = builder.build(batch[i]);
    Var loss = ad::pinball_mean(tape, out, target_matrix(batch[i]), weights.config.quantiles);
    tape.backward(loss);
    losses[i] = tape.value(loss)(0, 0);
  }

  LossAndGradients result{0.0, std::vector<double>(np, 0.0)};
  for (std::size_t i = 0; i < n; ++i) {
    result.loss += losses[i];
    for (std::size_t j = 0; j < np; ++j) result.gradients[j] += grads[i][j];
  }
  const double inv = 1.0 / static_cast<double>(n);
  result.loss *= inv;
  for (auto& g : result.gradients) g *= inv;
  return result;
}

double evaluate_loss(const ModelWeights& weights, std::span<const ForecastSample> samples,
                     ExecutionPolicy policy) {
  if (samples.empty()) throw DataError("evaluate_loss: no samples");
  ParameterLayout layout(weights.config);
  check_weights(weights, layout);
  for (const auto& s : samples) check_sample(weights.config, s, true);
  std::vector<double> losses(samples.size());
  const long count = static_cast<long>(samples.size());
#pragma omp parallel for schedule(dynamic) if (policy == ExecutionPolicy::kParallel)
  for (long i = 0; i < count; ++i) {
    Tape tape(weights.values, {});
    GraphBuilder builder(tape, weights.config, layout, nullptr);
    Var out = builder.build(samples[i]);
    double sum = 0.0;
    const Matrix& pred = tape.value(out);
    for (Eigen::Index r = 0; r < pred.rows(); ++r) {
      for (Eigen::Index c = 0; c < pred.cols(); ++c) {
        sum += pinball(weights.config.quantiles[c], (*samples[i].target)[r], pred(r, c));
      }
    }
    losses[i] = sum / static_cast<double>(pred.size());
  }
  double total = 0.0;
  for (double l : losses) total += l;
  return total / static_cast<double>(samples.size());
}

}  // namespace hems
