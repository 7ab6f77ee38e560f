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

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hems/autodiff.hpp"
#include "hems/parallel.hpp"
#include "hems/timeseries.hpp"

namespace hems {

struct ModelConfig {
  int input_window = 672;
  int horizon = 96;
  std::vector<double> quantiles{0.1, 0.5, 0.9};
  int hidden_size = 32;
  int attention_heads = 4;
  double dropout = 0.1;
  // Calendar covariates fed to the past and future variable selection.
  // The past side always carries the target as an extra first variable.
  std::vector<CalendarFeature> past_covariates{
      CalendarFeature::kQuarterSin, CalendarFeature::kQuarterCos, CalendarFeature::kWeekdaySin,
      CalendarFeature::kWeekdayCos, CalendarFeature::kIsWeekend};
  std::vector<CalendarFeature> future_covariates{
      CalendarFeature::kQuarterSin, CalendarFeature::kQuarterCos, CalendarFeature::kWeekdaySin,
      CalendarFeature::kWeekdayCos, CalendarFeature::kIsWeekend};

  // Throws ConfigError.
  void validate() const;
  // Quantile level closest to 0.5 (lower one on ties); its head is the
  // unconstrained one, the others are softplus offsets from it.
  int anchor_quantile() const;
  int past_variables() const { return 1 + static_cast<int>(past_covariates.size()); }
  int future_variables() const { return static_cast<int>(future_covariates.size()); }

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

// One named row-major parameter block inside the flat weight vector.
struct ParamBlock {
  std::string name;  // "<component>.<layer>.<w|b|gain|bias>"
  std::string component;
  std::size_t offset = 0;
  int rows = 0;
  int cols = 0;
  int fan_in = 0;  // init bound is 1/sqrt(fan_in); 0 marks layer-norm gain/bias
  bool is_gain = false;

  std::size_t size() const { return static_cast<std::size_t>(rows) * cols; }
};

// Component order, which is also the on-disk parameter order:
//   past_embedding, future_embedding, past_vsn, future_vsn, encoder,
//   encoder_gate, attention, attention_gate, post_grn, output_heads.
class ParameterLayout {
 public:
  explicit ParameterLayout(const ModelConfig& config);

  const std::vector<ParamBlock>& blocks() const { return blocks_; }
  const ParamBlock& block(const std::string& name) const;
  std::size_t total() const { return total_; }
  // (component, parameter count) in layout order.
  std::vector<std::pair<std::string, std::size_t>> components() const;

 private:
  void add(const std::string& component, const std::string& name, int rows, int cols, int fan_in,
           bool is_gain = false);
  void add_linear(const std::string& prefix, const std::string& component, int in, int out);
  void add_grn(const std::string& component, int in, int hidden, int out);
  void add_gate(const std::string& component, int width);

  std::vector<ParamBlock> blocks_;
  std::size_t total_ = 0;
};

// Closed-form parameter count (documented in README):
//   embeddings 2H(np + nf); GRN(i,h,o) = ih + h + h^2 + h + 2(ho + o)
//   + [i != o](io + o) + 2o; VSNs GRN(np H, H, np) + GRN(nf H, H, nf);
//   GRU 6H^2 + 6H; two gates 2(2H^2 + 4H); attention 4H^2 + 4H;
//   post GRN(H, H, H); heads Q(H + 1).
std::size_t parameter_count(const ModelConfig& config);

struct ModelWeights {
  ModelConfig config;
  std::uint64_t rng_seed = 0;
  std::vector<double> values;

  friend bool operator==(const ModelWeights&, const ModelWeights&) = default;
};

// Weights uniform in +-1/sqrt(fan_in), layer-norm gains 1 and biases 0,
// drawn block by block in layout order from mt19937_64(seed).
ModelWeights init_model(const ModelConfig& config, std::uint64_t seed);

// Model inputs for one forecast origin, in scaled units.
struct ForecastSample {
  std::vector<double> past_target;   // input_window values
  ad::Matrix past_covariates;        // input_window x |past_covariates|
  ad::Matrix future_covariates;      // horizon x |future_covariates|
  std::optional<std::vector<double>> target;  // horizon values; absent at inference
};

// Builds the sample whose forecast window starts at `origin` (an index into
// `scaled`). Needs origin >= input_window; the target is attached when the
// series covers origin + horizon.
ForecastSample make_sample(const ModelConfig& config, const QuarterSeries& scaled,
                           std::size_t origin, bool with_target);

// Samples with origins first, first + stride, ... while origin + horizon <= last.
std::vector<ForecastSample> make_samples(const ModelConfig& config, const QuarterSeries& scaled,
                                         std::size_t first_origin, std::size_t last_end,
                                         std::size_t stride);

// horizon x |quantiles|; non-decreasing along each row.
struct QuantileForecast {
  ad::Matrix values;

  int steps() const { return static_cast<int>(values.rows()); }
  int levels() const { return static_cast<int>(values.cols()); }
  std::vector<double> column(int level) const;
};

// Inference (dropout off). Throws DataError on shape mismatch.
QuantileForecast forward(const ModelWeights& weights, const ForecastSample& sample);

struct LossOptions {
  bool training = false;      // enables dropout
  std::uint64_t dropout_seed = 0;
  ExecutionPolicy policy = ExecutionPolicy::kParallel;
};

struct LossAndGradients {
  double loss = 0.0;
  std::vector<double> gradients;
};

// Mean pinball loss over samples, horizon steps and quantiles, with its
// gradient. Per-sample gradients are reduced in sample order, so serial and
// parallel execution agree bit for bit. Dropout masks are seeded from
// (dropout_seed, sample index).
LossAndGradients loss_and_gradients(const ModelWeights& weights,
                                    std::span<const ForecastSample> batch,
                                    const LossOptions& options = {});

// Mean pinball loss in inference mode (no gradients).
double evaluate_loss(const ModelWeights& weights, std::span<const ForecastSample> samples,
                     ExecutionPolicy policy = ExecutionPolicy::kParallel);

}  // namespace hems
