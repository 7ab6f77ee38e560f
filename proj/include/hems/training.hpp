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

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "hems/model.hpp"

namespace hems {

struct TrainConfig {
  double initial_lr = 0.05;
  int epochs = 20;
  int batch_size = 16;
  int early_stopping_patience = 5;
  double momentum = 0.9;
  double clip_norm = 1.0;
  std::uint64_t seed = 0;
  ExecutionPolicy policy = ExecutionPolicy::kParallel;

  void validate() const;
  // Learning rate of a 0-based epoch: linear decay from initial_lr towards 0.
  double lr_at(int epoch) const;
};

// LR / 10, epochs / 5 (at least 1), patience 3.
TrainConfig default_finetune_config(const TrainConfig& pretrain);

struct EpochRecord {
  int epoch = 0;  // 1-based
  double train_loss = 0.0;
  double val_loss = 0.0;
  double lr = 0.0;

  friend bool operator==(const EpochRecord&, const EpochRecord&) = default;
};

struct TrainResult {
  ModelWeights weights;  // best-validation weights
  std::vector<EpochRecord> history;
  int best_epoch = 0;    // 0 when no epoch ran
  bool stopped_early = false;
};

// Mini-batch gradient descent with momentum, gradient-norm clipping and a
// per-epoch linear learning-rate decay. After every epoch the validation
// pinball loss is evaluated; training stops once it has not improved for
// `early_stopping_patience` epochs. Throws TrainingError (with the epoch)
// when the loss or gradient becomes non-finite.
TrainResult train(const ModelWeights& initial, std::span<const ForecastSample> train_set,
                  std::span<const ForecastSample> val_set, const TrainConfig& config);

// Same loop, started from pretrained weights. Requires the finetune LR not to
// exceed the pretraining one. Epochs are not compared: a household epoch is a
// few windows, a pretraining epoch covers the whole cohort.
TrainResult finetune(const ModelWeights& global, std::span<const ForecastSample> local_train,
                     std::span<const ForecastSample> local_val, const TrainConfig& finetune_config,
                     const TrainConfig& pretrain_config);

// `epoch,train_loss,val_loss,lr`
void write_history_csv(const std::filesystem::path& path, std::span<const EpochRecord> history);

}  // namespace hems
