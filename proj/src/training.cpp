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

#include "hems/training.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>

#include "hems/csv.hpp"
#include "hems/errors.hpp"
#include "hems/seeding.hpp"

namespace hems {

void TrainConfig::validate() const {
  auto fail = [](const std::string& msg) { throw ConfigError("train config: " + msg); };
  if (!(initial_lr >= 0.0) || !std::isfinite(initial_lr)) fail("initial_lr must be >= 0");
  if (epochs < 0) fail("epochs must be >= 0");
  if (batch_size < 1) fail("batch_size must be >= 1");
  if (early_stopping_patience < 1) fail("early_stopping_patience must be >= 1");
  if (epochs > 0 && early_stopping_patience > epochs) fail("patience must not exceed epochs");
  if (!(momentum >= 0.0 && momentum < 1.0)) fail("momentum must lie in [0, 1)");
  if (!(clip_norm > 0.0)) fail("clip_norm must be > 0");
}

double TrainConfig::lr_at(int epoch) const {
  if (epochs <= 0) return 0.0;
  return initial_lr * (1.0 - static_cast<double>(epoch) / static_cast<double>(epochs));
}

TrainConfig default_finetune_config(const TrainConfig& pretrain) {
  TrainConfig f = pretrain;
  f.initial_lr = pretrain.initial_lr / 10.0;
  f.epochs = std::max(1, pretrain.epochs / 5);
  f.early_stopping_patience = std::min(3, f.epochs);
  return f;
}

TrainResult train(const ModelWeights& initial, std::span<const ForecastSample> train_set,
                  std::span<const ForecastSample> val_set, const TrainConfig& config) {
  config.validate();
  TrainResult result{initial, {}, 0, false};
  if (config.epochs == 0) return result;
  if (train_set.empty()) throw DataError("train: empty training set");
  if (val_set.empty()) throw DataError("train: empty validation set");

  ModelWeights current = initial;
  std::vector<double> velocity(current.values.size(), 0.0);
  std::vector<std::size_t> order(train_set.size());
  std::vector<ForecastSample> batch;
  double best_val = std::numeric_limits<double>::infinity();
  int bad_epochs = 0;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const double lr = config.lr_at(epoch);
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(derive_seed(config.seed, "shuffle/" + std::to_string(epoch)));
    std::shuffle(order.begin(), order.end(), rng);

    double loss_sum = 0.0;
    const std::size_t bs = static_cast<std::size_t>(config.batch_size);
    for (std::size_t start = 0, b = 0; start < order.size(); start += bs, ++b) {
      const std::size_t end = std::min(order.size(), start + bs);
      batch.clear();
      for (std::size_t i = start; i < end; ++i) batch.push_back(train_set[order[i]]);
      LossOptions opts;
      opts.training = true;
      opts.dropout_seed =
          derive_seed(config.seed, "dropout/" + std::to_string(epoch) + "/" + std::to_string(b));
      opts.policy = config.policy;
      auto lg = loss_and_gradients(current, batch, opts);
      double norm_sq = 0.0;
      for (double g : lg.gradients) norm_sq += g * g;
      if (!std::isfinite(lg.loss) || !std::isfinite(norm_sq)) {
        throw TrainingError("training diverged (non-finite loss) at epoch " +
                                std::to_string(epoch + 1),
                            epoch + 1);
      }
      const double norm = std::sqrt(norm_sq);
      const double clip = norm > config.clip_norm ? config.clip_norm / norm : 1.0;
      for (std::size_t j = 0; j < velocity.size(); ++j) {
        velocity[j] = config.momentum * velocity[j] + clip * lg.gradients[j];
        current.values[j] -= lr * velocity[j];
      }
      loss_sum += lg.loss * static_cast<double>(end - start);
    }
    const double train_loss = loss_sum / static_cast<double>(order.size());
    const double val_loss = evaluate_loss(current, val_set, config.policy);
    if (!std::isfinite(val_loss)) {
      throw TrainingError("validation loss became non-finite at epoch " +
                              std::to_string(epoch + 1),
                          epoch + 1);
    }
    result.history.push_back(EpochRecord{epoch + 1, train_loss, val_loss, lr});
    if (val_loss < best_val) {
      best_val = val_loss;
      result.weights = current;
      result.best_epoch = epoch + 1;
      bad_epochs = 0;
    } else if (++bad_epochs >= config.early_stopping_patience) {
      result.stopped_early = epoch + 1 < config.epochs;
      break;
    }
  }
  return result;
}

TrainResult finetune(const ModelWeights& global, std::span<const ForecastSample> local_train,
                     std::span<const ForecastSample> local_val, const TrainConfig& finetune_config,
                     const TrainConfig& pretrain_config) {
  if (finetune_config.initial_lr > pretrain_config.initial_lr) {
    throw ConfigError("finetune: learning rate exceeds the pretraining learning rate");
  }
  return train(global, local_train, local_val, finetune_config);
}

void write_history_csv(const std::filesystem::path& path, std::span<const EpochRecord> history) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << "epoch,train_loss,val_loss,lr\n";
  for (const auto& r : history) {
    out << r.epoch << ',' << format_double(r.train_loss) << ',' << format_double(r.val_loss) << ','
        << format_double(r.lr) << '\n';
  }
}

}  // namespace hems
