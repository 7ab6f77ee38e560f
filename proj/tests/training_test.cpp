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

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "hems/errors.hpp"

namespace hems {
namespace {

ModelConfig tiny_config() {
  ModelConfig c;
  c.input_window = 16;
  c.horizon = 4;
  c.hidden_size = 4;
  c.attention_heads = 2;
  c.dropout = 0.0;
  return c;
}

QuarterSeries sinusoid(std::size_t n, double noise = 0.0, std::uint64_t seed = 0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> eps(0.0, noise > 0 ? noise : 1.0);
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) {
    v[i] = 0.5 + 0.4 * std::sin(2 * M_PI * static_cast<double>(i) / 16.0);
    if (noise > 0) v[i] += eps(rng);
  }
  return QuarterSeries(parse_timestamp("2023-01-02T00:00:00Z"), v, Unit::kDimensionless);
}

std::vector<ForecastSample> samples_of(const QuarterSeries& s, const ModelConfig& c,
                                       std::size_t stride = 3) {
  return make_samples(c, s, c.input_window, s.size(), stride);
}

TrainConfig quick(int epochs) {
  TrainConfig t;
  t.initial_lr = 0.05;
  t.epochs = epochs;
  t.batch_size = 8;
  t.early_stopping_patience = epochs > 0 ? epochs : 1;
  t.seed = 3;
  return t;
}

TEST(Training, LrSchedule) {
  TrainConfig t;
  t.initial_lr = 0.1;
  t.epochs = 4;
  EXPECT_DOUBLE_EQ(t.lr_at(0), 0.1);
  EXPECT_DOUBLE_EQ(t.lr_at(2), 0.05);
  EXPECT_DOUBLE_EQ(t.lr_at(3), 0.025);
}

TEST(Training, ConfigValidation) {
  TrainConfig t;
  t.batch_size = 0;
  EXPECT_THROW(t.validate(), ConfigError);
  t = TrainConfig{};
  t.epochs = 2;
  t.early_stopping_patience = 3;
  EXPECT_THROW(t.validate(), ConfigError);
  t = TrainConfig{};
  t.momentum = 1.0;
  EXPECT_THROW(t.validate(), ConfigError);
  t = TrainConfig{};
  t.initial_lr = -1;
  EXPECT_THROW(t.validate(), ConfigError);
}

TEST(Training, DefaultFinetuneConfig) {
  TrainConfig p;
  p.initial_lr = 0.05;
  p.epochs = 20;
  auto f = default_finetune_config(p);
  EXPECT_DOUBLE_EQ(f.initial_lr, 0.005);
  EXPECT_EQ(f.epochs, 4);
  EXPECT_EQ(f.early_stopping_patience, 3);
  p.epochs = 3;
  f = default_finetune_config(p);
  EXPECT_EQ(f.epochs, 1);
  EXPECT_EQ(f.early_stopping_patience, 1);
  EXPECT_NO_THROW(f.validate());
}

TEST(Training, ZeroEpochsLeavesWeights) {
  auto c = tiny_config();
  auto w = init_model(c, 1);
  auto data = samples_of(sinusoid(200), c);
  auto r = train(w, data, data, quick(0));
  EXPECT_EQ(r.weights, w);
  EXPECT_TRUE(r.history.empty());
  EXPECT_EQ(r.best_epoch, 0);
}

TEST(Training, OneEpochOneHistoryRow) {
  auto c = tiny_config();
  auto data = samples_of(sinusoid(200), c);
  auto r = train(init_model(c, 1), data, data, quick(1));
  ASSERT_EQ(r.history.size(), 1u);
  EXPECT_EQ(r.history[0].epoch, 1);
  EXPECT_DOUBLE_EQ(r.history[0].lr, 0.05);
  EXPECT_EQ(r.best_epoch, 1);
}

TEST(Training, LossDecreasesOnSinusoid) {
  auto c = tiny_config();
  auto train_set = samples_of(sinusoid(400), c);
  auto val_set = samples_of(sinusoid(200), c, 5);
  auto w = init_model(c, 2);
  const double before = evaluate_loss(w, val_set);
  auto r = train(w, train_set, val_set, quick(15));
  EXPECT_LT(r.history.back().train_loss, r.history.front().train_loss);
  EXPECT_LT(evaluate_loss(r.weights, val_set), 0.5 * before);
  // Returned weights are the best-validation ones.
  double best = r.history[r.best_epoch - 1].val_loss;
  for (const auto& h : r.history) EXPECT_GE(h.val_loss, best);
  EXPECT_DOUBLE_EQ(evaluate_loss(r.weights, val_set), best);
}

TEST(Training, EarlyStoppingOnNoiseValidation) {
  auto c = tiny_config();
  auto train_set = samples_of(sinusoid(400), c);
  auto val_set = samples_of(sinusoid(200, 0.8, 5), c, 5);
  auto t = quick(40);
  t.early_stopping_patience = 1;
  auto r = train(init_model(c, 2), train_set, val_set, t);
  EXPECT_TRUE(r.stopped_early);
  EXPECT_LT(r.history.size(), 40u);
  EXPECT_EQ(r.history.size(), static_cast<std::size_t>(r.best_epoch) + 1);
}

TEST(Training, Deterministic) {
  auto c = tiny_config();
  c.dropout = 0.1;
  auto data = samples_of(sinusoid(300), c);
  auto t = quick(3);
  auto a = train(init_model(c, 4), data, data, t);
  auto b = train(init_model(c, 4), data, data, t);
  EXPECT_EQ(a.weights, b.weights);
  EXPECT_EQ(a.history, b.history);
  t.policy = ExecutionPolicy::kSerial;
  auto s = train(init_model(c, 4), data, data, t);
  EXPECT_EQ(a.weights, s.weights);
}

TEST(Training, FinetuneZeroLrIsIdentity) {
  auto c = tiny_config();
  auto data = samples_of(sinusoid(200), c);
  auto global = init_model(c, 6);
  auto p = quick(5);
  auto f = default_finetune_config(p);
  f.initial_lr = 0.0;
  auto r = finetune(global, data, data, f, p);
  EXPECT_EQ(r.weights, global);
}

TEST(Training, FinetuneLrChecked) {
  auto c = tiny_config();
  auto data = samples_of(sinusoid(200), c);
  auto global = init_model(c, 6);
  auto p = quick(5);
  auto f = p;
  f.initial_lr = 0.1;
  EXPECT_THROW(finetune(global, data, data, f, p), ConfigError);
  f = p;
  f.initial_lr = p.initial_lr;
  f.epochs = 6;
  f.early_stopping_patience = 1;
  EXPECT_NO_THROW(finetune(global, data, data, f, p));
}

TEST(Training, NonFiniteInputIsTrainingError) {
  auto c = tiny_config();
  auto data = samples_of(sinusoid(200), c);
  data[0].past_target[3] = std::numeric_limits<double>::quiet_NaN();
  try {
    train(init_model(c, 1), data, data, quick(2));
    FAIL() << "expected TrainingError";
  } catch (const TrainingError& e) {
    EXPECT_EQ(e.epoch(), 1);
  }
}

TEST(Training, EmptySetsRejected) {
  auto c = tiny_config();
  auto data = samples_of(sinusoid(200), c);
  std::vector<ForecastSample> none;
  EXPECT_THROW(train(init_model(c, 1), none, data, quick(1)), DataError);
  EXPECT_THROW(train(init_model(c, 1), data, none, quick(1)), DataError);
}

TEST(Training, HistoryCsv) {
  auto path = std::filesystem::temp_directory_path() / "hems_history_test.csv";
  std::vector<EpochRecord> h{{1, 0.5, 0.25, 0.1}, {2, 0.4, 0.2, 0.05}};
  write_history_csv(path, h);
  std::ifstream in(path);
  std::string all((std::istreambuf_iterator<char>(in)), {});
  EXPECT_EQ(all, "epoch,train_loss,val_loss,lr\n1,0.5,0.25,0.1\n2,0.4,0.2,0.05\n");
  std::filesystem::remove(path);
}

}  // namespace
}  // namespace hems
