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
#include <optional>
#include <string>
#include <vector>

#include "hems/cohort.hpp"
#include "hems/datagen.hpp"
#include "hems/model.hpp"
#include "hems/simulator.hpp"
#include "hems/training.hpp"

namespace hems {

// Everything one pipeline run needs. Loaded from an INI-style file:
//
//   [run]        seed, out, parallel
//   [data]       cohort, households, heldout, days, start, pv_peak_kw, injection_ratio
//   [model]      input_window, horizon, quantiles, hidden_size, attention_heads, dropout,
//                past_covariates, future_covariates
//   [pretrain]   lr, epochs, batch_size, patience, momentum, clip_norm
//   [finetune]   lr, epochs, batch_size, patience   (default: derived from pretrain)
//   [local]      lr, epochs, batch_size, patience   (default: as pretrain)
//   [split]      test_weeks, validation_days, training_days, sizes, scale_before_split
//   [simulation] days, e_max, u_min, u_max, eta, e_init, replan, point_quantile, terminal_soc
//
// Unknown sections or keys are rejected. Lists are comma separated.
struct RunConfig {
  std::uint64_t seed = 42;
  std::filesystem::path out = "out";
  bool parallel = true;

  std::filesystem::path cohort_dir = "out/cohort";
  int households = 30;
  int heldout = 5;
  int days = 98;
  Timestamp start{};
  double pv_peak_kw = 4.0;
  double injection_ratio = 0.4;

  ModelConfig model{};
  TrainConfig pretrain{};
  std::optional<double> finetune_lr;
  std::optional<int> finetune_epochs;
  std::optional<int> finetune_batch_size;
  std::optional<int> finetune_patience;
  std::optional<double> local_lr;
  std::optional<int> local_epochs;
  std::optional<int> local_batch_size;
  std::optional<int> local_patience;

  SplitSpec split{};
  std::vector<int> training_sizes{14, 21, 28, 35, 42};

  int simulation_days = 7;
  BatteryParams battery{};
  ReplanMode replan = ReplanMode::kPerStep;
  double point_quantile = 0.5;
  bool terminal_soc = false;

  RunConfig();
  // Throws ConfigError naming the offending key.
  void validate() const;
  ExecutionPolicy policy() const {
    return parallel ? ExecutionPolicy::kParallel : ExecutionPolicy::kSerial;
  }
  TrainConfig pretrain_config() const;
  TrainConfig finetune_config() const;
  TrainConfig local_config() const;
  SimulationConfig simulation_config(Timestamp start) const;
  CohortConfig cohort_config() const;
};

RunConfig parse_run_config(const std::string& text, const std::string& origin = "<config>");
RunConfig load_run_config(const std::filesystem::path& path);

}  // namespace hems
