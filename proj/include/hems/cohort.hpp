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
#include <span>
#include <string>
#include <vector>

#include "hems/datagen.hpp"
#include "hems/model.hpp"
#include "hems/simulator.hpp"
#include "hems/training.hpp"

namespace hems {

struct HouseholdSeries {
  std::string id;
  QuarterSeries demand;
};

// Training material of one household under one split. The scaler is fit on
// the training segment (whole series under spec.scale_before_split).
// Training windows, input and target, lie inside the training segment;
// validation and test forecasts take their inputs from whatever precedes them.
struct PreparedSplit {
  DatasetSplit split;
  ScalerParams scaler;
  std::vector<ForecastSample> train;
  std::vector<ForecastSample> validation;
};
PreparedSplit prepare_split(const ModelConfig& config, const QuarterSeries& series,
                            const SplitSpec& spec);

// Chronological 85/15 split for pretraining, scaler fit on the 85 %.
struct PreparedPretrain {
  ScalerParams scaler;
  std::vector<ForecastSample> train;
  std::vector<ForecastSample> validation;
};
PreparedPretrain prepare_pretrain(const ModelConfig& config, const QuarterSeries& series,
                                  bool scale_before_split = false);

// Day-ahead forecasts for `days` consecutive days starting at `offset`
// (a midnight index into `actual`), concatenated, in kW.
std::vector<double> rolling_forecast(const Forecaster& forecaster, const QuarterSeries& actual,
                                     std::size_t offset, int days);

// Seeds derive from (seed, "<role>/<household>/<days>") so a single cell
// can be reproduced outside the cohort loop.
TrainResult train_local_model(const ModelConfig& config, const PreparedSplit& data,
                              const TrainConfig& local, std::uint64_t seed,
                              const std::string& household, int training_days);
TrainResult finetune_global_model(const ModelWeights& global, const PreparedSplit& data,
                                  const TrainConfig& finetune, const TrainConfig& pretrain,
                                  std::uint64_t seed, const std::string& household,
                                  int training_days);

// kOracle and kNoBattery only appear in single simulation summaries.
enum class ModelKind { kLocal, kFinetuned, kPersistence, kOracle, kNoBattery };
const char* model_kind_name(ModelKind kind);
ModelKind parse_model_kind(const std::string& text);

// One (household, model kind, training size) result. Failed cells carry
// NaN metrics and the error text.
struct CohortCell {
  std::string household;
  ModelKind kind = ModelKind::kLocal;
  int training_days = 0;
  double mae_kw = 0.0;
  double cost_eur = 0.0;
  double no_battery_eur = 0.0;
  double perfect_foresight_eur = 0.0;
  // 100 * (no_battery - cost) / no_battery; NaN when the baseline is 0.
  double savings_pct = 0.0;
  std::optional<std::string> error;
};

struct CohortConfig {
  std::vector<int> training_sizes{14, 21, 28, 35, 42};
  SplitSpec split{};  // training_days is replaced per size
  TrainConfig pretrain{};
  TrainConfig local{};  // budget for models trained from scratch on one household
  TrainConfig finetune = default_finetune_config(TrainConfig{});
  // Period start is replaced by the test start of each household.
  SimulationConfig simulation{};
  bool include_persistence = true;
  std::uint64_t seed = 0;
};

// Local-from-scratch versus finetuned models on the held-out households, plus
// the persistence baseline. MAE covers the whole test segment; cost covers
// the first `simulation.steps` of it. Errors are recorded per cell.
std::vector<CohortCell> evaluate_cohort(std::span<const HouseholdSeries> households,
                                        const ModelWeights& global, const QuarterSeries& pv,
                                        const Tariff& tariff, const CohortConfig& config);

struct CohortAggregate {
  ModelKind kind = ModelKind::kLocal;
  int training_days = 0;
  int count = 0;  // successful cells
  double mae_mean = 0.0, mae_std = 0.0;
  double cost_mean = 0.0, cost_std = 0.0;
  double savings_mean = 0.0, savings_std = 0.0;
};

// Mean and population standard deviation (divide by n) per (kind, size),
// ordered by kind then size. Failed cells are skipped.
std::vector<CohortAggregate> aggregate_cells(std::span<const CohortCell> cells);

// `household,model_kind,training_days,mae_kw,cost_eur,no_battery_eur,perfect_foresight_eur,savings_pct`
void write_cohort_csv(const std::filesystem::path& path, std::span<const CohortCell> cells);
std::vector<CohortCell> read_cohort_csv(const std::filesystem::path& path);
std::string cohort_csv_row(const CohortCell& cell);
inline constexpr const char* kCohortCsvHeader =
    "household,model_kind,training_days,mae_kw,cost_eur,no_battery_eur,perfect_foresight_eur,"
    "savings_pct";

double savings_pct(double no_battery, double cost);

}  // namespace hems
