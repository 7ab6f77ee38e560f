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

#include "hems/cohort.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <tuple>

#include "hems/csv.hpp"
#include "hems/errors.hpp"
#include "hems/seeding.hpp"

namespace hems {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void mean_std(const std::vector<double>& v, double& mean, double& std) {
  mean = 0.0;
  std = 0.0;
  if (v.empty()) return;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  for (double x : v) std += (x - mean) * (x - mean);
  std = std::sqrt(std / static_cast<double>(v.size()));
}

}  // namespace

PreparedSplit prepare_split(const ModelConfig& config, const QuarterSeries& series,
                            const SplitSpec& spec) {
  config.validate();
  auto split = split_dataset(series, spec);
  const auto window = static_cast<std::size_t>(config.input_window);
  const auto horizon = static_cast<std::size_t>(config.horizon);
  if (split.train.size() < window + horizon) {
    throw DataError("split: " + std::to_string(spec.training_days) +
                    " training days cannot hold one input window plus horizon");
  }
  if (split.validation.size() < horizon) {
    throw DataError("split: validation segment shorter than the horizon");
  }
  auto scaler = fit_minmax(spec.scale_before_split ? series : split.train);
  auto scaled = transform(series, scaler);
  auto train = make_samples(config, scaled, split.train_offset + window, split.validation_offset,
                            kStepsPerDay);
  auto val = make_samples(config, scaled, split.validation_offset, split.test_offset,
                          kStepsPerDay);
  return PreparedSplit{std::move(split), scaler, std::move(train), std::move(val)};
}

PreparedPretrain prepare_pretrain(const ModelConfig& config, const QuarterSeries& series,
                                  bool scale_before_split) {
  config.validate();
  auto split = pretrain_split(series);
  const auto window = static_cast<std::size_t>(config.input_window);
  if (split.train.size() < window + static_cast<std::size_t>(config.horizon) ||
      split.validation_offset < window) {
    throw DataError("pretrain: series too short for one training window");
  }
  auto scaler = fit_minmax(scale_before_split ? series : split.train);
  auto scaled = transform(series, scaler);
  auto train = make_samples(config, scaled, window, split.validation_offset, kStepsPerDay);
  auto val = make_samples(config, scaled, split.validation_offset, series.size(), kStepsPerDay);
  if (val.empty()) throw DataError("pretrain: validation segment shorter than the horizon");
  return PreparedPretrain{scaler, std::move(train), std::move(val)};
}

std::vector<double> rolling_forecast(const Forecaster& forecaster, const QuarterSeries& actual,
                                     std::size_t offset, int days) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(days) * kStepsPerDay);
  for (int d = 0; d < days; ++d) {
    auto day = forecaster.forecast_day(actual, offset + static_cast<std::size_t>(d) * kStepsPerDay);
    out.insert(out.end(), day.begin(), day.end());
  }
  return out;
}

TrainResult train_local_model(const ModelConfig& config, const PreparedSplit& data,
                              const TrainConfig& local, std::uint64_t seed,
                              const std::string& household, int training_days) {
  const std::string tag = household + "/" + std::to_string(training_days);
  TrainConfig tc = local;
  tc.seed = derive_seed(seed, "local-train/" + tag);
  auto init = init_model(config, derive_seed(seed, "local-init/" + tag));
  return train(init, data.train, data.validation, tc);
}

TrainResult finetune_global_model(const ModelWeights& global, const PreparedSplit& data,
                                  const TrainConfig& finetune_config, const TrainConfig& pretrain,
                                  std::uint64_t seed, const std::string& household,
                                  int training_days) {
  const std::string tag = household + "/" + std::to_string(training_days);
  TrainConfig tc = finetune_config;
  tc.seed = derive_seed(seed, "finetune/" + tag);
  return finetune(global, data.train, data.validation, tc, pretrain);
}

const char* model_kind_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::kLocal: return "local";
    case ModelKind::kFinetuned: return "finetuned";
    case ModelKind::kPersistence: return "persistence";
    case ModelKind::kOracle: return "oracle";
    case ModelKind::kNoBattery: return "no_battery";
  }
  return "?";
}

ModelKind parse_model_kind(const std::string& text) {
  if (text == "local") return ModelKind::kLocal;
  if (text == "finetuned") return ModelKind::kFinetuned;
  if (text == "persistence") return ModelKind::kPersistence;
  if (text == "oracle") return ModelKind::kOracle;
  if (text == "no_battery") return ModelKind::kNoBattery;
  throw DataError("unknown model kind '" + text + "'");
}

double savings_pct(double no_battery, double cost) {
  if (std::abs(no_battery) < 1e-12) return kNaN;
  return 100.0 * (no_battery - cost) / no_battery;
}

std::vector<CohortCell> evaluate_cohort(std::span<const HouseholdSeries> households,
                                        const ModelWeights& global, const QuarterSeries& pv,
                                        const Tariff& tariff, const CohortConfig& config) {
  config.simulation.battery.validate();
  config.pretrain.validate();
  config.local.validate();
  config.finetune.validate();
  if (config.training_sizes.empty()) throw ConfigError("cohort: no training sizes");
  const auto& mcfg = global.config;
  std::vector<CohortCell> cells;

  for (const auto& house : households) {
    const auto& series = house.demand;
    const int test_days = config.split.test_weeks * 7;
    double nobatt = kNaN, pf = kNaN;
    std::optional<std::string> base_error;
    SimulationConfig sim = config.simulation;
    std::size_t test_offset = 0;
    try {
      SplitSpec probe = config.split;
      probe.training_days = config.training_sizes.front();
      test_offset = split_dataset(series, probe).test_offset;
      sim.start = series.timestamp(test_offset);
      if (sim.steps > test_days * kStepsPerDay) {
        throw ConfigError("cohort: simulation window longer than the test segment");
      }
      const auto steps = static_cast<std::size_t>(sim.steps);
      const auto d = series.slice(test_offset, steps);
      const auto p = pv.slice(pv.index_of(sim.start), steps);
      const auto t = tariff.slice(tariff.consumption().index_of(sim.start), steps);
      nobatt = no_battery_cost(d, p, t);
      pf = perfect_foresight(series, pv, tariff, sim).total_cost_eur;
    } catch (const Error& e) {
      base_error = e.what();
    }
    const auto test = base_error ? std::vector<double>{}
                                 : std::vector<double>(series.values().begin() + test_offset,
                                                       series.values().end());

    auto run_cell = [&](ModelKind kind, int days, auto&& make_forecaster) {
      CohortCell cell{house.id, kind, days, kNaN, kNaN, nobatt, pf, kNaN, base_error};
      if (base_error) {
        cells.push_back(cell);
        return;
      }
      try {
        auto forecaster = make_forecaster();
        auto forecast = rolling_forecast(*forecaster, series, test_offset, test_days);
        cell.mae_kw = mae(forecast, test);
        cell.cost_eur = simulate_mpc(series, pv, tariff, *forecaster, sim).total_cost_eur;
        cell.savings_pct = savings_pct(nobatt, cell.cost_eur);
      } catch (const Error& e) {
        cell.mae_kw = cell.cost_eur = cell.savings_pct = kNaN;
        cell.error = e.what();
      }
      cells.push_back(cell);
    };

    for (int days : config.training_sizes) {
      SplitSpec spec = config.split;
      spec.training_days = days;
      std::optional<PreparedSplit> prep;
      std::optional<std::string> prep_error;
      if (!base_error) {
        try {
          prep = prepare_split(mcfg, series, spec);
        } catch (const Error& e) {
          prep_error = e.what();
        }
      }
      auto model_cell = [&](ModelKind kind) {
        run_cell(kind, days, [&]() -> std::unique_ptr<Forecaster> {
          if (prep_error) throw DataError(*prep_error);
          auto result =
              kind == ModelKind::kLocal
                  ? train_local_model(mcfg, *prep, config.local, config.seed, house.id, days)
                  : finetune_global_model(global, *prep, config.finetune, config.pretrain,
                                          config.seed, house.id, days);
          return std::make_unique<ModelForecaster>(std::move(result.weights), prep->scaler,
                                                   config.simulation.point_quantile);
        });
      };
      model_cell(ModelKind::kLocal);
      model_cell(ModelKind::kFinetuned);
      if (config.include_persistence) {
        run_cell(ModelKind::kPersistence, days,
                 [] { return std::make_unique<PersistenceForecaster>(); });
      }
    }
  }
  return cells;
}

std::vector<CohortAggregate> aggregate_cells(std::span<const CohortCell> cells) {
  struct Acc {
    std::vector<double> mae, cost, savings;
  };
  std::map<std::pair<int, int>, Acc> groups;
  for (const auto& c : cells) {
    auto& g = groups[{static_cast<int>(c.kind), c.training_days}];
    if (c.error || !std::isfinite(c.mae_kw) || !std::isfinite(c.cost_eur)) continue;
    g.mae.push_back(c.mae_kw);
    g.cost.push_back(c.cost_eur);
    if (std::isfinite(c.savings_pct)) g.savings.push_back(c.savings_pct);
  }
  std::vector<CohortAggregate> out;
  for (const auto& [key, g] : groups) {
    CohortAggregate a;
    a.kind = static_cast<ModelKind>(key.first);
    a.training_days = key.second;
    a.count = static_cast<int>(g.mae.size());
    mean_std(g.mae, a.mae_mean, a.mae_std);
    mean_std(g.cost, a.cost_mean, a.cost_std);
    mean_std(g.savings, a.savings_mean, a.savings_std);
    out.push_back(a);
  }
  return out;
}

std::string cohort_csv_row(const CohortCell& c) {
  return c.household + ',' + model_kind_name(c.kind) + ',' + std::to_string(c.training_days) +
         ',' + format_double(c.mae_kw) + ',' + format_double(c.cost_eur) + ',' +
         format_double(c.no_battery_eur) + ',' + format_double(c.perfect_foresight_eur) + ',' +
         format_double(c.savings_pct);
}

void write_cohort_csv(const std::filesystem::path& path, std::span<const CohortCell> cells) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << kCohortCsvHeader << '\n';
  for (const auto& c : cells) out << cohort_csv_row(c) << '\n';
  if (!out) throw IoError("write failed for " + path.string());
}

std::vector<CohortCell> read_cohort_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  std::size_t line_no = 1;
  auto fail = [&](const std::string& what) {
    throw DataError(path.string() + ":" + std::to_string(line_no) + ": " + what);
  };
  if (!std::getline(in, line)) fail("empty input");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kCohortCsvHeader) fail("unexpected header '" + line + "'");
  std::vector<CohortCell> cells;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto f = split_fields(line);
    if (f.size() != 8) fail("expected 8 fields");
    CohortCell c;
    c.household = std::string(f[0]);
    c.kind = parse_model_kind(std::string(f[1]));
    auto days = parse_double(f[2]);
    if (!days || *days != std::floor(*days) || *days < 0) fail("bad training_days");
    c.training_days = static_cast<int>(*days);
    double* targets[] = {&c.mae_kw, &c.cost_eur, &c.no_battery_eur, &c.perfect_foresight_eur,
                         &c.savings_pct};
    for (int k = 0; k < 5; ++k) {
      auto v = parse_double(f[3 + k]);
      if (!v) fail("malformed number '" + std::string(f[3 + k]) + "'");
      *targets[k] = *v;
    }
    if (!std::isfinite(c.mae_kw) || !std::isfinite(c.cost_eur)) c.error = "failed cell";
    cells.push_back(std::move(c));
  }
  return cells;
}

}  // namespace hems
