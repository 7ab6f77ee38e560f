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

#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "hems/datagen.hpp"
#include "hems/model.hpp"
#include "hems/mpc.hpp"
#include "hems/timeseries.hpp"

namespace hems {

enum class ReplanMode { kDaily, kPerStep };

const char* replan_name(ReplanMode mode);
ReplanMode parse_replan(const std::string& text);

struct SimulationConfig {
  Timestamp start{};  // must be a UTC midnight
  int steps = 7 * kStepsPerDay;
  BatteryParams battery{};  // 5 kW / 10 kWh, eta 0.9, empty
  ReplanMode replan = ReplanMode::kPerStep;
  double point_quantile = 0.5;
  // Each day's plan must end with at least the energy the day started with.
  bool terminal_soc = false;
  void validate() const;
};

// Day-ahead demand forecast in kW for the 96 steps starting at `origin`
// (an index into `actual`). Implementations may only read what they are
// entitled to: the model and persistence look strictly before `origin`.
class Forecaster {
 public:
  virtual ~Forecaster() = default;
  virtual std::vector<double> forecast_day(const QuarterSeries& actual,
                                           std::size_t origin) const = 0;
  virtual std::string name() const = 0;
};

class ModelForecaster : public Forecaster {
 public:
  // `quantile` must be one of the model's levels.
  ModelForecaster(ModelWeights weights, ScalerParams scaler, double quantile);
  std::vector<double> forecast_day(const QuarterSeries& actual, std::size_t origin) const override;
  std::string name() const override { return "model"; }

 private:
  ModelWeights weights_;
  ScalerParams scaler_;
  int level_ = 0;
};

// Returns the actual future; for perfect-information runs.
class OracleForecaster : public Forecaster {
 public:
  std::vector<double> forecast_day(const QuarterSeries& actual, std::size_t origin) const override;
  std::string name() const override { return "oracle"; }
};

class PersistenceForecaster : public Forecaster {
 public:
  std::vector<double> forecast_day(const QuarterSeries& actual, std::size_t origin) const override;
  std::string name() const override { return "persistence"; }
};

// Step t of the forecast repeats the value one day before it; beyond one
// day the forecast repeats itself. Needs >= 96 steps of history.
QuarterSeries persistence_forecast(const QuarterSeries& history, std::size_t horizon);

struct StepRecord {
  Timestamp timestamp{};
  double forecast_demand_kw = 0.0;
  double actual_demand_kw = 0.0;
  double pv_kw = 0.0;
  double u_kw = 0.0;
  double grid_kw = 0.0;
  double energy_kwh = 0.0;  // after the step
  double step_cost_eur = 0.0;
};

struct SimulationResult {
  std::vector<StepRecord> records;
  double initial_energy_kwh = 0.0;
  double total_cost_eur = 0.0;
  int lp_solves = 0;
};

// Closed-loop MPC over config.steps starting at config.start. At every
// midnight the forecaster predicts the next 96 steps; the LP runs over the
// rest of that forecast day (cut at the period end) from the measured
// battery state, every quarter-hour under kPerStep or once per day under
// kDaily. The applied action is kept inside the energy bounds and costed
// against actual demand. Requires 672 steps of history before the start.
SimulationResult simulate_mpc(const QuarterSeries& actual_demand, const QuarterSeries& pv,
                              const Tariff& tariff, const Forecaster& forecaster,
                              const SimulationConfig& config);

// One LP over the whole period with actual demand.
SimulationResult perfect_foresight(const QuarterSeries& actual_demand, const QuarterSeries& pv,
                                   const Tariff& tariff, const SimulationConfig& config);

// Grid cost with the battery idle. Throws DataError on grid mismatch.
double no_battery_cost(const QuarterSeries& actual_demand, const QuarterSeries& pv,
                       const Tariff& tariff);

// Largest deviation of a trajectory from the battery dynamics and bounds, in kWh.
double max_physics_violation(const SimulationResult& result, const BatteryParams& battery);

// `timestamp,forecast_kw,actual_kw,pv_kw,u_kw,grid_kw,energy_kwh,cost_eur`
void write_simulation_log(const std::filesystem::path& path, const SimulationResult& result);

}  // namespace hems
