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

#include "hems/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "hems/csv.hpp"
#include "hems/errors.hpp"

namespace hems {

namespace {

constexpr std::size_t kDay = kStepsPerDay;
constexpr std::size_t kHistory = 7 * kDay;

// Offset of `ts` in `series`, checking that `count` steps are covered.
std::size_t locate(const QuarterSeries& series, Timestamp ts, std::size_t count,
                   const char* what) {
  if (ts < series.start() || ts + kStep * static_cast<long long>(count) > series.end()) {
    throw DataError(std::string("simulation: ") + what + " does not cover " +
                    format_timestamp(ts) + " + " + std::to_string(count) + " steps");
  }
  return series.index_of(ts);
}

// Largest |u| within the power bounds that keeps the energy inside [0, e_max].
double feasible_action(double u, double e, const BatteryParams& b, double dt) {
  u = std::clamp(u, b.u_min, b.u_max);
  if (u > 0.0) u = std::min(u, (b.e_max - e) / (b.eta * dt));
  if (u < 0.0) u = std::max(u, -e * b.eta / dt);
  return u;
}

}  // namespace

const char* replan_name(ReplanMode mode) {
  return mode == ReplanMode::kDaily ? "daily" : "per_step";
}

ReplanMode parse_replan(const std::string& text) {
  if (text == "daily") return ReplanMode::kDaily;
  if (text == "per_step") return ReplanMode::kPerStep;
  throw ConfigError("unknown replan mode '" + text + "' (daily | per_step)");
}

void SimulationConfig::validate() const {
  battery.validate();
  if (steps <= 0) throw ConfigError("simulation: steps must be positive");
  if (!is_midnight(start)) throw ConfigError("simulation: start must be a UTC midnight");
  if (!(point_quantile > 0.0 && point_quantile < 1.0)) {
    throw ConfigError("simulation: point_quantile must lie in (0, 1)");
  }
}

ModelForecaster::ModelForecaster(ModelWeights weights, ScalerParams scaler, double quantile)
    : weights_(std::move(weights)), scaler_(scaler) {
  weights_.config.validate();
  const auto& qs = weights_.config.quantiles;
  auto it = std::find_if(qs.begin(), qs.end(),
                         [&](double q) { return std::abs(q - quantile) < 1e-12; });
  if (it == qs.end()) {
    throw ConfigError("forecaster: quantile " + format_double(quantile) +
                      " is not one of the model's levels");
  }
  level_ = static_cast<int>(it - qs.begin());
  if (weights_.config.horizon < kStepsPerDay) {
    throw ConfigError("forecaster: model horizon shorter than one day");
  }
}

std::vector<double> ModelForecaster::forecast_day(const QuarterSeries& actual,
                                                  std::size_t origin) const {
  const auto window = static_cast<std::size_t>(weights_.config.input_window);
  if (origin < window || origin > actual.size()) {
    throw DataError("forecaster: not enough history before " +
                    format_timestamp(actual.timestamp(origin)));
  }
  // The model only ever sees the window that precedes the origin.
  const auto history = transform(actual.slice(origin - window, window), scaler_);
  const auto sample = make_sample(weights_.config, history, window, false);
  const auto forecast = forward(weights_, sample);
  std::vector<double> out(kDay);
  for (std::size_t i = 0; i < kDay; ++i) {
    out[i] = std::max(scaler_.inverse_transform(forecast.values(i, level_)), 0.0);
  }
  return out;
}

std::vector<double> OracleForecaster::forecast_day(const QuarterSeries& actual,
                                                   std::size_t origin) const {
  std::vector<double> out(kDay, 0.0);
  for (std::size_t i = 0; i < kDay && origin + i < actual.size(); ++i) out[i] = actual[origin + i];
  return out;
}

std::vector<double> PersistenceForecaster::forecast_day(const QuarterSeries& actual,
                                                        std::size_t origin) const {
  if (origin < kDay || origin > actual.size()) {
    throw DataError("persistence: less than one day of history");
  }
  auto f = persistence_forecast(actual.slice(origin - kDay, kDay), kDay);
  return {f.values().begin(), f.values().end()};
}

QuarterSeries persistence_forecast(const QuarterSeries& history, std::size_t horizon) {
  if (history.size() < kDay) {
    throw DataError("persistence: history shorter than one day (" +
                    std::to_string(history.size()) + " steps)");
  }
  std::vector<double> out(horizon);
  const std::size_t base = history.size() - kDay;
  for (std::size_t t = 0; t < horizon; ++t) {
    out[t] = t < kDay ? history[base + t] : out[t - kDay];
  }
  return QuarterSeries(history.end(), std::move(out), history.unit());
}

SimulationResult simulate_mpc(const QuarterSeries& actual_demand, const QuarterSeries& pv,
                              const Tariff& tariff, const Forecaster& forecaster,
                              const SimulationConfig& config) {
  config.validate();
  const auto steps = static_cast<std::size_t>(config.steps);
  const std::size_t a0 = locate(actual_demand, config.start, steps, "demand");
  if (a0 < kHistory) {
    throw DataError("simulation: need " + std::to_string(kHistory) +
                    " steps of demand history before " + format_timestamp(config.start));
  }
  const std::size_t p0 = locate(pv, config.start, steps, "pv");
  const std::size_t c0 = locate(tariff.consumption(), config.start, steps, "tariff");
  const auto& b = config.battery;
  const auto& con = tariff.consumption();
  const auto& inj = tariff.injection();

  SimulationResult result;
  result.initial_energy_kwh = b.e_init;
  result.records.reserve(steps);
  double energy = b.e_init;
  double day_start_energy = energy;
  std::vector<double> forecast;
  std::vector<double> plan;

  for (std::size_t k = 0; k < steps; ++k) {
    const std::size_t in_day = k % kDay;
    if (in_day == 0) {
      forecast = forecaster.forecast_day(actual_demand, a0 + k);
      if (forecast.size() != kDay) throw DataError("forecaster returned a partial day");
      day_start_energy = energy;
    }
    const std::size_t day_end = std::min(k - in_day + kDay, steps);
    if (config.replan == ReplanMode::kPerStep || in_day == 0) {
      const std::size_t len = day_end - k;
      std::vector<double> demand(forecast.begin() + in_day, forecast.begin() + in_day + len);
      for (double& d : demand) d = std::max(d, 0.0);
      const Timestamp ts = config.start + kStep * static_cast<long long>(k);
      BatteryParams battery = b;
      battery.e_init = energy;
      DispatchProblem problem{QuarterSeries(ts, std::move(demand), Unit::kKw),
                              pv.slice(p0 + k, len), tariff.slice(c0 + k, len), battery,
                              kStepHours, std::nullopt};
      if (config.terminal_soc) problem.terminal_min_energy = std::max(day_start_energy - 1e-9, 0.0);
      auto sol = solve_dispatch(problem);
      ++result.lp_solves;
      if (sol.status != LpStatus::kOptimal) {
        throw SolverError(std::string("simulation: dispatch LP ") + lp_status_name(sol.status) +
                          " at " + format_timestamp(ts));
      }
      plan.assign(kDay, 0.0);
      std::copy(sol.u.begin(), sol.u.end(), plan.begin() + in_day);
    }
    const double u = feasible_action(plan[in_day], energy, b, kStepHours);
    const double next = std::clamp(next_energy(energy, u, b.eta, kStepHours), 0.0, b.e_max);
    StepRecord r;
    r.timestamp = config.start + kStep * static_cast<long long>(k);
    r.forecast_demand_kw = forecast[in_day];
    r.actual_demand_kw = actual_demand[a0 + k];
    r.pv_kw = pv[p0 + k];
    r.u_kw = u;
    r.grid_kw = r.actual_demand_kw + r.pv_kw + u;
    r.energy_kwh = next;
    r.step_cost_eur = step_cost(r.grid_kw, con[c0 + k], inj[c0 + k], kStepHours);
    result.total_cost_eur += r.step_cost_eur;
    result.records.push_back(r);
    energy = next;
  }
  return result;
}

SimulationResult perfect_foresight(const QuarterSeries& actual_demand, const QuarterSeries& pv,
                                   const Tariff& tariff, const SimulationConfig& config) {
  config.validate();
  const auto steps = static_cast<std::size_t>(config.steps);
  const std::size_t a0 = locate(actual_demand, config.start, steps, "demand");
  const std::size_t p0 = locate(pv, config.start, steps, "pv");
  const std::size_t c0 = locate(tariff.consumption(), config.start, steps, "tariff");
  DispatchProblem problem{actual_demand.slice(a0, steps), pv.slice(p0, steps),
                          tariff.slice(c0, steps), config.battery, kStepHours, std::nullopt};
  if (config.terminal_soc) {
    problem.terminal_min_energy = std::max(config.battery.e_init - 1e-9, 0.0);
  }
  auto sol = solve_dispatch(problem);
  if (sol.status != LpStatus::kOptimal) {
    throw SolverError(std::string("perfect foresight: dispatch LP ") +
                      lp_status_name(sol.status));
  }
  SimulationResult result;
  result.initial_energy_kwh = config.battery.e_init;
  result.lp_solves = 1;
  for (std::size_t k = 0; k < steps; ++k) {
    StepRecord r;
    r.timestamp = config.start + kStep * static_cast<long long>(k);
    r.forecast_demand_kw = actual_demand[a0 + k];
    r.actual_demand_kw = actual_demand[a0 + k];
    r.pv_kw = pv[p0 + k];
    r.u_kw = sol.u[k];
    r.grid_kw = sol.grid_power[k];
    r.energy_kwh = sol.energy[k + 1];
    r.step_cost_eur = sol.step_cost[k];
    result.total_cost_eur += r.step_cost_eur;
    result.records.push_back(r);
  }
  return result;
}

double no_battery_cost(const QuarterSeries& actual_demand, const QuarterSeries& pv,
                       const Tariff& tariff) {
  if (!actual_demand.same_grid(pv) || !actual_demand.same_grid(tariff.consumption())) {
    throw DataError("no_battery_cost: demand, pv and tariff must share one grid");
  }
  double total = 0.0;
  for (std::size_t t = 0; t < actual_demand.size(); ++t) {
    total += step_cost(actual_demand[t] + pv[t], tariff.consumption()[t], tariff.injection()[t],
                       kStepHours);
  }
  return total;
}

double max_physics_violation(const SimulationResult& result, const BatteryParams& battery) {
  double worst = 0.0;
  double e = result.initial_energy_kwh;
  for (const auto& r : result.records) {
    const double expect = next_energy(e, r.u_kw, battery.eta, kStepHours);
    worst = std::max({worst, std::abs(r.energy_kwh - expect), -r.energy_kwh,
                      r.energy_kwh - battery.e_max, r.u_kw - battery.u_max,
                      battery.u_min - r.u_kw});
    e = r.energy_kwh;
  }
  return worst;
}

void write_simulation_log(const std::filesystem::path& path, const SimulationResult& result) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << "timestamp,forecast_kw,actual_kw,pv_kw,u_kw,grid_kw,energy_kwh,cost_eur\n";
  for (const auto& r : result.records) {
    out << format_timestamp(r.timestamp) << ',' << format_double(r.forecast_demand_kw) << ','
        << format_double(r.actual_demand_kw) << ',' << format_double(r.pv_kw) << ','
        << format_double(r.u_kw) << ',' << format_double(r.grid_kw) << ','
        << format_double(r.energy_kwh) << ',' << format_double(r.step_cost_eur) << '\n';
  }
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace hems
