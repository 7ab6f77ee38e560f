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
#include <optional>
#include <string>
#include <vector>

#include "hems/simplex.hpp"
#include "hems/timeseries.hpp"

namespace hems {

// One battery dispatch horizon. Demand is >= 0 kW, PV <= 0 kW; all series
// share a grid. The horizon length is the series length.
struct DispatchProblem {
  QuarterSeries demand;
  QuarterSeries pv;
  Tariff tariff;
  BatteryParams battery;
  double dt = kStepHours;
  // Lower bound on E_{T+1}; free when unset.
  std::optional<double> terminal_min_energy;

  int horizon() const { return static_cast<int>(demand.size()); }
  // Throws DataError / ConfigError.
  void validate() const;
};

// Column layout of the dispatch LP: variable k of step t sits at 5t + k.
enum DispatchVar : int { kCharge = 0, kDischarge = 1, kImport = 2, kExport = 3, kEnergyNext = 4 };
inline constexpr int kVarsPerStep = 5;

struct DispatchSolution {
  LpStatus status = LpStatus::kInfeasible;
  std::vector<double> u;           // kW, charge - discharge
  std::vector<double> charge;      // kW, u+
  std::vector<double> discharge;   // kW, u-
  std::vector<double> grid_power;  // kW, import - export
  std::vector<double> grid_import;
  std::vector<double> grid_export;
  std::vector<double> energy;      // kWh, E_1 .. E_{T+1}
  std::vector<double> step_cost;   // EUR
  double cost = 0.0;               // EUR
};

// Battery energy after applying u for dt hours from e: eta on charge,
// 1/eta on discharge.
double next_energy(double e, double u, double eta, double dt);
// Grid cost of one step at net grid power p (kW).
double step_cost(double grid_kw, double lambda_con, double lambda_inj, double dt);

// Split-variable LP: 5T variables, 2T equalities. Refuses tariffs with
// lambda_inj > lambda_con at any step (DataError): the relaxation would
// then reward simultaneous import and export.
LinearProgram build_lp(const DispatchProblem& problem);

// Maps an optimal LP solution back to per-step quantities. Simultaneous
// charge and discharge (only possible at cost-neutral ties) is netted
// without changing the energy trajectory. The cost is recomputed from the
// piecewise step costs and must agree with the LP objective within 1e-9
// EUR, otherwise SolverError.
DispatchSolution extract_dispatch(const DispatchProblem& problem, const LpSolution& lp);

DispatchSolution solve_dispatch(const DispatchProblem& problem, const SimplexOptions& options = {});

// Exhaustive dynamic programme over action sequences on the grid
// {k * resolution} within [u_min, u_max] (always including 0), with exact
// dynamics and costs. Reached states whose energies fall in one
// `energy_bucket_kwh` bucket are merged, keeping the cheaper one with its
// exact energy, so the result is still the cost of a real schedule and an
// upper bound on the optimum. A bucket of 0 disables merging.
// Requires T <= 8 (SolverError otherwise). Returns +inf when no grid
// schedule is feasible.
double brute_force_dispatch(const DispatchProblem& problem, double resolution,
                            double energy_bucket_kwh = 1e-4);

struct VerificationIssue {
  std::string check;  // "dynamics", "energy_bounds", ..., "complementarity", "cost"
  int step = -1;      // 0-based, -1 for whole-horizon checks
  double magnitude = 0.0;
};

struct VerificationReport {
  std::vector<VerificationIssue> issues;
  bool ok() const { return issues.empty(); }
  std::string summary() const;
};

// (a) constraints within 1e-9, (b) no simultaneous import/export or
// charge/discharge beyond 1e-9 (skipped at steps with lambda_inj ==
// lambda_con, and for charge/discharge when eta == 1), (c) cost agreement.
VerificationReport verify_solution(const DispatchProblem& problem,
                                   const DispatchSolution& solution);

// `t,demand_kw,pv_kw,lambda_con,lambda_inj`; the grid starts at `start`.
struct DispatchInputs {
  QuarterSeries demand;
  QuarterSeries pv;
  Tariff tariff;
};
DispatchInputs read_dispatch_csv(const std::filesystem::path& path, Timestamp start);
// `t,u_kw,grid_kw,energy_kwh,cost_eur`, energy after the step.
void write_dispatch_csv(const std::filesystem::path& path, const DispatchSolution& solution);

}  // namespace hems
