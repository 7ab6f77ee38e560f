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

#include "hems/mpc.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "hems/csv.hpp"
#include "hems/errors.hpp"

namespace hems {

namespace {

constexpr double kCheckTol = 1e-9;

int var(int t, DispatchVar k) { return kVarsPerStep * t + k; }

std::string step_text(int t) { return "step " + std::to_string(t); }

}  // namespace

void DispatchProblem::validate() const {
  battery.validate();
  if (demand.size() == 0) throw DataError("dispatch: empty horizon");
  if (!demand.same_grid(pv) || !demand.same_grid(tariff.consumption())) {
    throw DataError("dispatch: demand, pv and tariff must share one grid");
  }
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("dispatch: dt must be positive");
  for (std::size_t t = 0; t < demand.size(); ++t) {
    if (demand[t] < 0.0) throw DataError("dispatch: negative demand at " + step_text(t));
    if (pv[t] > 0.0) throw DataError("dispatch: positive pv at " + step_text(t));
  }
  if (terminal_min_energy && (!std::isfinite(*terminal_min_energy) ||
                              *terminal_min_energy > battery.e_max)) {
    throw ConfigError("dispatch: terminal energy bound outside [0, e_max]");
  }
}

double next_energy(double e, double u, double eta, double dt) {
  return u >= 0.0 ? e + eta * u * dt : e + u * dt / eta;
}

double step_cost(double grid_kw, double lambda_con, double lambda_inj, double dt) {
  return grid_kw >= 0.0 ? lambda_con * grid_kw * dt : lambda_inj * grid_kw * dt;
}

LinearProgram build_lp(const DispatchProblem& problem) {
  problem.validate();
  const int horizon = problem.horizon();
  const auto& con = problem.tariff.consumption();
  const auto& inj = problem.tariff.injection();
  for (int t = 0; t < horizon; ++t) {
    if (inj[t] > con[t]) {
      std::ostringstream msg;
      msg << "dispatch: lambda_inj " << inj[t] << " exceeds lambda_con " << con[t] << " at "
          << step_text(t)
          << "; the split-variable LP would allow fictitious simultaneous import and export";
      throw DataError(msg.str());
    }
  }
  const auto& b = problem.battery;
  const double dt = problem.dt;
  const int n = kVarsPerStep * horizon;

  LinearProgram lp;
  lp.lower.assign(n, 0.0);
  lp.upper.assign(n, kInfinity);
  lp.cost.assign(n, 0.0);
  lp.rhs.assign(2 * horizon, 0.0);
  lp.names.resize(n);
  lp.initial_basis.resize(2 * horizon);
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(9 * horizon);
  for (int t = 0; t < horizon; ++t) {
    const std::string idx = "[" + std::to_string(t) + "]";
    lp.names[var(t, kCharge)] = "u_plus" + idx;
    lp.names[var(t, kDischarge)] = "u_minus" + idx;
    lp.names[var(t, kImport)] = "p_imp" + idx;
    lp.names[var(t, kExport)] = "p_exp" + idx;
    lp.names[var(t, kEnergyNext)] = "E[" + std::to_string(t + 1) + "]";
    lp.upper[var(t, kCharge)] = b.u_max;
    lp.upper[var(t, kDischarge)] = -b.u_min;
    lp.upper[var(t, kEnergyNext)] = b.e_max;
    lp.cost[var(t, kImport)] = con[t] * dt;
    lp.cost[var(t, kExport)] = -inj[t] * dt;

    const int grid_row = 2 * t;
    const double net = problem.demand[t] + problem.pv[t];
    trip.emplace_back(grid_row, var(t, kImport), 1.0);
    trip.emplace_back(grid_row, var(t, kExport), -1.0);
    trip.emplace_back(grid_row, var(t, kCharge), -1.0);
    trip.emplace_back(grid_row, var(t, kDischarge), 1.0);
    lp.rhs[grid_row] = net;

    const int energy_row = 2 * t + 1;
    trip.emplace_back(energy_row, var(t, kEnergyNext), 1.0);
    if (t > 0) trip.emplace_back(energy_row, var(t - 1, kEnergyNext), -1.0);
    trip.emplace_back(energy_row, var(t, kCharge), -b.eta * dt);
    trip.emplace_back(energy_row, var(t, kDischarge), dt / b.eta);
    lp.rhs[energy_row] = t == 0 ? b.e_init : 0.0;

    // Idle battery: grid covers the net load, energy carries over.
    lp.initial_basis[grid_row] = net >= 0.0 ? var(t, kImport) : var(t, kExport);
    lp.initial_basis[energy_row] = var(t, kEnergyNext);
  }
  if (problem.terminal_min_energy) {
    auto& lo = lp.lower[var(horizon - 1, kEnergyNext)];
    lo = std::clamp(*problem.terminal_min_energy, 0.0, b.e_max);
  }
  lp.a.resize(2 * horizon, n);
  lp.a.setFromTriplets(trip.begin(), trip.end());
  lp.a.makeCompressed();
  return lp;
}

DispatchSolution extract_dispatch(const DispatchProblem& problem, const LpSolution& lp) {
  if (lp.status != LpStatus::kOptimal) {
    throw SolverError(std::string("dispatch: LP is ") + lp_status_name(lp.status));
  }
  const int horizon = problem.horizon();
  if (static_cast<int>(lp.x.size()) != kVarsPerStep * horizon) {
    throw SolverError("dispatch: LP solution has the wrong size");
  }
  const auto& b = problem.battery;
  const auto& con = problem.tariff.consumption();
  const auto& inj = problem.tariff.injection();
  const double eta2 = b.eta * b.eta;

  DispatchSolution s;
  s.status = LpStatus::kOptimal;
  s.energy.push_back(b.e_init);
  for (int t = 0; t < horizon; ++t) {
    double up = std::max(lp.x[var(t, kCharge)], 0.0);
    double down = std::max(lp.x[var(t, kDischarge)], 0.0);
    // Lowering u+ by e and u- by eta^2 e leaves the energy change intact.
    const double overlap = std::min(up, down / eta2);
    up -= overlap;
    down = std::max(down - eta2 * overlap, 0.0);
    const double u = up - down;
    const double grid = problem.demand[t] + problem.pv[t] + u;
    s.charge.push_back(up);
    s.discharge.push_back(down);
    s.u.push_back(u);
    s.grid_power.push_back(grid);
    s.grid_import.push_back(std::max(grid, 0.0));
    s.grid_export.push_back(std::max(-grid, 0.0));
    s.energy.push_back(next_energy(s.energy.back(), u, b.eta, problem.dt));
    s.step_cost.push_back(step_cost(grid, con[t], inj[t], problem.dt));
    s.cost += s.step_cost.back();
  }
  if (std::abs(s.cost - lp.objective) > kCheckTol) {
    std::ostringstream msg;
    msg << "dispatch: recomputed cost " << s.cost << " disagrees with LP objective "
        << lp.objective << " by " << std::abs(s.cost - lp.objective);
    throw SolverError(msg.str());
  }
  return s;
}

DispatchSolution solve_dispatch(const DispatchProblem& problem, const SimplexOptions& options) {
  const auto lp = build_lp(problem);
  const auto sol = solve_lp(lp, options);
  if (sol.status != LpStatus::kOptimal) {
    DispatchSolution out;
    out.status = sol.status;
    return out;
  }
  return extract_dispatch(problem, sol);
}

double brute_force_dispatch(const DispatchProblem& problem, double resolution,
                            double energy_bucket_kwh) {
  problem.validate();
  const int horizon = problem.horizon();
  if (horizon > 8) {
    throw SolverError("brute force: instance too large (T = " + std::to_string(horizon) +
                      ", limit 8)");
  }
  if (!(resolution > 0.0) || !(energy_bucket_kwh >= 0.0)) {
    throw ConfigError("brute force: resolution must be positive");
  }
  const auto& b = problem.battery;
  const auto& con = problem.tariff.consumption();
  const auto& inj = problem.tariff.injection();

  std::vector<double> actions;
  const auto k_lo = static_cast<long>(std::ceil(b.u_min / resolution - 1e-9));
  const auto k_hi = static_cast<long>(std::floor(b.u_max / resolution + 1e-9));
  for (long k = k_lo; k <= k_hi; ++k) {
    actions.push_back(std::clamp(static_cast<double>(k) * resolution, b.u_min, b.u_max));
  }

  constexpr double kEdge = 1e-12;
  const double terminal = problem.terminal_min_energy.value_or(-kInfinity);
  struct State {
    double energy;
    double cost;
  };
  std::vector<State> states{{b.e_init, 0.0}};

  const bool bucketed = energy_bucket_kwh > 0.0;
  const std::size_t buckets =
      bucketed ? static_cast<std::size_t>(std::llround(b.e_max / energy_bucket_kwh)) + 1 : 0;
  std::vector<double> best_cost(buckets, kInfinity);
  std::vector<double> best_energy(buckets, 0.0);
  std::vector<std::size_t> touched;
  std::map<double, double> exact;

  for (int t = 0; t < horizon; ++t) {
    const double net = problem.demand[t] + problem.pv[t];
    for (const auto& s : states) {
      for (double u : actions) {
        double e = next_energy(s.energy, u, b.eta, problem.dt);
        if (e < -kEdge || e > b.e_max + kEdge) continue;
        e = std::clamp(e, 0.0, b.e_max);
        const double c = s.cost + step_cost(net + u, con[t], inj[t], problem.dt);
        if (bucketed) {
          const auto idx = std::min(
              static_cast<std::size_t>(std::llround(e / energy_bucket_kwh)), buckets - 1);
          if (best_cost[idx] == kInfinity) touched.push_back(idx);
          if (c < best_cost[idx]) {
            best_cost[idx] = c;
            best_energy[idx] = e;
          }
        } else {
          auto [it, inserted] = exact.try_emplace(e, c);
          if (!inserted && c < it->second) it->second = c;
        }
      }
    }
    states.clear();
    if (bucketed) {
      std::sort(touched.begin(), touched.end());
      for (auto idx : touched) {
        states.push_back({best_energy[idx], best_cost[idx]});
        best_cost[idx] = kInfinity;
      }
      touched.clear();
    } else {
      for (const auto& [e, c] : exact) states.push_back({e, c});
      exact.clear();
    }
  }
  double best = kInfinity;
  for (const auto& s : states) {
    if (s.energy >= terminal - kEdge) best = std::min(best, s.cost);
  }
  return best;
}

std::string VerificationReport::summary() const {
  if (issues.empty()) return "ok";
  std::ostringstream out;
  for (std::size_t i = 0; i < issues.size(); ++i) {
    if (i) out << "; ";
    out << issues[i].check;
    if (issues[i].step >= 0) out << " at step " << issues[i].step;
    out << " (" << issues[i].magnitude << ")";
  }
  return out.str();
}

VerificationReport verify_solution(const DispatchProblem& problem,
                                   const DispatchSolution& solution) {
  VerificationReport report;
  auto flag = [&](const char* check, int step, double magnitude) {
    report.issues.push_back({check, step, magnitude});
  };
  const int horizon = problem.horizon();
  const auto n = static_cast<std::size_t>(horizon);
  const auto& s = solution;
  if (s.status != LpStatus::kOptimal) {
    flag("status", -1, 0.0);
    return report;
  }
  if (s.u.size() != n || s.charge.size() != n || s.discharge.size() != n ||
      s.grid_power.size() != n || s.grid_import.size() != n || s.grid_export.size() != n ||
      s.step_cost.size() != n || s.energy.size() != n + 1) {
    flag("shape", -1, 0.0);
    return report;
  }
  const auto& b = problem.battery;
  const auto& con = problem.tariff.consumption();
  const auto& inj = problem.tariff.injection();

  if (double d = std::abs(s.energy[0] - b.e_init); d > kCheckTol) flag("initial_energy", 0, d);
  double total = 0.0;
  for (int t = 0; t < horizon; ++t) {
    auto over = [](double value, double lo, double hi) {
      return std::max({lo - value, value - hi, 0.0});
    };
    if (double d = std::abs(s.energy[t + 1] - next_energy(s.energy[t], s.u[t], b.eta, problem.dt));
        d > kCheckTol) {
      flag("dynamics", t, d);
    }
    if (double d = over(s.energy[t + 1], 0.0, b.e_max); d > kCheckTol) {
      flag("energy_bounds", t, d);
    }
    if (double d = over(s.u[t], b.u_min, b.u_max); d > kCheckTol) flag("power_bounds", t, d);
    if (double d = std::max({-s.charge[t], -s.discharge[t], -s.grid_import[t],
                             -s.grid_export[t], 0.0});
        d > kCheckTol) {
      flag("sign", t, d);
    }
    if (double d = std::abs(s.u[t] - (s.charge[t] - s.discharge[t])); d > kCheckTol) {
      flag("split_u", t, d);
    }
    if (double d = std::abs(s.grid_power[t] - (s.grid_import[t] - s.grid_export[t]));
        d > kCheckTol) {
      flag("split_grid", t, d);
    }
    if (double d =
            std::abs(s.grid_power[t] - (problem.demand[t] + problem.pv[t] + s.u[t]));
        d > kCheckTol) {
      flag("grid_balance", t, d);
    }
    // Ties make simultaneous flows cost-neutral, so nothing forces them out.
    const bool tie = inj[t] == con[t];
    if (!tie) {
      if (double p = s.grid_import[t] * s.grid_export[t]; p > kCheckTol) {
        flag("complementarity_grid", t, p);
      }
      if (b.eta < 1.0) {
        if (double p = s.charge[t] * s.discharge[t]; p > kCheckTol) {
          flag("complementarity_battery", t, p);
        }
      }
    }
    const double c = step_cost(problem.demand[t] + problem.pv[t] + s.u[t], con[t], inj[t],
                               problem.dt);
    if (double d = std::abs(s.step_cost[t] - c); d > kCheckTol) flag("step_cost", t, d);
    total += c;
  }
  if (problem.terminal_min_energy) {
    if (double d = *problem.terminal_min_energy - s.energy[n]; d > kCheckTol) {
      flag("terminal_energy", horizon - 1, d);
    }
  }
  if (double d = std::abs(s.cost - total); d > kCheckTol) flag("cost", -1, d);
  return report;
}

DispatchInputs read_dispatch_csv(const std::filesystem::path& path, Timestamp start) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  std::size_t line_no = 1;
  auto fail = [&](const std::string& what) -> void {
    throw DataError(path.string() + ":" + std::to_string(line_no) + ": " + what);
  };
  if (!std::getline(in, line)) fail("empty input");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "t,demand_kw,pv_kw,lambda_con,lambda_inj") fail("unexpected header '" + line + "'");
  std::vector<double> demand, pv, con, inj;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_fields(line);
    if (fields.size() != 5) fail("expected 5 fields");
    auto t = parse_double(fields[0]);
    if (!t || *t != static_cast<double>(demand.size())) fail("t must count up from 0");
    std::vector<double> row;
    for (int k = 1; k < 5; ++k) {
      auto v = parse_double(fields[k]);
      if (!v || !std::isfinite(*v)) fail("malformed number '" + std::string(fields[k]) + "'");
      row.push_back(*v);
    }
    demand.push_back(row[0]);
    pv.push_back(row[1]);
    con.push_back(row[2]);
    inj.push_back(row[3]);
  }
  if (demand.empty()) fail("no rows");
  return DispatchInputs{QuarterSeries(start, std::move(demand), Unit::kKw),
                        QuarterSeries(start, std::move(pv), Unit::kKw),
                        Tariff(QuarterSeries(start, std::move(con), Unit::kEurPerKwh),
                               QuarterSeries(start, std::move(inj), Unit::kEurPerKwh))};
}

void write_dispatch_csv(const std::filesystem::path& path, const DispatchSolution& solution) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << "t,u_kw,grid_kw,energy_kwh,cost_eur\n";
  for (std::size_t t = 0; t < solution.u.size(); ++t) {
    out << t << ',' << format_double(solution.u[t]) << ',' << format_double(solution.grid_power[t])
        << ',' << format_double(solution.energy[t + 1]) << ','
        << format_double(solution.step_cost[t]) << '\n';
  }
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace hems
