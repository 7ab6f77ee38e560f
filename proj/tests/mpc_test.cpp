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

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "hems/errors.hpp"
#include "oracles.hpp"

namespace hems {
namespace {

const Timestamp kT0 = parse_timestamp("2023-03-06T00:00:00Z");

QuarterSeries series(std::vector<double> v, Unit unit = Unit::kKw) {
  return QuarterSeries(kT0, std::move(v), unit);
}

DispatchProblem problem(std::vector<double> demand, std::vector<double> pv,
                        std::vector<double> con, std::vector<double> inj,
                        BatteryParams battery = {}) {
  return DispatchProblem{series(std::move(demand)), series(std::move(pv)),
                         Tariff(series(std::move(con), Unit::kEurPerKwh),
                                series(std::move(inj), Unit::kEurPerKwh)),
                         battery, kStepHours, std::nullopt};
}

double no_battery(const DispatchProblem& p) {
  double c = 0.0;
  for (int t = 0; t < p.horizon(); ++t) {
    c += step_cost(p.demand[t] + p.pv[t], p.tariff.consumption()[t], p.tariff.injection()[t], p.dt);
  }
  return c;
}

DispatchProblem two_step() {
  return problem({0, 4}, {0, 0}, {0.10, 1.00}, {0.04, 0.40});
}

TEST(Dispatch, StepPrimitives) {
  EXPECT_DOUBLE_EQ(next_energy(1.0, 4.0, 0.9, 0.25), 1.9);
  EXPECT_DOUBLE_EQ(next_energy(1.0, -0.9, 0.9, 0.25), 0.75);
  EXPECT_DOUBLE_EQ(step_cost(2.0, 0.3, 0.1, 0.25), 0.15);
  EXPECT_DOUBLE_EQ(step_cost(-2.0, 0.3, 0.1, 0.25), -0.05);
}

TEST(Dispatch, LpShape) {
  std::vector<double> z(96, 0.0), d(96, 1.0), c(96, 0.2), i(96, 0.1);
  auto lp = build_lp(problem(d, z, c, i));
  EXPECT_EQ(lp.num_vars(), 480);
  EXPECT_EQ(lp.num_rows(), 192);
  EXPECT_NO_THROW(lp.validate());
}

TEST(Dispatch, InjectionAboveConsumptionRejected) {
  auto p = problem({1, 1}, {0, 0}, {0.2, 0.2}, {0.1, 0.3});
  EXPECT_THROW(build_lp(p), DataError);
  EXPECT_THROW(solve_dispatch(p), DataError);
}

TEST(Dispatch, InputValidation) {
  EXPECT_THROW(solve_dispatch(problem({-1}, {0}, {0.2}, {0.1})), DataError);
  EXPECT_THROW(solve_dispatch(problem({1}, {0.5}, {0.2}, {0.1})), DataError);
  BatteryParams bad;
  bad.eta = 1.5;
  EXPECT_THROW(solve_dispatch(problem({1}, {0}, {0.2}, {0.1}, bad)), ConfigError);
}

// Hand arithmetic for the two-step case (dt = 0.25 h, eta = 0.9):
// charging 5 kW in step 1 costs 0.10 * 5 * 0.25 = 0.125 EUR and stores
// 5 * 0.25 * 0.9 = 1.125 kWh. Step 2 can then discharge 1.125 * 0.9 / 0.25
// = 4.05 kW, covering the 4 kW demand and exporting 0.05 kW for
// 0.40 * 0.05 * 0.25 = 0.005 EUR. Total 0.120 EUR. Charging less saves
// 0.025 EUR per kW but forgoes 0.81 kW of discharge worth at least
// 0.081 EUR, so the charge bound is active.
TEST(Dispatch, TwoStepGolden) {
  auto p = two_step();
  const double brute = brute_force_dispatch(p, 0.01);
  const double dfs = testing::exhaustive_dispatch(p, 0.05);
  EXPECT_NEAR(brute, 0.120, 1e-12);
  EXPECT_NEAR(dfs, 0.120, 1e-12);
  auto s = solve_dispatch(p);
  ASSERT_EQ(s.status, LpStatus::kOptimal);
  EXPECT_NEAR(s.cost, 0.120, 1e-9);
  EXPECT_NEAR(s.u[0], 5.0, 1e-9);
  EXPECT_NEAR(s.u[1], -4.05, 1e-9);
  EXPECT_NEAR(s.grid_export[1], 0.05, 1e-9);
  EXPECT_NEAR(s.energy[1], 1.125, 1e-9);
  EXPECT_NEAR(s.energy[2], 0.0, 1e-9);
  EXPECT_TRUE(verify_solution(p, s).ok()) << verify_solution(p, s).summary();
}

TEST(Dispatch, ZeroInstance) {
  auto p = problem({0, 0, 0}, {0, 0, 0}, {0.2, 0.2, 0.2}, {0.1, 0.1, 0.1});
  auto s = solve_dispatch(p);
  EXPECT_EQ(s.cost, 0.0);
  for (double u : s.u) EXPECT_EQ(u, 0.0);
  EXPECT_EQ(brute_force_dispatch(p, 0.5), 0.0);
}

TEST(Dispatch, FlatTariffNoBatteryUse) {
  // With flat prices and losses, cycling can only lose money.
  auto p = problem({1, 3, 0.5, 2}, {0, 0, 0, 0}, {0.3, 0.3, 0.3, 0.3}, {0.1, 0.1, 0.1, 0.1});
  auto s = solve_dispatch(p);
  EXPECT_NEAR(s.cost, no_battery(p), 1e-9);
  EXPECT_NEAR(brute_force_dispatch(p, 0.25), no_battery(p), 1e-12);
}

TEST(Dispatch, CoarseGridIsNoBattery) {
  auto p = two_step();
  // Resolution above the power bounds leaves only u = 0.
  EXPECT_NEAR(brute_force_dispatch(p, 100.0), no_battery(p), 1e-15);
  EXPECT_NEAR(no_battery(p), 1.0, 1e-15);
}

TEST(Dispatch, TerminalBound) {
  auto p = two_step();
  p.terminal_min_energy = 1.125;  // must keep the charge
  auto s = solve_dispatch(p);
  EXPECT_NEAR(s.energy[2], 1.125, 1e-9);
  EXPECT_NEAR(s.cost, 0.125 + 1.0, 1e-9);
  EXPECT_TRUE(verify_solution(p, s).ok());
  p.terminal_min_energy = 2.5;  // two full charges reach only 2.25 kWh
  EXPECT_EQ(solve_dispatch(p).status, LpStatus::kInfeasible);
  EXPECT_EQ(brute_force_dispatch(p, 0.5), kInfinity);
}

TEST(Dispatch, BruteForceHorizonLimit) {
  std::vector<double> z(9, 0.0), c(9, 0.2), i(9, 0.1);
  EXPECT_THROW(brute_force_dispatch(problem(z, z, c, i), 1.0), SolverError);
}

BatteryParams random_battery(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> tenth(10, 30);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  BatteryParams b;
  b.e_max = 1.0 + 2.0 * u(rng);
  b.u_min = -tenth(rng) / 10.0;
  b.u_max = tenth(rng) / 10.0;
  b.eta = 0.9;
  b.e_init = b.e_max * u(rng);
  return b;
}

DispatchProblem random_problem(std::uint64_t seed, int horizon) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> hundredth(0, 300);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> d(horizon), pv(horizon), con(horizon), inj(horizon);
  for (int t = 0; t < horizon; ++t) {
    d[t] = hundredth(rng) / 100.0;
    pv[t] = -hundredth(rng) / 100.0 * (u(rng) < 0.5);
    con[t] = 0.05 + 0.45 * u(rng);
    inj[t] = con[t] * (0.1 + 0.8 * u(rng));
  }
  return problem(d, pv, con, inj, random_battery(rng));
}

class RandomDispatch : public ::testing::TestWithParam<int> {};

TEST_P(RandomDispatch, LpBelowGridSearchAndVerified) {
  auto p = random_problem(500 + GetParam(), 1 + GetParam() % 4);
  auto s = solve_dispatch(p);
  ASSERT_EQ(s.status, LpStatus::kOptimal);
  auto report = verify_solution(p, s);
  EXPECT_TRUE(report.ok()) << report.summary();
  // Any grid schedule is feasible for the LP, so the LP is never worse.
  const double dfs = testing::exhaustive_dispatch(p, 0.25);
  const double dp = brute_force_dispatch(p, 0.25, 0.0);
  EXPECT_NEAR(dfs, dp, 1e-12);
  EXPECT_LE(s.cost, dp + 1e-9);
  EXPECT_LE(s.cost, no_battery(p) + 1e-9);
  // Bucket merging can only lose a little: it still prices a real schedule.
  const double merged = brute_force_dispatch(p, 0.25);
  EXPECT_GE(merged, dp - 1e-12);
  EXPECT_LE(merged, dp + 1e-3);
}

INSTANTIATE_TEST_SUITE_P(Draws, RandomDispatch, ::testing::Range(0, 24));

TEST(Dispatch, HigherPricesNeverCheaper) {
  for (int k = 0; k < 10; ++k) {
    auto p = random_problem(900 + k, 8);
    auto q = p;
    std::vector<double> con(p.horizon()), inj(p.horizon());
    for (int t = 0; t < p.horizon(); ++t) {
      con[t] = p.tariff.consumption()[t] * 1.2;
      inj[t] = p.tariff.injection()[t];
    }
    q.tariff = Tariff(series(con, Unit::kEurPerKwh), series(inj, Unit::kEurPerKwh));
    EXPECT_GE(solve_dispatch(q).cost, solve_dispatch(p).cost - 1e-9);
    // Larger battery never costs more.
    auto r = p;
    r.battery.e_max *= 2;
    EXPECT_LE(solve_dispatch(r).cost, solve_dispatch(p).cost + 1e-9);
  }
}

TEST(Dispatch, PriceScalingScalesCost) {
  auto p = random_problem(77, 12);
  auto q = p;
  std::vector<double> con(p.horizon()), inj(p.horizon());
  for (int t = 0; t < p.horizon(); ++t) {
    con[t] = p.tariff.consumption()[t] * 3;
    inj[t] = p.tariff.injection()[t] * 3;
  }
  q.tariff = Tariff(series(con, Unit::kEurPerKwh), series(inj, Unit::kEurPerKwh));
  EXPECT_NEAR(solve_dispatch(q).cost, 3 * solve_dispatch(p).cost, 1e-9);
}

TEST(Dispatch, FullDayVerified) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> d(96), pv(96), con(96), inj(96);
  for (int t = 0; t < 96; ++t) {
    d[t] = 0.3 + 2 * u(rng);
    pv[t] = t > 30 && t < 70 ? -3 * u(rng) : 0.0;
    con[t] = 0.15 + 0.2 * std::sin(t * 0.13) * std::sin(t * 0.13);
    inj[t] = 0.4 * con[t];
  }
  auto p = problem(d, pv, con, inj);
  p.terminal_min_energy = 0.0;
  auto s = solve_dispatch(p);
  ASSERT_EQ(s.status, LpStatus::kOptimal);
  auto report = verify_solution(p, s);
  EXPECT_TRUE(report.ok()) << report.summary();
  EXPECT_LT(s.cost, no_battery(p));
  SimplexOptions serial;
  serial.policy = ExecutionPolicy::kSerial;
  auto t = solve_dispatch(p, serial);
  EXPECT_EQ(s.u, t.u);
  EXPECT_EQ(s.cost, t.cost);
}

bool has_issue(const VerificationReport& r, const std::string& check) {
  for (const auto& i : r.issues) {
    if (i.check == check) return true;
  }
  return false;
}

TEST(Dispatch, VerifierCatchesViolations) {
  auto p = two_step();
  auto good = solve_dispatch(p);
  auto s = good;
  s.energy[1] += 1e-6;
  EXPECT_TRUE(has_issue(verify_solution(p, s), "dynamics"));
  s = good;
  s.charge[1] += 0.5;
  s.discharge[1] += 0.5;
  EXPECT_TRUE(has_issue(verify_solution(p, s), "complementarity_battery"));
  s = good;
  s.grid_import[1] += 0.5;
  s.grid_export[1] += 0.5;
  EXPECT_TRUE(has_issue(verify_solution(p, s), "complementarity_grid"));
  s = good;
  s.cost += 1e-8;
  EXPECT_TRUE(has_issue(verify_solution(p, s), "cost"));
  s = good;
  s.u[0] = 6.0;
  EXPECT_TRUE(has_issue(verify_solution(p, s), "power_bounds"));
  s = good;
  s.energy.pop_back();
  EXPECT_TRUE(has_issue(verify_solution(p, s), "shape"));
  s = good;
  s.status = LpStatus::kInfeasible;
  EXPECT_TRUE(has_issue(verify_solution(p, s), "status"));
}

TEST(Dispatch, ExtractDetectsCostMismatch) {
  auto p = two_step();
  auto lp = build_lp(p);
  auto sol = solve_lp(lp);
  sol.objective += 1e-6;
  EXPECT_THROW(extract_dispatch(p, sol), SolverError);
}

TEST(Dispatch, CsvRoundTrip) {
  auto dir = std::filesystem::temp_directory_path() / "hems_dispatch_test";
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "in.csv");
    out << "t,demand_kw,pv_kw,lambda_con,lambda_inj\n0,0,0,0.10,0.04\n1,4,0,1.00,0.40\n";
  }
  auto in = read_dispatch_csv(dir / "in.csv", kT0);
  ASSERT_EQ(in.demand.size(), 2u);
  DispatchProblem p{in.demand, in.pv, in.tariff, BatteryParams{}, kStepHours, std::nullopt};
  auto s = solve_dispatch(p);
  EXPECT_NEAR(s.cost, 0.120, 1e-9);
  write_dispatch_csv(dir / "out.csv", s);
  std::ifstream back(dir / "out.csv");
  std::string header;
  std::getline(back, header);
  EXPECT_EQ(header, "t,u_kw,grid_kw,energy_kwh,cost_eur");
  int rows = 0;
  for (std::string line; std::getline(back, line);) ++rows;
  EXPECT_EQ(rows, 2);
  {
    std::ofstream bad(dir / "bad.csv");
    bad << "t,demand_kw,pv_kw,lambda_con,lambda_inj\n0,zero,0,0.1,0.04\n";
  }
  EXPECT_THROW(read_dispatch_csv(dir / "bad.csv", kT0), DataError);
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace hems
