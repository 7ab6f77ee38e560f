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

// Independent reference implementations used only by the tests.
#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "hems/model.hpp"
#include "hems/mpc.hpp"
#include "hems/simplex.hpp"

namespace hems::testing {

// Minimum of c.x over the vertices of {Ax = b, l <= x <= u}, all bounds
// finite. Tries every choice of basic columns with every assignment of the
// nonbasic variables to a bound. nullopt when no vertex is feasible.
inline std::optional<double> vertex_enumeration_minimum(const LinearProgram& lp,
                                                        double tol = 1e-9) {
  const int n = lp.num_vars();
  const int m = lp.num_rows();
  const Eigen::MatrixXd a = Eigen::MatrixXd(lp.a);
  std::optional<double> best;
  std::vector<int> pick(m);
  std::function<void(int, int)> choose = [&](int start, int depth) {
    if (depth == m) {
      std::vector<int> nonbasic;
      std::vector<bool> basic(n, false);
      for (int j : pick) basic[j] = true;
      for (int j = 0; j < n; ++j) {
        if (!basic[j]) nonbasic.push_back(j);
      }
      Eigen::MatrixXd b(m, m);
      for (int i = 0; i < m; ++i) b.col(i) = a.col(pick[i]);
      Eigen::FullPivLU<Eigen::MatrixXd> lu(b);
      if (m > 0 && lu.rank() < m) return;
      const auto k = nonbasic.size();
      for (unsigned long mask = 0; mask < (1UL << k); ++mask) {
        std::vector<double> x(n, 0.0);
        Eigen::VectorXd rhs = Eigen::Map<const Eigen::VectorXd>(lp.rhs.data(), m);
        for (std::size_t q = 0; q < k; ++q) {
          const int j = nonbasic[q];
          x[j] = (mask >> q) & 1 ? lp.upper[j] : lp.lower[j];
          rhs -= a.col(j) * x[j];
        }
        if (m > 0) {
          Eigen::VectorXd xb = lu.solve(rhs);
          bool ok = true;
          for (int i = 0; i < m; ++i) {
            const int j = pick[i];
            if (xb(i) < lp.lower[j] - tol || xb(i) > lp.upper[j] + tol) ok = false;
            x[j] = xb(i);
          }
          if (!ok) continue;
        }
        double obj = 0.0;
        for (int j = 0; j < n; ++j) obj += lp.cost[j] * x[j];
        if (!best || obj < *best) best = obj;
      }
      return;
    }
    for (int j = start; j <= n - (m - depth); ++j) {
      pick[depth] = j;
      choose(j + 1, depth + 1);
    }
  };
  choose(0, 0);
  return best;
}

// Plain depth-first enumeration of every action sequence on the grid, no
// state merging. Exponential; only for tiny horizons and coarse grids.
inline double exhaustive_dispatch(const DispatchProblem& p, double resolution) {
  const auto& b = p.battery;
  std::vector<double> actions;
  for (long k = static_cast<long>(std::ceil(b.u_min / resolution - 1e-9));
       k <= static_cast<long>(std::floor(b.u_max / resolution + 1e-9)); ++k) {
    actions.push_back(std::clamp(k * resolution, b.u_min, b.u_max));
  }
  double best = std::numeric_limits<double>::infinity();
  const int horizon = p.horizon();
  std::function<void(int, double, double)> dfs = [&](int t, double e, double cost) {
    if (t == horizon) {
      if (!p.terminal_min_energy || e >= *p.terminal_min_energy - 1e-12) best = std::min(best, cost);
      return;
    }
    for (double u : actions) {
      // Written out independently of next_energy / step_cost.
      double e2 = u >= 0 ? e + b.eta * u * p.dt : e + u * p.dt / b.eta;
      if (e2 < -1e-12 || e2 > b.e_max + 1e-12) continue;
      e2 = std::clamp(e2, 0.0, b.e_max);
      const double g = p.demand[t] + p.pv[t] + u;
      const double price = g >= 0 ? p.tariff.consumption()[t] : p.tariff.injection()[t];
      dfs(t + 1, e2, cost + price * g * p.dt);
    }
  };
  dfs(0, b.e_init, 0.0);
  return best;
}

// Small random model config: hidden <= 8, short windows, random covariate
// subsets and quantile sets.
inline ModelConfig random_small_config(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  ModelConfig c;
  c.horizon = pick(1, 4);
  c.input_window = c.horizon + pick(0, 6);
  const int heads[] = {1, 2};
  c.attention_heads = heads[pick(0, 1)];
  c.hidden_size = c.attention_heads * pick(1, 8 / c.attention_heads);
  const std::vector<std::vector<double>> levels{{0.5}, {0.1, 0.5, 0.9}, {0.2, 0.4, 0.6, 0.8}};
  c.quantiles = levels[pick(0, 2)];
  c.dropout = 0.0;
  const CalendarFeature all[] = {CalendarFeature::kQuarterSin, CalendarFeature::kQuarterCos,
                                 CalendarFeature::kWeekdaySin, CalendarFeature::kIsWeekend,
                                 CalendarFeature::kHourOfDay};
  c.past_covariates.clear();
  c.future_covariates.clear();
  for (auto f : all) {
    if (pick(0, 1)) c.past_covariates.push_back(f);
    if (pick(0, 1)) c.future_covariates.push_back(f);
  }
  if (c.future_covariates.empty()) c.future_covariates.push_back(CalendarFeature::kQuarterCos);
  return c;
}

// Random inputs in [0, 1]; targets shifted by `target_shift` so that no
// prediction sits near a pinball kink.
inline ForecastSample random_sample(const ModelConfig& c, std::uint64_t seed,
                                    double target_shift = 10.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  ForecastSample s;
  s.past_target.resize(c.input_window);
  for (auto& v : s.past_target) v = u(rng);
  s.past_covariates.resize(c.input_window, static_cast<Eigen::Index>(c.past_covariates.size()));
  for (auto& v : s.past_covariates.reshaped()) v = u(rng);
  s.future_covariates.resize(c.horizon, static_cast<Eigen::Index>(c.future_covariates.size()));
  for (auto& v : s.future_covariates.reshaped()) v = u(rng);
  std::vector<double> target(c.horizon);
  for (auto& v : target) v = target_shift + u(rng);
  s.target = target;
  return s;
}

struct GradcheckResult {
  double max_relative_error = 0.0;
  std::size_t worst_index = 0;
  std::size_t checked = 0;
};

// Central differences over every parameter. Relative error uses the
// denominator max(|analytic|, |numeric|, floor).
inline GradcheckResult model_gradcheck(const ModelWeights& weights,
                                       std::span<const ForecastSample> batch, double h = 1e-4,
                                       double floor = 1e-6) {
  LossOptions opts;
  opts.policy = ExecutionPolicy::kSerial;
  const auto analytic = loss_and_gradients(weights, batch, opts).gradients;
  ModelWeights w = weights;
  GradcheckResult r;
  for (std::size_t i = 0; i < w.values.size(); ++i) {
    const double saved = w.values[i];
    w.values[i] = saved + h;
    const double up = evaluate_loss(w, batch, ExecutionPolicy::kSerial);
    w.values[i] = saved - h;
    const double down = evaluate_loss(w, batch, ExecutionPolicy::kSerial);
    w.values[i] = saved;
    const double numeric = (up - down) / (2 * h);
    const double scale = std::max({std::abs(numeric), std::abs(analytic[i]), floor});
    const double err = std::abs(numeric - analytic[i]) / scale;
    if (err > r.max_relative_error) {
      r.max_relative_error = err;
      r.worst_index = i;
    }
    ++r.checked;
  }
  return r;
}

}  // namespace hems::testing
