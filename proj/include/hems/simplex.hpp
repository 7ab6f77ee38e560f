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

#include <Eigen/SparseCore>
#include <limits>
#include <string>
#include <vector>

#include "hems/parallel.hpp"

namespace hems {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

// minimize cost . x  subject to  a x = rhs,  lower <= x <= upper.
struct LinearProgram {
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<double> cost;
  Eigen::SparseMatrix<double> a;  // rows x vars
  std::vector<double> rhs;
  std::vector<std::string> names;
  // Optional starting basis, one column per row. Used when it is
  // nonsingular and primal feasible; otherwise phase 1 starts from
  // artificial variables.
  std::vector<int> initial_basis;

  int num_vars() const { return static_cast<int>(cost.size()); }
  int num_rows() const { return static_cast<int>(rhs.size()); }
  // Throws SolverError on inconsistent dimensions, non-finite coefficients
  // or lower > upper.
  void validate() const;
};

enum class LpStatus { kOptimal, kInfeasible, kUnbounded };

const char* lp_status_name(LpStatus status);

struct LpSolution {
  LpStatus status = LpStatus::kInfeasible;
  std::vector<double> x;
  double objective = 0.0;
  int iterations = 0;
};

enum class PricingRule {
  // Most-violated reduced cost; switches to Bland's rule after a run of
  // degenerate pivots and back after the next improving one.
  kDantzigWithBlandFallback,
  // Smallest-index entering and leaving variables throughout.
  kBland,
};

struct SimplexOptions {
  int max_iterations = 200000;
  PricingRule pricing = PricingRule::kDantzigWithBlandFallback;
  int degenerate_streak_for_bland = 30;
  double feasibility_tol = 1e-9;  // bound / equality slack, in the LP's own units
  double optimality_tol = 1e-10;  // reduced cost
  double pivot_tol = 1e-10;       // smallest usable pivot magnitude
  ExecutionPolicy policy = ExecutionPolicy::kParallel;
};

// Dense bounded-variable primal simplex. Throws SolverError when the
// iteration cap is hit; never reports optimal for an unconverged run.
LpSolution solve_lp(const LinearProgram& lp, const SimplexOptions& options = {});

// Row-elimination kernel of one pivot on a dense row-major tableau:
// row `pivot_row` is scaled so that entry `pivot_col` is 1, then removed
// from every other row. Exposed for the serial-vs-parallel benchmark.
void pivot_tableau(std::vector<double>& tableau, int rows, int cols, int pivot_row, int pivot_col,
                   ExecutionPolicy policy);

}  // namespace hems
