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

#include "hems/simplex.hpp"

#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>

#include "hems/errors.hpp"

namespace hems {

void LinearProgram::validate() const {
  const auto n = cost.size();
  if (lower.size() != n || upper.size() != n) throw SolverError("LP: bound vectors mismatch");
  if (a.rows() != static_cast<Eigen::Index>(rhs.size()) || a.cols() != static_cast<Eigen::Index>(n)) {
    throw SolverError("LP: constraint matrix dimensions mismatch");
  }
  if (!names.empty() && names.size() != n) throw SolverError("LP: name map size mismatch");
  for (std::size_t j = 0; j < n; ++j) {
    if (!std::isfinite(cost[j])) throw SolverError("LP: non-finite cost coefficient");
    if (std::isnan(lower[j]) || std::isnan(upper[j]) || lower[j] > upper[j] ||
        lower[j] == kInfinity || upper[j] == -kInfinity) {
      throw SolverError("LP: invalid bounds for variable " + std::to_string(j));
    }
  }
  for (double b : rhs) {
    if (!std::isfinite(b)) throw SolverError("LP: non-finite right-hand side");
  }
  for (int k = 0; k < a.outerSize(); ++k) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(a, k); it; ++it) {
      if (!std::isfinite(it.value())) throw SolverError("LP: non-finite matrix coefficient");
    }
  }
  if (!initial_basis.empty() && initial_basis.size() != rhs.size()) {
    throw SolverError("LP: initial basis must name one column per row");
  }
}

const char* lp_status_name(LpStatus status) {
  switch (status) {
    case LpStatus::kOptimal: return "optimal";
    case LpStatus::kInfeasible: return "infeasible";
    case LpStatus::kUnbounded: return "unbounded";
  }
  return "?";
}

void pivot_tableau(std::vector<double>& tableau, int rows, int cols, int pivot_row, int pivot_col,
                   ExecutionPolicy policy) {
  double* prow = tableau.data() + static_cast<std::size_t>(pivot_row) * cols;
  const double inv = 1.0 / prow[pivot_col];
  for (int j = 0; j < cols; ++j) prow[j] *= inv;
  prow[pivot_col] = 1.0;
  const bool parallel =
      policy == ExecutionPolicy::kParallel && static_cast<long>(rows) * cols > 50000;
#pragma omp parallel for schedule(static) if (parallel)
  for (int i = 0; i < rows; ++i) {
    if (i == pivot_row) continue;
    double* row = tableau.data() + static_cast<std::size_t>(i) * cols;
    const double factor = row[pivot_col];
    if (factor == 0.0) continue;
    for (int j = 0; j < cols; ++j) row[j] -= factor * prow[j];
    row[pivot_col] = 0.0;
  }
}

namespace {

enum class NonbasicAt { kLower, kUpper, kZero };

class Simplex {
 public:
  Simplex(const LinearProgram& lp, const SimplexOptions& opt) : lp_(lp), opt_(opt) {
    m_ = lp.num_rows();
    n_ = lp.num_vars();
  }

  LpSolution run() {
    LpSolution out;
    bool crashed = !lp_.initial_basis.empty() && try_crash_basis();
    if (!crashed) {
      start_from_artificials();
      set_costs(/*phase_one=*/true);
      auto status = iterate();
      if (status == LpStatus::kUnbounded) throw SolverError("LP: phase 1 reported unbounded");
      double infeas = 0.0;
      for (int j = n_; j < cols_; ++j) infeas += value_of(j);
      double scale = 1.0;
      for (double b : lp_.rhs) scale = std::max(scale, std::abs(b));
      if (infeas > opt_.feasibility_tol * scale) {
        out.status = LpStatus::kInfeasible;
        out.iterations = iterations_;
        return out;
      }
      drive_out_artificials();
    }
    set_costs(/*phase_one=*/false);
    out.status = iterate();
    out.iterations = iterations_;
    if (out.status != LpStatus::kOptimal) return out;
    refine_basic_values();
    out.x.assign(n_, 0.0);
    for (int j = 0; j < n_; ++j) out.x[j] = value_of(j);
    out.objective = 0.0;
    for (int j = 0; j < n_; ++j) out.objective += lp_.cost[j] * out.x[j];
    return out;
  }

 private:
  double& t(int i, int j) { return tab_[static_cast<std::size_t>(i) * cols_ + j]; }

  double value_of(int j) const { return pos_[j] >= 0 ? beta_[pos_[j]] : x_[j]; }

  void init_columns(int cols) {
    cols_ = cols;
    lo_.assign(cols_, 0.0);
    up_.assign(cols_, kInfinity);
    std::copy(lp_.lower.begin(), lp_.lower.end(), lo_.begin());
    std::copy(lp_.upper.begin(), lp_.upper.end(), up_.begin());
    x_.assign(cols_, 0.0);
    at_.assign(cols_, NonbasicAt::kZero);
    pos_.assign(cols_, -1);
    for (int j = 0; j < n_; ++j) {
      if (std::isfinite(lo_[j])) {
        at_[j] = NonbasicAt::kLower;
        x_[j] = lo_[j];
      } else if (std::isfinite(up_[j])) {
        at_[j] = NonbasicAt::kUpper;
        x_[j] = up_[j];
      }
    }
  }

  // b - A_N x_N over the structural columns.
  std::vector<double> residual() const {
    std::vector<double> r(lp_.rhs);
    for (int k = 0; k < lp_.a.outerSize(); ++k) {
      if (pos_[k] >= 0 || x_[k] == 0.0) continue;
      for (Eigen::SparseMatrix<double>::InnerIterator it(lp_.a, k); it; ++it) {
        r[it.row()] -= it.value() * x_[k];
      }
    }
    return r;
  }

  bool try_crash_basis() {
    init_columns(n_);
    basis_ = lp_.initial_basis;
    for (int i = 0; i < m_; ++i) {
      int j = basis_[i];
      if (j < 0 || j >= n_ || pos_[j] >= 0) return false;
      pos_[j] = i;
    }
    Eigen::SparseMatrix<double> b(m_, m_);
    std::vector<Eigen::Triplet<double>> trip;
    for (int i = 0; i < m_; ++i) {
      for (Eigen::SparseMatrix<double>::InnerIterator it(lp_.a, basis_[i]); it; ++it) {
        trip.emplace_back(static_cast<int>(it.row()), i, it.value());
      }
    }
    b.setFromTriplets(trip.begin(), trip.end());
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(b);
    if (lu.info() != Eigen::Success) return false;
    auto r = residual();
    Eigen::VectorXd rv = Eigen::Map<Eigen::VectorXd>(r.data(), m_);
    Eigen::VectorXd xb = lu.solve(rv);
    if (lu.info() != Eigen::Success) return false;
    for (int i = 0; i < m_; ++i) {
      int j = basis_[i];
      if (!std::isfinite(xb(i)) || xb(i) < lo_[j] - opt_.feasibility_tol ||
          xb(i) > up_[j] + opt_.feasibility_tol) {
        return false;
      }
    }
    Eigen::MatrixXd dense = Eigen::MatrixXd(lp_.a);
    Eigen::MatrixXd binv_a = lu.solve(dense);
    if (lu.info() != Eigen::Success) return false;
    tab_.assign(static_cast<std::size_t>(m_) * cols_, 0.0);
    for (int i = 0; i < m_; ++i) {
      for (int j = 0; j < n_; ++j) t(i, j) = binv_a(i, j);
      t(i, basis_[i]) = 1.0;
    }
    for (int i = 0; i < m_; ++i) {
      for (int k = 0; k < m_; ++k) {
        if (k != i) t(i, basis_[k]) = 0.0;
      }
    }
    beta_.assign(xb.data(), xb.data() + m_);
    return true;
  }

  void start_from_artificials() {
    init_columns(n_ + m_);
    auto r = residual();
    tab_.assign(static_cast<std::size_t>(m_) * cols_, 0.0);
    sign_.assign(m_, 1.0);
    basis_.assign(m_, -1);
    beta_.assign(m_, 0.0);
    for (int k = 0; k < lp_.a.outerSize(); ++k) {
      for (Eigen::SparseMatrix<double>::InnerIterator it(lp_.a, k); it; ++it) {
        t(static_cast<int>(it.row()), k) = it.value();
      }
    }
    for (int i = 0; i < m_; ++i) {
      sign_[i] = r[i] < 0.0 ? -1.0 : 1.0;
      // Basis column is sign_i * e_i, so B^-1 multiplies row i by sign_i.
      for (int j = 0; j < n_; ++j) t(i, j) *= sign_[i];
      t(i, n_ + i) = 1.0;
      basis_[i] = n_ + i;
      pos_[n_ + i] = i;
      beta_[i] = std::abs(r[i]);
    }
  }

  void set_costs(bool phase_one) {
    cost_.assign(cols_, 0.0);
    if (phase_one) {
      for (int j = n_; j < cols_; ++j) cost_[j] = 1.0;
    } else {
      std::copy(lp_.cost.begin(), lp_.cost.end(), cost_.begin());
      for (int j = n_; j < cols_; ++j) up_[j] = 0.0;  // artificials are fixed at 0
    }
    d_ = cost_;
    for (int i = 0; i < m_; ++i) {
      const double cb = cost_[basis_[i]];
      if (cb == 0.0) continue;
      for (int j = 0; j < cols_; ++j) d_[j] -= cb * t(i, j);
    }
    for (int i = 0; i < m_; ++i) d_[basis_[i]] = 0.0;
  }

  int choose_entering(bool bland) const {
    int best = -1;
    double best_score = 0.0;
    for (int j = 0; j < cols_; ++j) {
      if (pos_[j] >= 0 || lo_[j] == up_[j]) continue;
      double score = 0.0;
      switch (at_[j]) {
        case NonbasicAt::kLower: score = -d_[j]; break;
        case NonbasicAt::kUpper: score = d_[j]; break;
        case NonbasicAt::kZero: score = std::abs(d_[j]); break;
      }
      if (score <= opt_.optimality_tol) continue;
      if (bland) return j;
      if (score > best_score) {
        best = j;
        best_score = score;
      }
    }
    return best;
  }

  LpStatus iterate() {
    int streak = 0;
    for (;;) {
      if (iterations_ >= opt_.max_iterations) {
        throw SolverError("LP: iteration cap of " + std::to_string(opt_.max_iterations) +
                          " exceeded");
      }
      const bool bland = opt_.pricing == PricingRule::kBland ||
                         streak >= opt_.degenerate_streak_for_bland;
      const int q = choose_entering(bland);
      if (q < 0) return LpStatus::kOptimal;
      ++iterations_;
      const double dir = d_[q] < 0.0 ? 1.0 : -1.0;

      int leave = -1;
      double theta = kInfinity;
      double leave_alpha = 0.0;
      for (int i = 0; i < m_; ++i) {
        const double tiq = t(i, q);
        if (std::abs(tiq) <= opt_.pivot_tol) continue;
        const double alpha = dir * tiq;
        const int bi = basis_[i];
        double limit;
        if (alpha > 0.0) {
          if (!std::isfinite(lo_[bi])) continue;
          limit = (beta_[i] - lo_[bi]) / alpha;
        } else {
          if (!std::isfinite(up_[bi])) continue;
          limit = (up_[bi] - beta_[i]) / -alpha;
        }
        limit = std::max(limit, 0.0);
        bool take = false;
        if (leave < 0 || limit < theta - 1e-12) {
          take = true;
        } else if (limit <= theta + 1e-12) {
          take = bland ? bi < basis_[leave] : std::abs(alpha) > std::abs(leave_alpha);
        }
        if (take) {
          leave = i;
          theta = limit;
          leave_alpha = alpha;
        }
      }
      const double flip = up_[q] - lo_[q];
      if (std::isfinite(flip) && flip <= theta) {
        // Entering variable reaches its opposite bound first.
        for (int i = 0; i < m_; ++i) beta_[i] -= dir * flip * t(i, q);
        at_[q] = at_[q] == NonbasicAt::kLower ? NonbasicAt::kUpper : NonbasicAt::kLower;
        x_[q] = at_[q] == NonbasicAt::kLower ? lo_[q] : up_[q];
        streak = 0;
        continue;
      }
      if (leave < 0) return LpStatus::kUnbounded;

      streak = theta <= 1e-12 ? streak + 1 : 0;
      const double entering_value = x_[q] + dir * theta;
      for (int i = 0; i < m_; ++i) beta_[i] -= dir * theta * t(i, q);
      const int out = basis_[leave];
      if (leave_alpha > 0.0) {
        at_[out] = NonbasicAt::kLower;
        x_[out] = lo_[out];
      } else {
        at_[out] = NonbasicAt::kUpper;
        x_[out] = up_[out];
      }
      pos_[out] = -1;
      basis_[leave] = q;
      pos_[q] = leave;
      beta_[leave] = entering_value;
      pivot_tableau(tab_, m_, cols_, leave, q, opt_.policy);
      const double dq = d_[q];
      const double* prow = tab_.data() + static_cast<std::size_t>(leave) * cols_;
      for (int j = 0; j < cols_; ++j) d_[j] -= dq * prow[j];
      d_[q] = 0.0;
    }
  }

  void drive_out_artificials() {
    for (int i = 0; i < m_; ++i) {
      if (basis_[i] < n_) continue;
      int best = -1;
      double best_mag = 1e-9;
      for (int j = 0; j < n_; ++j) {
        if (pos_[j] >= 0) continue;
        if (std::abs(t(i, j)) > best_mag) {
          best = j;
          best_mag = std::abs(t(i, j));
        }
      }
      if (best < 0) continue;  // redundant row; artificial stays basic at 0
      const int out = basis_[i];
      pos_[out] = -1;
      at_[out] = NonbasicAt::kLower;
      x_[out] = 0.0;
      beta_[i] = x_[best];
      basis_[i] = best;
      pos_[best] = i;
      pivot_tableau(tab_, m_, cols_, i, best, opt_.policy);
    }
  }

  // Recomputes basic values from the original data so that tableau drift
  // does not leak into the reported solution.
  void refine_basic_values() {
    if (m_ == 0) return;
    Eigen::SparseMatrix<double> b(m_, m_);
    std::vector<Eigen::Triplet<double>> trip;
    for (int i = 0; i < m_; ++i) {
      const int j = basis_[i];
      if (j < n_) {
        for (Eigen::SparseMatrix<double>::InnerIterator it(lp_.a, j); it; ++it) {
          trip.emplace_back(static_cast<int>(it.row()), i, it.value());
        }
      } else {
        trip.emplace_back(j - n_, i, sign_[j - n_]);
      }
    }
    b.setFromTriplets(trip.begin(), trip.end());
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(b);
    if (lu.info() != Eigen::Success) return;
    auto r = residual();
    for (int j = n_; j < cols_; ++j) {
      if (pos_[j] < 0 && x_[j] != 0.0) r[j - n_] -= sign_[j - n_] * x_[j];
    }
    Eigen::VectorXd xb = lu.solve(Eigen::Map<Eigen::VectorXd>(r.data(), m_));
    if (lu.info() != Eigen::Success || !xb.allFinite()) return;
    for (int i = 0; i < m_; ++i) beta_[i] = xb(i);
  }

  const LinearProgram& lp_;
  const SimplexOptions& opt_;
  int m_ = 0, n_ = 0, cols_ = 0;
  int iterations_ = 0;
  std::vector<double> tab_;
  std::vector<double> beta_, x_, lo_, up_, cost_, d_, sign_;
  std::vector<int> basis_, pos_;
  std::vector<NonbasicAt> at_;
};

}  // namespace

LpSolution solve_lp(const LinearProgram& lp, const SimplexOptions& options) {
  lp.validate();
  Simplex simplex(lp, options);
  return simplex.run();
}

}  // namespace hems
