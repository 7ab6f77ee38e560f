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

#include <cstddef>
#include <span>
#include <vector>

#include "hems/csv.hpp"
#include "hems/timeseries.hpp"

namespace hems {

struct PreprocessOptions {
  // Longest run of missing quarters repaired by linear interpolation.
  std::size_t max_interpolated_gap = 4;
  // Upper clip bound is q(upper_permille) + iqr_factor * IQR.
  int upper_permille = 999;
  double iqr_factor = 3.0;
  // Fraction of invalid slots above which the input is rejected.
  double max_invalid_fraction = 0.5;
};

// Turns raw meter samples into a clean QuarterSeries:
//  1. snap timestamps to the nearest quarter-hour (several samples in one
//     slot are averaged; nulls count as missing),
//  2. reject the input if more than half the slots are missing,
//  3. clip negatives to 0 and interpolate gaps of at most one hour,
//  4. drop every UTC day still holding a gap and keep the longest remaining
//     contiguous run (the later one on ties),
//  5. clip values above q99.9 + 3 IQR (nearest-rank quantiles).
// The result is a fixed point: preprocessing it again changes nothing.
QuarterSeries preprocess(std::span<const RawSample> raw, const PreprocessOptions& options = {});

// Nearest-rank quantile, rank = ceil(permille * n / 1000).
double nearest_rank_quantile(std::vector<double> values, int permille);

}  // namespace hems
