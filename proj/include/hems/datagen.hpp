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

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "hems/parallel.hpp"
#include "hems/timeseries.hpp"

namespace hems {

// Parameters of one synthetic household. Load at quarter q of a day is
//   base_load * daily_shape[q] * (weekend ? weekend_scale : 1)
//   + appliance spikes (Poisson count per day, 1-4 quarters each)
//   + N(0, noise_std), truncated at 0.
struct HouseholdProfile {
  std::string id;
  double base_load = 0.4;  // kW
  std::array<double, kStepsPerDay> daily_shape{};
  double weekend_scale = 1.0;
  double spike_rate = 0.0;   // events per day
  double spike_power = 0.0;  // kW, mean event amplitude
  double noise_std = 0.0;    // kW
  std::uint64_t seed = 0;

  void validate() const;
};

// Draws `count` profiles from one family (shared morning/evening structure,
// per-household timing and magnitudes). Ids are `house-00`, `house-01`, ...
std::vector<HouseholdProfile> random_profiles(std::size_t count, std::uint64_t master_seed);

QuarterSeries generate_household(const HouseholdProfile& profile, Timestamp start, int days);

// Pure function of its arguments; households are generated in parallel under
// kParallel with per-household seeds, so the result ignores thread scheduling.
std::map<std::string, QuarterSeries> generate_cohort(
    const std::vector<HouseholdProfile>& profiles, Timestamp start, int days,
    ExecutionPolicy policy = ExecutionPolicy::kParallel);

// PV generation as non-positive kW (generation reduces grid draw).
QuarterSeries generate_pv(Timestamp start, int days, double peak_kw, std::uint64_t seed);

// Two-peak day-ahead consumption price in EUR/kWh.
QuarterSeries generate_prices(Timestamp start, int days, std::uint64_t seed);

struct ScalerParams {
  double min = 0.0;
  double max = 1.0;

  double transform(double x) const { return (x - min) / (max - min); }
  double inverse_transform(double y) const { return min + y * (max - min); }
};

// Throws DataError when max - min <= 1e-9.
ScalerParams fit_minmax(std::span<const double> train);
ScalerParams fit_minmax(const QuarterSeries& train);
QuarterSeries transform(const QuarterSeries& x, const ScalerParams& scaler);
QuarterSeries inverse_transform(const QuarterSeries& y, const ScalerParams& scaler);

struct SplitSpec {
  int test_weeks = 6;
  int validation_days = 7;
  int training_days = 14;
  // Fit the scaler on the whole series before splitting instead of on the
  // training segment alone. Leaks test statistics; off by default.
  bool scale_before_split = false;

  void validate() const;
  std::size_t required_steps() const {
    return static_cast<std::size_t>(training_days + validation_days + test_weeks * 7) *
           kStepsPerDay;
  }
};

// Contiguous, disjoint segments ordered train < validation < test. The
// offsets index into the parent series so callers can build input windows
// that reach back before a segment.
struct DatasetSplit {
  QuarterSeries train;
  QuarterSeries validation;
  QuarterSeries test;
  std::size_t train_offset = 0;
  std::size_t validation_offset = 0;
  std::size_t test_offset = 0;
};

// The test window is the last `test_weeks` weeks and does not depend on
// `training_days`.
DatasetSplit split_dataset(const QuarterSeries& series, const SplitSpec& spec);

struct PretrainSplit {
  QuarterSeries train;
  QuarterSeries validation;
  std::size_t validation_offset = 0;
};

// Chronological 85/15 split; validation gets floor(0.15 * N) steps.
PretrainSplit pretrain_split(const QuarterSeries& series);

// Per-household CSVs plus `manifest.json` recording the generator profile of
// each file.
struct CohortManifestEntry {
  HouseholdProfile profile;
  std::string file;
  std::string role;  // "pretrain" or "heldout"
};

struct CohortManifest {
  Timestamp start;
  int days = 0;
  std::uint64_t master_seed = 0;
  std::vector<CohortManifestEntry> households;
  std::string pv_file;
  std::string price_file;
  double pv_peak_kw = 0.0;
};

void write_manifest(const std::filesystem::path& path, const CohortManifest& manifest);
CohortManifest read_manifest(const std::filesystem::path& path);

}  // namespace hems
