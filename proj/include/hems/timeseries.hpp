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

#include <chrono>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace hems {

using Timestamp = std::chrono::sys_seconds;

inline constexpr std::chrono::seconds kStep{900};
inline constexpr double kStepHours = 0.25;
inline constexpr int kStepsPerDay = 96;

enum class Unit { kKw, kKwh, kEurPerKwh, kDimensionless };

std::string_view unit_name(Unit unit);

// Parses `YYYY-MM-DDTHH:MM:SSZ` (UTC). Throws DataError on malformed input.
Timestamp parse_timestamp(std::string_view text);
std::string format_timestamp(Timestamp ts);

bool is_quarter_aligned(Timestamp ts);
bool is_midnight(Timestamp ts);

// Values pinned to a contiguous 15-minute UTC grid. Immutable after
// construction; every value is finite and the start is quarter-aligned.
class QuarterSeries {
 public:
  QuarterSeries(Timestamp start, std::vector<double> values, Unit unit);

  Timestamp start() const { return start_; }
  // One step past the last sample.
  Timestamp end() const { return timestamp(values_.size()); }
  Timestamp timestamp(std::size_t index) const {
    return start_ + kStep * static_cast<long long>(index);
  }
  std::size_t size() const { return values_.size(); }
  Unit unit() const { return unit_; }
  std::span<const double> values() const { return values_; }
  double operator[](std::size_t index) const { return values_[index]; }

  // Index of `ts` on this grid; throws DataError if off-grid or out of range.
  std::size_t index_of(Timestamp ts) const;

  QuarterSeries slice(std::size_t offset, std::size_t count) const;
  QuarterSeries with_values(std::vector<double> values) const;
  QuarterSeries with_unit(Unit unit) const;

  bool same_grid(const QuarterSeries& other) const {
    return start_ == other.start_ && values_.size() == other.values_.size();
  }

  friend bool operator==(const QuarterSeries&, const QuarterSeries&) = default;

 private:
  Timestamp start_;
  std::vector<double> values_;
  Unit unit_;
};

// Calendar covariates derived from the timestamp grid alone.
struct CalendarRow {
  int quarter_of_day = 0;  // [0, 95]
  int hour_of_day = 0;     // [0, 23]
  int day_of_week = 0;     // [0, 6], 0 = Monday
  int is_weekend = 0;
  double quarter_sin = 0.0;
  double quarter_cos = 1.0;
  double weekday_sin = 0.0;
  double weekday_cos = 1.0;

  friend bool operator==(const CalendarRow&, const CalendarRow&) = default;
};

using CalendarFeatures = std::vector<CalendarRow>;

CalendarFeatures calendar_features(Timestamp start, std::size_t steps);

// Real-valued covariates a forecaster can consume.
enum class CalendarFeature {
  kQuarterSin,
  kQuarterCos,
  kWeekdaySin,
  kWeekdayCos,
  kIsWeekend,
  kHourOfDay,     // scaled to [0, 1]
  kQuarterOfDay,  // scaled to [0, 1]
  kDayOfWeek,     // scaled to [0, 1]
};

double feature_value(const CalendarRow& row, CalendarFeature feature);
std::string_view feature_name(CalendarFeature feature);
CalendarFeature parse_feature(std::string_view name);

struct BatteryParams {
  double e_max = 10.0;   // kWh
  double u_min = -5.0;   // kW, <= 0 (discharge)
  double u_max = 5.0;    // kW, >= 0 (charge)
  double eta = 0.9;      // applied on charge, 1/eta on discharge
  double e_init = 0.0;   // kWh

  // Throws ConfigError when an invariant is violated.
  void validate() const;
};

// Consumption and injection prices on one grid, both nonnegative. The
// inj <= con ordering needed by the dispatch LP is checked by build_lp.
class Tariff {
 public:
  Tariff(QuarterSeries lambda_con, QuarterSeries lambda_inj);

  // Injection price as a fixed fraction of consumption price.
  static Tariff from_consumption(const QuarterSeries& lambda_con, double injection_ratio);

  const QuarterSeries& consumption() const { return con_; }
  const QuarterSeries& injection() const { return inj_; }
  Tariff slice(std::size_t offset, std::size_t count) const;

 private:
  QuarterSeries con_;
  QuarterSeries inj_;
};

// Mean absolute error; throws DataError on grid or unit mismatch.
double mae(const QuarterSeries& forecast, const QuarterSeries& actual);
double mae(std::span<const double> forecast, std::span<const double> actual);

// Mean over quantile levels of the pinball loss of `predictions[k]` at
// level `quantiles[k]` against one observation.
double pinball_loss(std::span<const double> predictions, double actual,
                    std::span<const double> quantiles);

double pinball(double quantile, double actual, double prediction);

}  // namespace hems
