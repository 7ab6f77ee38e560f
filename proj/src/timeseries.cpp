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

#include "hems/timeseries.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "hems/errors.hpp"

namespace hems {

namespace {

using std::chrono::days;
using std::chrono::floor;
using std::chrono::seconds;

bool parse_int(std::string_view text, std::size_t pos, std::size_t len, int& out) {
  if (pos + len > text.size()) return false;
  int value = 0;
  for (std::size_t i = pos; i < pos + len; ++i) {
    char c = text[i];
    if (c < '0' || c > '9') return false;
    value = value * 10 + (c - '0');
  }
  out = value;
  return true;
}

}  // namespace

std::string_view unit_name(Unit unit) {
  switch (unit) {
    case Unit::kKw: return "kW";
    case Unit::kKwh: return "kWh";
    case Unit::kEurPerKwh: return "EUR_per_kWh";
    case Unit::kDimensionless: return "dimensionless";
  }
  return "?";
}

Timestamp parse_timestamp(std::string_view text) {
  // 2023-01-02T00:15:00Z
  int y, mo, d, h, mi, s;
  bool ok = text.size() == 20 && parse_int(text, 0, 4, y) && text[4] == '-' &&
            parse_int(text, 5, 2, mo) && text[7] == '-' && parse_int(text, 8, 2, d) &&
            text[10] == 'T' && parse_int(text, 11, 2, h) && text[13] == ':' &&
            parse_int(text, 14, 2, mi) && text[16] == ':' && parse_int(text, 17, 2, s) &&
            text[19] == 'Z';
  if (!ok) throw DataError("unparseable timestamp '" + std::string(text) + "'");
  std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(mo)},
                                  std::chrono::day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || h > 23 || mi > 59 || s > 59) {
    throw DataError("invalid calendar timestamp '" + std::string(text) + "'");
  }
  return Timestamp{std::chrono::sys_days{ymd}} + std::chrono::hours{h} +
         std::chrono::minutes{mi} + seconds{s};
}

std::string format_timestamp(Timestamp ts) {
  auto day = floor<days>(ts);
  std::chrono::year_month_day ymd{day};
  std::chrono::hh_mm_ss hms{ts - day};
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<int>(hms.hours().count()), static_cast<int>(hms.minutes().count()),
                static_cast<int>(hms.seconds().count()));
  return buf;
}

bool is_quarter_aligned(Timestamp ts) {
  auto secs = ts.time_since_epoch().count();
  return ((secs % 900) + 900) % 900 == 0;
}

bool is_midnight(Timestamp ts) { return floor<days>(ts) == ts; }

QuarterSeries::QuarterSeries(Timestamp start, std::vector<double> values, Unit unit)
    : start_(start), values_(std::move(values)), unit_(unit) {
  if (!is_quarter_aligned(start_)) {
    throw DataError("series start " + format_timestamp(start_) + " is not quarter-aligned");
  }
  if (values_.empty()) throw DataError("series must contain at least one value");
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) {
      throw DataError("non-finite value at index " + std::to_string(i));
    }
  }
}

std::size_t QuarterSeries::index_of(Timestamp ts) const {
  auto delta = (ts - start_).count();
  if (delta < 0 || delta % kStep.count() != 0 ||
      static_cast<std::size_t>(delta / kStep.count()) >= values_.size()) {
    throw DataError("timestamp " + format_timestamp(ts) + " not on series grid");
  }
  return static_cast<std::size_t>(delta / kStep.count());
}

QuarterSeries QuarterSeries::slice(std::size_t offset, std::size_t count) const {
  if (offset + count > values_.size() || count == 0) {
    throw DataError("slice [" + std::to_string(offset) + ", " + std::to_string(offset + count) +
                    ") outside series of length " + std::to_string(values_.size()));
  }
  return QuarterSeries(timestamp(offset),
                       std::vector<double>(values_.begin() + offset,
                                           values_.begin() + offset + count),
                       unit_);
}

QuarterSeries QuarterSeries::with_values(std::vector<double> values) const {
  return QuarterSeries(start_, std::move(values), unit_);
}

QuarterSeries QuarterSeries::with_unit(Unit unit) const {
  return QuarterSeries(start_, values_, unit);
}

CalendarFeatures calendar_features(Timestamp start, std::size_t steps) {
  if (!is_quarter_aligned(start)) {
    throw DataError("calendar start " + format_timestamp(start) + " is not quarter-aligned");
  }
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  CalendarFeatures rows;
  rows.reserve(steps);
  for (std::size_t i = 0; i < steps; ++i) {
    Timestamp ts = start + kStep * static_cast<long long>(i);
    auto day = floor<days>(ts);
    auto secs_of_day = (ts - day).count();
    CalendarRow row;
    row.quarter_of_day = static_cast<int>(secs_of_day / 900);
    row.hour_of_day = static_cast<int>(secs_of_day / 3600);
    row.day_of_week = static_cast<int>(std::chrono::weekday{day}.iso_encoding()) - 1;
    row.is_weekend = row.day_of_week >= 5 ? 1 : 0;
    double qa = kTwoPi * row.quarter_of_day / kStepsPerDay;
    double wa = kTwoPi * row.day_of_week / 7.0;
    row.quarter_sin = std::sin(qa);
    row.quarter_cos = std::cos(qa);
    row.weekday_sin = std::sin(wa);
    row.weekday_cos = std::cos(wa);
    rows.push_back(row);
  }
  return rows;
}

double feature_value(const CalendarRow& row, CalendarFeature feature) {
  switch (feature) {
    case CalendarFeature::kQuarterSin: return row.quarter_sin;
    case CalendarFeature::kQuarterCos: return row.quarter_cos;
    case CalendarFeature::kWeekdaySin: return row.weekday_sin;
    case CalendarFeature::kWeekdayCos: return row.weekday_cos;
    case CalendarFeature::kIsWeekend: return row.is_weekend;
    case CalendarFeature::kHourOfDay: return row.hour_of_day / 23.0;
    case CalendarFeature::kQuarterOfDay: return row.quarter_of_day / 95.0;
    case CalendarFeature::kDayOfWeek: return row.day_of_week / 6.0;
  }
  return 0.0;
}

namespace {
constexpr std::pair<CalendarFeature, std::string_view> kFeatureNames[] = {
    {CalendarFeature::kQuarterSin, "quarter_sin"},   {CalendarFeature::kQuarterCos, "quarter_cos"},
    {CalendarFeature::kWeekdaySin, "weekday_sin"},   {CalendarFeature::kWeekdayCos, "weekday_cos"},
    {CalendarFeature::kIsWeekend, "is_weekend"},     {CalendarFeature::kHourOfDay, "hour_of_day"},
    {CalendarFeature::kQuarterOfDay, "quarter_of_day"}, {CalendarFeature::kDayOfWeek, "day_of_week"},
};
}  // namespace

std::string_view feature_name(CalendarFeature feature) {
  for (const auto& [f, name] : kFeatureNames) {
    if (f == feature) return name;
  }
  return "?";
}

CalendarFeature parse_feature(std::string_view name) {
  for (const auto& [f, n] : kFeatureNames) {
    if (n == name) return f;
  }
  throw ConfigError("unknown calendar feature '" + std::string(name) + "'");
}

void BatteryParams::validate() const {
  auto fail = [](const std::string& msg) { throw ConfigError("battery: " + msg); };
  if (!(e_max >= 0.0) || !std::isfinite(e_max)) fail("e_max must be finite and >= 0");
  if (!(u_min <= 0.0) || !std::isfinite(u_min)) fail("u_min must be finite and <= 0");
  if (!(u_max >= 0.0) || !std::isfinite(u_max)) fail("u_max must be finite and >= 0");
  if (!(eta > 0.0 && eta <= 1.0)) fail("eta must lie in (0, 1]");
  if (!(e_init >= 0.0 && e_init <= e_max)) fail("e_init must lie in [0, e_max]");
}

Tariff::Tariff(QuarterSeries lambda_con, QuarterSeries lambda_inj)
    : con_(std::move(lambda_con)), inj_(std::move(lambda_inj)) {
  if (!con_.same_grid(inj_)) throw DataError("tariff series are on different grids");
  for (std::size_t i = 0; i < con_.size(); ++i) {
    if (con_[i] < 0.0 || inj_[i] < 0.0) {
      throw DataError("negative price at index " + std::to_string(i));
    }
  }
}

Tariff Tariff::from_consumption(const QuarterSeries& lambda_con, double injection_ratio) {
  std::vector<double> inj(lambda_con.size());
  std::transform(lambda_con.values().begin(), lambda_con.values().end(), inj.begin(),
                 [&](double p) { return injection_ratio * p; });
  return Tariff(lambda_con, lambda_con.with_values(std::move(inj)));
}

Tariff Tariff::slice(std::size_t offset, std::size_t count) const {
  return Tariff(con_.slice(offset, count), inj_.slice(offset, count));
}

double mae(std::span<const double> forecast, std::span<const double> actual) {
  if (forecast.size() != actual.size() || forecast.empty()) {
    throw DataError("mae: length mismatch or empty input");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < forecast.size(); ++i) sum += std::abs(forecast[i] - actual[i]);
  return sum / static_cast<double>(forecast.size());
}

double mae(const QuarterSeries& forecast, const QuarterSeries& actual) {
  if (!forecast.same_grid(actual)) throw DataError("mae: series are on different grids");
  if (forecast.unit() != actual.unit()) throw DataError("mae: unit mismatch");
  return mae(forecast.values(), actual.values());
}

double pinball(double quantile, double actual, double prediction) {
  double diff = actual - prediction;
  return std::max(quantile * diff, (quantile - 1.0) * diff);
}

double pinball_loss(std::span<const double> predictions, double actual,
                    std::span<const double> quantiles) {
  if (predictions.size() != quantiles.size() || quantiles.empty()) {
    throw DataError("pinball_loss: need one prediction per quantile");
  }
  double sum = 0.0;
  for (std::size_t k = 0; k < quantiles.size(); ++k) {
    double q = quantiles[k];
    if (!(q > 0.0 && q < 1.0)) throw DataError("quantile level outside (0, 1)");
    if (k > 0 && !(q > quantiles[k - 1])) throw DataError("quantile levels must increase");
    sum += pinball(q, actual, predictions[k]);
  }
  return sum / static_cast<double>(quantiles.size());
}

}  // namespace hems
