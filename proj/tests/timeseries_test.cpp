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

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "hems/errors.hpp"

namespace hems {
namespace {

Timestamp ts(const char* s) { return parse_timestamp(s); }

TEST(Timestamp, RoundTrip) {
  EXPECT_EQ(format_timestamp(ts("2023-01-02T00:15:00Z")), "2023-01-02T00:15:00Z");
  EXPECT_THROW(parse_timestamp("2023-01-02 00:15:00"), DataError);
  EXPECT_THROW(parse_timestamp("2023-13-02T00:15:00Z"), DataError);
  EXPECT_THROW(parse_timestamp("2023-02-30T00:00:00Z"), DataError);
  EXPECT_TRUE(is_quarter_aligned(ts("2023-01-02T00:45:00Z")));
  EXPECT_FALSE(is_quarter_aligned(ts("2023-01-02T00:07:00Z")));
}

TEST(QuarterSeries, Invariants) {
  EXPECT_THROW(QuarterSeries(ts("2023-01-02T00:07:00Z"), {1.0}, Unit::kKw), DataError);
  EXPECT_THROW(QuarterSeries(ts("2023-01-02T00:00:00Z"), {}, Unit::kKw), DataError);
  EXPECT_THROW(QuarterSeries(ts("2023-01-02T00:00:00Z"), {1.0, NAN}, Unit::kKw), DataError);
  EXPECT_THROW(QuarterSeries(ts("2023-01-02T00:00:00Z"), {INFINITY}, Unit::kKw), DataError);
  QuarterSeries s(ts("2023-01-02T00:00:00Z"), {1, 2, 3, 4}, Unit::kKw);
  EXPECT_EQ(s.timestamp(2), ts("2023-01-02T00:30:00Z"));
  EXPECT_EQ(s.end(), ts("2023-01-02T01:00:00Z"));
  EXPECT_EQ(s.index_of(ts("2023-01-02T00:45:00Z")), 3u);
  EXPECT_THROW(s.index_of(ts("2023-01-02T01:00:00Z")), DataError);
  auto sl = s.slice(1, 2);
  EXPECT_EQ(sl.start(), ts("2023-01-02T00:15:00Z"));
  EXPECT_EQ(sl[0], 2.0);
  EXPECT_EQ(sl[1], 3.0);
  EXPECT_THROW(s.slice(3, 2), DataError);
}

TEST(Calendar, MondayMidnight) {
  auto rows = calendar_features(ts("2023-01-02T00:00:00Z"), 1);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].quarter_of_day, 0);
  EXPECT_EQ(rows[0].hour_of_day, 0);
  EXPECT_EQ(rows[0].day_of_week, 0);
  EXPECT_EQ(rows[0].is_weekend, 0);
}

TEST(Calendar, SaturdayAfternoon) {
  auto rows = calendar_features(ts("2023-01-07T12:15:00Z"), 1);
  EXPECT_EQ(rows[0].quarter_of_day, 49);
  EXPECT_EQ(rows[0].hour_of_day, 12);
  EXPECT_EQ(rows[0].day_of_week, 5);
  EXPECT_EQ(rows[0].is_weekend, 1);
}

TEST(Calendar, MisalignedStart) {
  EXPECT_THROW(calendar_features(ts("2023-01-02T00:07:00Z"), 4), DataError);
}

TEST(Calendar, CyclicPairsAndConcatenation) {
  const auto start = ts("2023-03-30T22:00:00Z");
  auto all = calendar_features(start, 1000);
  for (const auto& r : all) {
    EXPECT_NEAR(r.quarter_sin * r.quarter_sin + r.quarter_cos * r.quarter_cos, 1.0, 1e-12);
    EXPECT_NEAR(r.weekday_sin * r.weekday_sin + r.weekday_cos * r.weekday_cos, 1.0, 1e-12);
  }
  auto a = calendar_features(start, 377);
  auto b = calendar_features(start + kStep * 377, 623);
  a.insert(a.end(), b.begin(), b.end());
  EXPECT_EQ(a, all);
}

TEST(Calendar, FeatureNames) {
  for (auto f : {CalendarFeature::kQuarterSin, CalendarFeature::kIsWeekend,
                 CalendarFeature::kDayOfWeek}) {
    EXPECT_EQ(parse_feature(feature_name(f)), f);
  }
  EXPECT_THROW(parse_feature("moon_phase"), ConfigError);
}

TEST(Mae, Examples) {
  const auto t0 = ts("2023-01-02T00:00:00Z");
  QuarterSeries f(t0, {1, 1}, Unit::kKw), a(t0, {0, 2}, Unit::kKw);
  EXPECT_DOUBLE_EQ(mae(f, a), 1.0);
  EXPECT_DOUBLE_EQ(mae(a, a), 0.0);
  EXPECT_DOUBLE_EQ(mae(f, a), mae(a, f));
  QuarterSeries shifted(t0 + kStep, {0, 2}, Unit::kKw);
  EXPECT_THROW(mae(f, shifted), DataError);
  QuarterSeries other_unit(t0, {0, 2}, Unit::kKwh);
  EXPECT_THROW(mae(f, other_unit), DataError);
}

TEST(Pinball, Examples) {
  EXPECT_DOUBLE_EQ(pinball(0.5, 2.0, 2.0), 0.0);
  EXPECT_DOUBLE_EQ(pinball(0.9, 1.0, 0.0), 0.9);
  EXPECT_DOUBLE_EQ(pinball(0.1, 0.0, 1.0), 0.9);
  for (double y : {-1.0, 0.3, 5.0}) {
    for (double yhat : {-2.0, 0.3, 4.0}) {
      EXPECT_NEAR(pinball(0.5, y, yhat), 0.5 * std::abs(y - yhat), 1e-15);
    }
  }
  std::vector<double> q{0.1, 0.5, 0.9};
  std::vector<double> p{1.0, 1.0, 1.0};
  EXPECT_DOUBLE_EQ(pinball_loss(p, 1.0, q), 0.0);
  EXPECT_GT(pinball_loss(p, 1.5, q), 0.0);
  std::vector<double> bad{0.0, 0.5};
  EXPECT_THROW(pinball_loss(std::vector<double>{1, 1}, 1.0, bad), DataError);
  std::vector<double> unordered{0.5, 0.1};
  EXPECT_THROW(pinball_loss(std::vector<double>{1, 1}, 1.0, unordered), DataError);
}

TEST(Battery, Validation) {
  BatteryParams b;
  EXPECT_NO_THROW(b.validate());
  b.eta = 1.1;
  EXPECT_THROW(b.validate(), ConfigError);
  b = {};
  b.e_init = 11;
  EXPECT_THROW(b.validate(), ConfigError);
  b = {};
  b.u_min = 1;
  EXPECT_THROW(b.validate(), ConfigError);
}

TEST(Tariff, Validation) {
  const auto t0 = ts("2023-01-02T00:00:00Z");
  QuarterSeries con(t0, {0.2, 0.3}, Unit::kEurPerKwh);
  QuarterSeries neg(t0, {-0.1, 0.3}, Unit::kEurPerKwh);
  EXPECT_THROW(Tariff(con, neg), DataError);
  QuarterSeries other(t0 + kStep, {0.1, 0.1}, Unit::kEurPerKwh);
  EXPECT_THROW(Tariff(con, other), DataError);
  auto t = Tariff::from_consumption(con, 0.4);
  EXPECT_DOUBLE_EQ(t.injection()[1], 0.4 * 0.3);
}

}  // namespace
}  // namespace hems
