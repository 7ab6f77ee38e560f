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

#include "hems/preprocess.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "hems/errors.hpp"

namespace hems {
namespace {

const Timestamp kStart = parse_timestamp("2023-01-02T00:00:00Z");

std::vector<RawSample> clean_raw(int days, double scale = 1.0) {
  std::vector<RawSample> raw;
  for (int i = 0; i < days * kStepsPerDay; ++i) {
    raw.push_back({kStart + kStep * i, scale * (1.0 + 0.5 * std::sin(i * 0.07))});
  }
  return raw;
}

std::vector<RawSample> to_raw(const QuarterSeries& s) {
  std::vector<RawSample> raw;
  for (std::size_t i = 0; i < s.size(); ++i) raw.push_back({s.timestamp(i), s[i]});
  return raw;
}

TEST(Preprocess, CleanInputUnchanged) {
  auto raw = clean_raw(3);
  auto s = preprocess(raw);
  ASSERT_EQ(s.size(), raw.size());
  EXPECT_EQ(s.start(), kStart);
  for (std::size_t i = 0; i < raw.size(); ++i) EXPECT_EQ(s[i], *raw[i].value);
}

TEST(Preprocess, NullInterpolated) {
  auto raw = clean_raw(2);
  raw[10].value = 1.0;
  raw[11].value = std::nullopt;
  raw[12].value = 2.0;
  auto s = preprocess(raw);
  EXPECT_DOUBLE_EQ(s[11], 1.5);
}

TEST(Preprocess, FourStepGapFilledFiveStepGapDropsDay) {
  auto raw = clean_raw(3);
  for (int k = 0; k < 4; ++k) raw[100 + k].value = std::nullopt;
  auto s = preprocess(raw);
  EXPECT_EQ(s.size(), raw.size());
  raw[104].value = std::nullopt;  // now 5 missing in day 1
  auto t = preprocess(raw);
  // Day 1 dropped; day 2 alone (later of two equal runs) survives.
  EXPECT_EQ(t.size(), 96u);
  EXPECT_EQ(t.start(), kStart + kStep * 192);
}

TEST(Preprocess, MissingSlotsAndSnapping) {
  std::vector<RawSample> raw;
  for (int i = 0; i < 2 * kStepsPerDay; ++i) {
    // jitter of a few seconds snaps back onto the grid
    raw.push_back({kStart + kStep * i + std::chrono::seconds(i % 3 == 0 ? 7 : -5), 1.0});
  }
  auto s = preprocess(raw);
  EXPECT_EQ(s.start(), kStart);
  EXPECT_EQ(s.size(), 192u);
}

TEST(Preprocess, NegativeClippedToZero) {
  auto raw = clean_raw(2);
  raw[5].value = -3.0;
  EXPECT_EQ(preprocess(raw)[5], 0.0);
}

TEST(Preprocess, OutlierClippedToBound) {
  // Household peaking near 8 kW with one 50 kW reading.
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.2, 8.0);
  std::vector<RawSample> raw;
  for (int i = 0; i < 20 * kStepsPerDay; ++i) raw.push_back({kStart + kStep * i, u(rng)});
  raw[777].value = 50.0;
  auto s = preprocess(raw);
  std::vector<double> v;
  for (const auto& r : raw) v.push_back(*r.value);
  // Bound from an independent sort-based nearest-rank computation.
  std::sort(v.begin(), v.end());
  auto rank = [&](int permille) {
    std::size_t r = (static_cast<std::size_t>(permille) * v.size() + 999) / 1000;
    return v[r - 1];
  };
  const double bound = rank(999) + 3.0 * (rank(750) - rank(250));
  EXPECT_LT(bound, 50.0);
  EXPECT_DOUBLE_EQ(s[777], bound);
  EXPECT_DOUBLE_EQ(*std::max_element(s.values().begin(), s.values().end()), bound);
}

TEST(Preprocess, Idempotent) {
  std::mt19937_64 rng(9);
  std::lognormal_distribution<double> ln(0.0, 1.0);
  std::bernoulli_distribution drop(0.08);
  std::vector<RawSample> raw;
  for (int i = 0; i < 10 * kStepsPerDay; ++i) {
    raw.push_back({kStart + kStep * i, drop(rng) ? std::nullopt : std::optional<double>(ln(rng))});
  }
  raw[400].value = 500.0;
  auto once = preprocess(raw);
  auto twice = preprocess(to_raw(once));
  EXPECT_EQ(once, twice);
}

TEST(Preprocess, Errors) {
  std::vector<RawSample> empty;
  EXPECT_THROW(preprocess(empty), DataError);
  auto raw = clean_raw(2);
  for (std::size_t i = 0; i < raw.size(); i += 2) raw[i].value = std::nullopt;
  raw[1].value = std::nullopt;
  EXPECT_THROW(preprocess(raw), DataError);  // > 50 % invalid
  auto short_raw = clean_raw(2);
  short_raw.resize(50);
  EXPECT_THROW(preprocess(short_raw), DataError);
}

}  // namespace
}  // namespace hems
