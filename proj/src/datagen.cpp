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

#include "hems/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>

#include "hems/errors.hpp"
#include "hems/seeding.hpp"
#include "json.hpp"

namespace hems {

namespace {

// Circular hour distance on a 24 h clock.
double hour_distance(double a, double b) {
  double d = std::fmod(std::abs(a - b), 24.0);
  return std::min(d, 24.0 - d);
}

double bump(double hour, double center, double width) {
  double d = hour_distance(hour, center) / width;
  return std::exp(-0.5 * d * d);
}

std::string house_id(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "house-%02zu", index);
  return buf;
}

}  // namespace

void HouseholdProfile::validate() const {
  auto fail = [&](const std::string& msg) { throw ConfigError("profile " + id + ": " + msg); };
  if (!(base_load >= 0.0)) fail("base_load must be >= 0");
  if (!(spike_rate >= 0.0)) fail("spike_rate must be >= 0");
  if (!(spike_power >= 0.0)) fail("spike_power must be >= 0");
  if (!(noise_std >= 0.0)) fail("noise_std must be >= 0");
  if (!(weekend_scale >= 0.0)) fail("weekend_scale must be >= 0");
  for (double w : daily_shape) {
    if (!(w >= 0.0) || !std::isfinite(w)) fail("daily_shape weights must be finite and >= 0");
  }
}

std::vector<HouseholdProfile> random_profiles(std::size_t count, std::uint64_t master_seed) {
  std::vector<HouseholdProfile> profiles;
  profiles.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    HouseholdProfile p;
    p.id = house_id(i);
    std::mt19937_64 rng(derive_seed(master_seed, "profile/" + p.id));
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * u01(rng); };

    p.base_load = uniform(0.2, 0.6);
    double morning_center = uniform(6.5, 8.5);
    double morning_width = uniform(0.7, 1.5);
    double morning_amp = uniform(1.0, 3.0);
    double evening_center = uniform(17.5, 20.5);
    double evening_width = uniform(1.5, 2.5);
    double evening_amp = uniform(2.0, 5.0);
    double midday_amp = uniform(0.0, 1.5);
    for (int q = 0; q < kStepsPerDay; ++q) {
      double hour = q / 4.0;
      p.daily_shape[q] = 0.6 + morning_amp * bump(hour, morning_center, morning_width) +
                         evening_amp * bump(hour, evening_center, evening_width) +
                         midday_amp * bump(hour, 13.0, 1.5);
    }
    p.weekend_scale = uniform(1.0, 1.4);
    p.spike_rate = uniform(2.0, 6.0);
    p.spike_power = uniform(1.0, 3.0);
    p.noise_std = uniform(0.05, 0.15);
    p.seed = derive_seed(master_seed, "gen/" + p.id);
    profiles.push_back(p);
  }
  return profiles;
}

QuarterSeries generate_household(const HouseholdProfile& profile, Timestamp start, int days) {
  profile.validate();
  if (days < 1) throw ConfigError("generate_household: days must be >= 1");
  if (!is_quarter_aligned(start)) throw DataError("generate_household: misaligned start");
  const std::size_t steps = static_cast<std::size_t>(days) * kStepsPerDay;
  auto calendar = calendar_features(start, steps);
  std::vector<double> load(steps);
  for (std::size_t i = 0; i < steps; ++i) {
    const auto& row = calendar[i];
    double scale = row.is_weekend ? profile.weekend_scale : 1.0;
    load[i] = profile.base_load * profile.daily_shape[row.quarter_of_day] * scale;
  }

  std::mt19937_64 rng(profile.seed);
  if (profile.spike_rate > 0.0 && profile.spike_power > 0.0) {
    std::poisson_distribution<int> events(profile.spike_rate);
    std::uniform_int_distribution<int> offset(0, kStepsPerDay - 1);
    std::uniform_int_distribution<int> duration(1, 4);
    std::uniform_real_distribution<double> amplitude(0.5, 1.5);
    for (int d = 0; d < days; ++d) {
      int n = events(rng);
      for (int e = 0; e < n; ++e) {
        std::size_t first = static_cast<std::size_t>(d) * kStepsPerDay + offset(rng);
        int len = duration(rng);
        double power = profile.spike_power * amplitude(rng);
        for (std::size_t i = first; i < std::min(steps, first + len); ++i) load[i] += power;
      }
    }
  }
  if (profile.noise_std > 0.0) {
    std::normal_distribution<double> noise(0.0, profile.noise_std);
    for (auto& v : load) v += noise(rng);
  }
  for (auto& v : load) v = std::max(0.0, v);
  return QuarterSeries(start, std::move(load), Unit::kKw);
}

std::map<std::string, QuarterSeries> generate_cohort(const std::vector<HouseholdProfile>& profiles,
                                                     Timestamp start, int days,
                                                     ExecutionPolicy policy) {
  if (days < 1) throw ConfigError("generate_cohort: days must be >= 1");
  if (!is_quarter_aligned(start)) throw DataError("generate_cohort: misaligned start");
  for (const auto& p : profiles) p.validate();
  std::vector<std::vector<double>> values(profiles.size());
  const long n = static_cast<long>(profiles.size());
  // Exceptions cannot escape an OpenMP region; inputs are validated above.
#pragma omp parallel for schedule(dynamic) if (policy == ExecutionPolicy::kParallel)
  for (long i = 0; i < n; ++i) {
    auto series = generate_household(profiles[i], start, days);
    values[i].assign(series.values().begin(), series.values().end());
  }
  std::map<std::string, QuarterSeries> cohort;
  for (std::size_t i = 0; i < profiles.size(); ++i) {
    if (cohort.count(profiles[i].id)) throw ConfigError("duplicate household id " + profiles[i].id);
    cohort.emplace(profiles[i].id, QuarterSeries(start, std::move(values[i]), Unit::kKw));
  }
  return cohort;
}

QuarterSeries generate_pv(Timestamp start, int days, double peak_kw, std::uint64_t seed) {
  if (days < 1) throw ConfigError("generate_pv: days must be >= 1");
  if (!(peak_kw >= 0.0)) throw ConfigError("generate_pv: peak must be >= 0");
  const std::size_t steps = static_cast<std::size_t>(days) * kStepsPerDay;
  auto calendar = calendar_features(start, steps);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> cloudiness(0.3, 1.0);
  std::uniform_real_distribution<double> flicker(0.9, 1.0);
  std::vector<double> pv(steps);
  double day_factor = cloudiness(rng);
  for (std::size_t i = 0; i < steps; ++i) {
    if (i > 0 && calendar[i].quarter_of_day == 0) day_factor = cloudiness(rng);
    double hour = (calendar[i].quarter_of_day + 0.5) / 4.0;
    double clear = std::max(0.0, std::sin(std::numbers::pi * (hour - 6.0) / 12.0));
    pv[i] = clear > 0.0 ? -peak_kw * clear * day_factor * flicker(rng) : 0.0;
  }
  return QuarterSeries(start, std::move(pv), Unit::kKw);
}

QuarterSeries generate_prices(Timestamp start, int days, std::uint64_t seed) {
  if (days < 1) throw ConfigError("generate_prices: days must be >= 1");
  const std::size_t steps = static_cast<std::size_t>(days) * kStepsPerDay;
  auto calendar = calendar_features(start, steps);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> level(0.0, 0.015);
  std::normal_distribution<double> jitter(0.0, 0.005);
  std::vector<double> price(steps);
  double shift = level(rng);
  for (std::size_t i = 0; i < steps; ++i) {
    if (i > 0 && calendar[i].quarter_of_day == 0) shift = level(rng);
    double hour = calendar[i].quarter_of_day / 4.0;
    double p = 0.10 + 0.08 * bump(hour, 8.0, 1.5) + 0.12 * bump(hour, 19.0, 2.0) -
               0.03 * bump(hour, 3.0, 2.0) + shift + jitter(rng);
    price[i] = std::max(0.01, p);
  }
  return QuarterSeries(start, std::move(price), Unit::kEurPerKwh);
}

ScalerParams fit_minmax(std::span<const double> train) {
  if (train.empty()) throw DataError("fit_minmax: empty training data");
  auto [lo, hi] = std::minmax_element(train.begin(), train.end());
  if (!(*hi - *lo > 1e-9)) throw DataError("fit_minmax: degenerate range (constant series)");
  return ScalerParams{*lo, *hi};
}

ScalerParams fit_minmax(const QuarterSeries& train) { return fit_minmax(train.values()); }

QuarterSeries transform(const QuarterSeries& x, const ScalerParams& scaler) {
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = scaler.transform(x[i]);
  return QuarterSeries(x.start(), std::move(out), Unit::kDimensionless);
}

QuarterSeries inverse_transform(const QuarterSeries& y, const ScalerParams& scaler) {
  std::vector<double> out(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) out[i] = scaler.inverse_transform(y[i]);
  return QuarterSeries(y.start(), std::move(out), Unit::kKw);
}

void SplitSpec::validate() const {
  if (training_days < 1) throw ConfigError("split: training_days must be >= 1");
  if (validation_days < 1) throw ConfigError("split: validation_days must be >= 1");
  if (test_weeks < 1) throw ConfigError("split: test_weeks must be >= 1");
}

DatasetSplit split_dataset(const QuarterSeries& series, const SplitSpec& spec) {
  spec.validate();
  const std::size_t day = kStepsPerDay;
  const std::size_t test_len = static_cast<std::size_t>(spec.test_weeks) * 7 * day;
  const std::size_t val_len = static_cast<std::size_t>(spec.validation_days) * day;
  const std::size_t train_len = static_cast<std::size_t>(spec.training_days) * day;
  if (series.size() < spec.required_steps()) {
    throw DataError("split: series has " + std::to_string(series.size()) + " steps, needs " +
                    std::to_string(spec.required_steps()));
  }
  const std::size_t test_offset = series.size() - test_len;
  const std::size_t val_offset = test_offset - val_len;
  const std::size_t train_offset = val_offset - train_len;
  return DatasetSplit{series.slice(train_offset, train_len), series.slice(val_offset, val_len),
                      series.slice(test_offset, test_len), train_offset, val_offset, test_offset};
}

PretrainSplit pretrain_split(const QuarterSeries& series) {
  const std::size_t n = series.size();
  const std::size_t val_len = (15 * n) / 100;
  if (val_len == 0 || val_len >= n) {
    throw DataError("pretrain_split: series of " + std::to_string(n) + " steps is too short");
  }
  const std::size_t train_len = n - val_len;
  return PretrainSplit{series.slice(0, train_len), series.slice(train_len, val_len), train_len};
}

namespace {

nlohmann::json profile_to_json(const HouseholdProfile& p) {
  return {{"id", p.id},
          {"base_load", p.base_load},
          {"daily_shape", std::vector<double>(p.daily_shape.begin(), p.daily_shape.end())},
          {"weekend_scale", p.weekend_scale},
          {"spike_rate", p.spike_rate},
          {"spike_power", p.spike_power},
          {"noise_std", p.noise_std},
          {"seed", p.seed}};
}

HouseholdProfile profile_from_json(const nlohmann::json& j) {
  HouseholdProfile p;
  p.id = j.at("id").get<std::string>();
  p.base_load = j.at("base_load").get<double>();
  auto shape = j.at("daily_shape").get<std::vector<double>>();
  if (shape.size() != kStepsPerDay) throw DataError("manifest: daily_shape needs 96 entries");
  std::copy(shape.begin(), shape.end(), p.daily_shape.begin());
  p.weekend_scale = j.at("weekend_scale").get<double>();
  p.spike_rate = j.at("spike_rate").get<double>();
  p.spike_power = j.at("spike_power").get<double>();
  p.noise_std = j.at("noise_std").get<double>();
  p.seed = j.at("seed").get<std::uint64_t>();
  return p;
}

}  // namespace

void write_manifest(const std::filesystem::path& path, const CohortManifest& manifest) {
  nlohmann::json households = nlohmann::json::array();
  for (const auto& e : manifest.households) {
    households.push_back({{"id", e.profile.id}, {"file", e.file}, {"role", e.role},
                          {"profile", profile_to_json(e.profile)}});
  }
  nlohmann::json j = {{"format", "hemscast-cohort"},
                      {"version", 1},
                      {"start", format_timestamp(manifest.start)},
                      {"days", manifest.days},
                      {"master_seed", manifest.master_seed},
                      {"pv_file", manifest.pv_file},
                      {"pv_peak_kw", manifest.pv_peak_kw},
                      {"price_file", manifest.price_file},
                      {"households", households}};
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

CohortManifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open manifest " + path.string());
  try {
    auto j = nlohmann::json::parse(in);
    if (j.at("format") != "hemscast-cohort" || j.at("version").get<int>() != 1) {
      throw DataError("manifest: unsupported format or version");
    }
    CohortManifest m;
    m.start = parse_timestamp(j.at("start").get<std::string>());
    m.days = j.at("days").get<int>();
    m.master_seed = j.at("master_seed").get<std::uint64_t>();
    m.pv_file = j.at("pv_file").get<std::string>();
    m.pv_peak_kw = j.at("pv_peak_kw").get<double>();
    m.price_file = j.at("price_file").get<std::string>();
    for (const auto& h : j.at("households")) {
      m.households.push_back(CohortManifestEntry{profile_from_json(h.at("profile")),
                                                 h.at("file").get<std::string>(),
                                                 h.at("role").get<std::string>()});
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("manifest " + path.string() + ": " + e.what());
  }
}

}  // namespace hems
