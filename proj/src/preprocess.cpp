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

#include <algorithm>
#include <cmath>
#include <optional>

#include "hems/errors.hpp"

namespace hems {

double nearest_rank_quantile(std::vector<double> values, int permille) {
  if (values.empty()) throw DataError("quantile of empty data");
  const std::size_t n = values.size();
  std::size_t rank = (static_cast<std::size_t>(permille) * n + 999) / 1000;
  rank = std::clamp<std::size_t>(rank, 1, n);
  std::nth_element(values.begin(), values.begin() + (rank - 1), values.end());
  return values[rank - 1];
}

QuarterSeries preprocess(std::span<const RawSample> raw, const PreprocessOptions& options) {
  if (raw.empty()) throw DataError("preprocess: empty input");
  for (std::size_t i = 1; i < raw.size(); ++i) {
    if (!(raw[i].timestamp > raw[i - 1].timestamp)) {
      throw DataError("preprocess: timestamps must strictly increase (sample " +
                      std::to_string(i) + ")");
    }
  }

  auto snap = [](Timestamp ts) {
    long long secs = ts.time_since_epoch().count();
    long long slot = secs >= 0 ? (secs + 450) / 900 : -((-secs + 449) / 900);
    return slot;
  };
  const long long first_slot = snap(raw.front().timestamp);
  const long long last_slot = snap(raw.back().timestamp);
  const std::size_t n = static_cast<std::size_t>(last_slot - first_slot + 1);
  if (n < static_cast<std::size_t>(kStepsPerDay)) {
    throw DataError("preprocess: need at least one day of data");
  }

  std::vector<double> sum(n, 0.0);
  std::vector<int> count(n, 0);
  for (const auto& s : raw) {
    if (!s.value || !std::isfinite(*s.value)) continue;
    auto idx = static_cast<std::size_t>(snap(s.timestamp) - first_slot);
    sum[idx] += *s.value;
    ++count[idx];
  }
  std::vector<std::optional<double>> slots(n);
  std::size_t missing = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (count[i] > 0) {
      slots[i] = std::max(0.0, sum[i] / count[i]);
    } else {
      ++missing;
    }
  }
  if (static_cast<double>(missing) > options.max_invalid_fraction * static_cast<double>(n)) {
    throw DataError("preprocess: " + std::to_string(missing) + " of " + std::to_string(n) +
                    " quarter-hours are invalid");
  }

  // Interpolate short interior gaps.
  for (std::size_t i = 0; i < n;) {
    if (slots[i]) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < n && !slots[j]) ++j;
    const std::size_t len = j - i;
    if (i > 0 && j < n && len <= options.max_interpolated_gap) {
      double a = *slots[i - 1];
      double b = *slots[j];
      for (std::size_t k = 0; k < len; ++k) {
        slots[i + k] = a + (b - a) * static_cast<double>(k + 1) / static_cast<double>(len + 1);
      }
    }
    i = j;
  }

  // Exclude whole UTC days that still contain a gap.
  const Timestamp grid_start{std::chrono::seconds{first_slot * 900}};
  auto calendar = calendar_features(grid_start, n);
  std::vector<bool> excluded(n, false);
  for (std::size_t i = 0; i < n;) {
    std::size_t day_end = i + static_cast<std::size_t>(kStepsPerDay - calendar[i].quarter_of_day);
    day_end = std::min(day_end, n);
    bool has_gap = false;
    for (std::size_t k = i; k < day_end; ++k) has_gap = has_gap || !slots[k];
    if (has_gap) std::fill(excluded.begin() + i, excluded.begin() + day_end, true);
    i = day_end;
  }
  std::size_t best_start = 0, best_len = 0;
  for (std::size_t i = 0; i < n;) {
    if (excluded[i]) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < n && !excluded[j]) ++j;
    if (j - i >= best_len) {
      best_start = i;
      best_len = j - i;
    }
    i = j;
  }
  if (best_len == 0) throw DataError("preprocess: no complete day survives gap removal");

  std::vector<double> values(best_len);
  for (std::size_t k = 0; k < best_len; ++k) values[k] = *slots[best_start + k];

  const double q_hi = nearest_rank_quantile(values, options.upper_permille);
  const double q25 = nearest_rank_quantile(values, 250);
  const double q75 = nearest_rank_quantile(values, 750);
  const double bound = q_hi + options.iqr_factor * (q75 - q25);
  for (auto& v : values) v = std::min(v, bound);

  return QuarterSeries(grid_start + kStep * static_cast<long long>(best_start), std::move(values),
                       Unit::kKw);
}

}  // namespace hems
