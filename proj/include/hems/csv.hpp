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

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hems/timeseries.hpp"

namespace hems {

// Shortest decimal text that parses back to the same double.
std::string format_double(double value);
// Strict decimal parse (`.` separator); nullopt on anything else.
std::optional<double> parse_double(std::string_view text);

// Series file: header `timestamp,value`, one row per quarter-hour, LF endings.
void write_csv(const std::filesystem::path& path, const QuarterSeries& series);

// Strict reader: timestamps must be aligned, strictly increasing and
// contiguous. Errors name the offending line number.
QuarterSeries read_csv(const std::filesystem::path& path, Unit unit = Unit::kKw);

// A meter sample before preprocessing. `value` is empty for null readings.
struct RawSample {
  Timestamp timestamp;
  std::optional<double> value;
};

// Lenient reader for raw meter exports: accepts misaligned timestamps, gaps
// and null values (`""`, `nan`, `null`, `NA`). Timestamps must still parse
// and strictly increase.
std::vector<RawSample> read_raw_csv(const std::filesystem::path& path);

// Splits one CSV line on commas (no quoting support; none of our formats need it).
std::vector<std::string_view> split_fields(std::string_view line);

}  // namespace hems
