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

#include "hems/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "hems/errors.hpp"

namespace hems {

std::string format_double(double value) {
  char buf[64];
  auto result = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, result.ptr);
}

std::optional<double> parse_double(std::string_view text) {
  double value = 0.0;
  if (text.empty()) return std::nullopt;
  auto result = std::from_chars(text.data(), text.data() + text.size(), value);
  if (result.ec != std::errc() || result.ptr != text.data() + text.size()) return std::nullopt;
  return value;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t pos = 0;
  while (true) {
    std::size_t comma = line.find(',', pos);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(pos));
      break;
    }
    fields.push_back(line.substr(pos, comma - pos));
    pos = comma + 1;
  }
  return fields;
}

void write_csv(const std::filesystem::path& path, const QuarterSeries& series) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << "timestamp,value\n";
  for (std::size_t i = 0; i < series.size(); ++i) {
    out << format_timestamp(series.timestamp(i)) << ',' << format_double(series[i]) << '\n';
  }
  if (!out) throw IoError("write failed for " + path.string());
}

namespace {

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  return lines;
}

[[noreturn]] void row_error(const std::filesystem::path& path, std::size_t line,
                            const std::string& what) {
  throw DataError(path.filename().string() + ":" + std::to_string(line) + ": " + what);
}

void check_header(const std::filesystem::path& path, const std::vector<std::string>& lines) {
  if (lines.empty() || lines[0] != "timestamp,value") {
    row_error(path, 1, "expected header 'timestamp,value'");
  }
}

}  // namespace

QuarterSeries read_csv(const std::filesystem::path& path, Unit unit) {
  auto lines = read_lines(path);
  check_header(path, lines);
  std::optional<Timestamp> start;
  std::optional<Timestamp> previous;
  std::vector<double> values;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    std::size_t lineno = i + 1;
    if (lines[i].empty() && i + 1 == lines.size()) break;
    auto fields = split_fields(lines[i]);
    if (fields.size() != 2) row_error(path, lineno, "expected 2 fields");
    Timestamp ts;
    try {
      ts = parse_timestamp(fields[0]);
    } catch (const DataError& e) {
      row_error(path, lineno, e.what());
    }
    auto value = parse_double(fields[1]);
    if (!value || !std::isfinite(*value)) row_error(path, lineno, "malformed value");
    if (!is_quarter_aligned(ts)) row_error(path, lineno, "timestamp not quarter-aligned");
    if (previous) {
      if (ts == *previous) row_error(path, lineno, "duplicate timestamp " + format_timestamp(ts));
      if (ts < *previous) row_error(path, lineno, "non-monotone timestamp " + format_timestamp(ts));
      if (ts != *previous + kStep) row_error(path, lineno, "gap before " + format_timestamp(ts));
    } else {
      start = ts;
    }
    previous = ts;
    values.push_back(*value);
  }
  if (values.empty()) throw DataError(path.filename().string() + ": empty input (header only)");
  return QuarterSeries(*start, std::move(values), unit);
}

std::vector<RawSample> read_raw_csv(const std::filesystem::path& path) {
  auto lines = read_lines(path);
  check_header(path, lines);
  std::vector<RawSample> samples;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    std::size_t lineno = i + 1;
    if (lines[i].empty() && i + 1 == lines.size()) break;
    auto fields = split_fields(lines[i]);
    if (fields.size() != 2) row_error(path, lineno, "expected 2 fields");
    RawSample sample;
    try {
      sample.timestamp = parse_timestamp(fields[0]);
    } catch (const DataError& e) {
      row_error(path, lineno, e.what());
    }
    std::string_view v = fields[1];
    if (!(v.empty() || v == "nan" || v == "NaN" || v == "null" || v == "NA")) {
      auto value = parse_double(v);
      if (!value) row_error(path, lineno, "malformed value");
      if (std::isfinite(*value)) sample.value = *value;
    }
    if (!samples.empty()) {
      if (sample.timestamp == samples.back().timestamp) {
        row_error(path, lineno, "duplicate timestamp " + format_timestamp(sample.timestamp));
      }
      if (sample.timestamp < samples.back().timestamp) {
        row_error(path, lineno, "non-monotone timestamp " + format_timestamp(sample.timestamp));
      }
    }
    samples.push_back(sample);
  }
  if (samples.empty()) throw DataError(path.filename().string() + ": empty input (header only)");
  return samples;
}

}  // namespace hems
