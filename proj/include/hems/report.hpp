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
#include <span>
#include <string>
#include <vector>

#include "hems/cohort.hpp"

namespace hems {

struct ChartSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> mean;
  std::vector<double> error;  // half-length of the error bar
};

// Standalone SVG document: axes with ticks, one polyline per series,
// markers and vertical error bars (class "errorbar").
std::string render_line_chart(const std::string& title, const std::string& x_label,
                              const std::string& y_label, std::span<const ChartSeries> series);

std::string xml_escape(const std::string& text);

// `model_kind,training_days,count,mae_mean,mae_std,cost_mean,cost_std,savings_mean,savings_std`
void write_summary_csv(const std::filesystem::path& path,
                       std::span<const CohortAggregate> aggregates);

// Writes cohort_report.csv (cells sorted by household, kind, size),
// cohort_summary.csv, mae_vs_training_days.svg and cost_vs_training_days.svg
// into `out_dir`. Throws DataError("nothing to report") when `cells` is empty.
void write_report(const std::filesystem::path& out_dir, std::vector<CohortCell> cells);

}  // namespace hems
