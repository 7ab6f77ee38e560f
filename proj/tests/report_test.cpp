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

#include "hems/report.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <regex>

#include "hems/errors.hpp"

namespace hems {
namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  return std::string((std::istreambuf_iterator<char>(in)), {});
}

std::size_t count(const std::string& text, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++n;
  return n;
}

CohortCell cell(const std::string& id, ModelKind kind, int days, double mae, double cost) {
  return CohortCell{id, kind, days, mae, cost, 2.0, 0.5, savings_pct(2.0, cost), std::nullopt};
}

TEST(Report, XmlEscape) {
  EXPECT_EQ(xml_escape("a<b & \"c\">'"), "a&lt;b &amp; &quot;c&quot;&gt;'");  // attributes are double-quoted
}

TEST(Report, ChartStructure) {
  std::vector<ChartSeries> s{{"local", {14, 21, 28}, {0.5, 0.45, 0.4}, {0.05, 0.0, 0.02}},
                             {"finetuned <ft>", {14, 21, 28}, {0.4, 0.38, 0.37}, {0, 0, 0}}};
  auto svg = render_line_chart("MAE", "training days", "kW", s);
  EXPECT_EQ(svg.rfind("<?xml", 0), 0u);
  EXPECT_NE(svg.find("<svg"), std::string::npos);
  EXPECT_NE(svg.find("</svg>"), std::string::npos);
  EXPECT_EQ(count(svg, "<polyline"), 2u);
  EXPECT_EQ(count(svg, "class=\"errorbar\""), 6u);
  EXPECT_NE(svg.find("finetuned &lt;ft&gt;"), std::string::npos);
  EXPECT_EQ(svg.find("nan"), std::string::npos);
}

TEST(Report, ZeroErrorBarsHaveZeroLength) {
  std::vector<ChartSeries> s{{"only", {1, 2}, {3.0, 3.0}, {0.0, 0.0}}};
  auto svg = render_line_chart("flat", "x", "y", s);
  std::regex bar(R"re(<line class="errorbar" x1="([^"]+)" y1="([^"]+)" x2="([^"]+)" y2="([^"]+)")re");
  int bars = 0;
  for (std::sregex_iterator it(svg.begin(), svg.end(), bar), end; it != end; ++it) {
    EXPECT_EQ((*it)[2], (*it)[4]);
    ++bars;
  }
  EXPECT_EQ(bars, 2);
}

TEST(Report, WritesAllArtifacts) {
  auto dir = std::filesystem::temp_directory_path() / "hems_report_test";
  std::filesystem::remove_all(dir);
  std::vector<CohortCell> cells{cell("h2", ModelKind::kLocal, 14, 0.5, 1.2),
                                cell("h1", ModelKind::kLocal, 14, 0.7, 1.4),
                                cell("h1", ModelKind::kFinetuned, 14, 0.4, 1.1),
                                cell("h1", ModelKind::kPersistence, 14, 0.6, 1.3)};
  write_report(dir, cells);
  for (auto name : {"cohort_report.csv", "cohort_summary.csv", "mae_vs_training_days.svg",
                    "cost_vs_training_days.svg"}) {
    EXPECT_TRUE(std::filesystem::exists(dir / name)) << name;
  }
  auto report = slurp(dir / "cohort_report.csv");
  EXPECT_EQ(report.rfind(std::string(kCohortCsvHeader) + "\nh1,", 0), 0u);
  auto summary = slurp(dir / "cohort_summary.csv");
  EXPECT_EQ(summary.substr(0, summary.find('\n')),
            "model_kind,training_days,count,mae_mean,mae_std,cost_mean,cost_std,savings_mean,"
            "savings_std");
  EXPECT_NE(summary.find("local,14,2,0.6,"), std::string::npos);
  std::filesystem::remove_all(dir);
}

TEST(Report, Errors) {
  auto dir = std::filesystem::temp_directory_path() / "hems_report_empty";
  EXPECT_THROW(write_report(dir, {}), DataError);
  std::vector<CohortCell> dup{cell("h", ModelKind::kLocal, 14, 0.5, 1.0),
                              cell("h", ModelKind::kLocal, 14, 0.6, 1.0)};
  EXPECT_THROW(write_report(dir, dup), DataError);
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace hems
