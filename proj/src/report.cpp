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

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <tuple>

#include "hems/csv.hpp"
#include "hems/errors.hpp"

namespace hems {

namespace {

constexpr double kWidth = 640, kHeight = 420;
constexpr double kLeft = 80, kRight = 150, kTop = 40, kBottom = 60;
constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};

std::string num(double v) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(2) << v;
  return s.str();
}

std::string tick_label(double v) {
  std::ostringstream s;
  s << std::setprecision(4) << v;
  return s.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace

std::string xml_escape(const std::string& text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string render_line_chart(const std::string& title, const std::string& x_label,
                              const std::string& y_label, std::span<const ChartSeries> series) {
  double x_lo = kInfinity, x_hi = -kInfinity, y_lo = kInfinity, y_hi = -kInfinity;
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.mean[i])) continue;
      const double e = std::isfinite(s.error[i]) ? s.error[i] : 0.0;
      x_lo = std::min(x_lo, s.x[i]);
      x_hi = std::max(x_hi, s.x[i]);
      y_lo = std::min(y_lo, s.mean[i] - e);
      y_hi = std::max(y_hi, s.mean[i] + e);
    }
  }
  if (!std::isfinite(x_lo)) x_lo = 0, x_hi = 1, y_lo = 0, y_hi = 1;
  if (x_hi - x_lo < 1e-12) x_lo -= 1, x_hi += 1;
  if (y_hi - y_lo < 1e-12) y_lo -= 0.5, y_hi += 0.5;
  const double pad = 0.05 * (y_hi - y_lo);
  y_lo -= pad;
  y_hi += pad;
  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + (x - x_lo) / (x_hi - x_lo) * pw; };
  auto py = [&](double y) { return kTop + (y_hi - y) / (y_hi - y_lo) * ph; };

  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
      << kHeight << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << num(kWidth / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
      << xml_escape(title) << "</text>\n";
  // axes
  svg << "<g stroke=\"black\">\n"
      << "<line x1=\"" << num(kLeft) << "\" y1=\"" << num(kTop + ph) << "\" x2=\"" << num(kLeft + pw)
      << "\" y2=\"" << num(kTop + ph) << "\"/>\n"
      << "<line x1=\"" << num(kLeft) << "\" y1=\"" << num(kTop) << "\" x2=\"" << num(kLeft)
      << "\" y2=\"" << num(kTop + ph) << "\"/>\n</g>\n";
  for (int k = 0; k <= 5; ++k) {
    const double xv = x_lo + (x_hi - x_lo) * k / 5.0;
    const double yv = y_lo + (y_hi - y_lo) * k / 5.0;
    svg << "<line x1=\"" << num(px(xv)) << "\" y1=\"" << num(kTop + ph) << "\" x2=\""
        << num(px(xv)) << "\" y2=\"" << num(kTop + ph + 5) << "\" stroke=\"black\"/>\n"
        << "<text x=\"" << num(px(xv)) << "\" y=\"" << num(kTop + ph + 18)
        << "\" text-anchor=\"middle\">" << tick_label(xv) << "</text>\n"
        << "<line x1=\"" << num(kLeft - 5) << "\" y1=\"" << num(py(yv)) << "\" x2=\""
        << num(kLeft) << "\" y2=\"" << num(py(yv)) << "\" stroke=\"black\"/>\n"
        << "<text x=\"" << num(kLeft - 8) << "\" y=\"" << num(py(yv) + 4)
        << "\" text-anchor=\"end\">" << tick_label(yv) << "</text>\n";
  }
  svg << "<text x=\"" << num(kLeft + pw / 2) << "\" y=\"" << num(kHeight - 15)
      << "\" text-anchor=\"middle\">" << xml_escape(x_label) << "</text>\n"
      << "<text transform=\"translate(18," << num(kTop + ph / 2)
      << ") rotate(-90)\" text-anchor=\"middle\">" << xml_escape(y_label) << "</text>\n";

  for (std::size_t si = 0; si < series.size(); ++si) {
    const auto& s = series[si];
    const char* color = kPalette[si % std::size(kPalette)];
    svg << "<g stroke=\"" << color << "\" fill=\"" << color << "\">\n<polyline fill=\"none\" points=\"";
    bool first = true;
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.mean[i])) continue;
      svg << (first ? "" : " ") << num(px(s.x[i])) << ',' << num(py(s.mean[i]));
      first = false;
    }
    svg << "\"/>\n";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.mean[i])) continue;
      const double e = std::isfinite(s.error[i]) ? s.error[i] : 0.0;
      const double x = px(s.x[i]);
      svg << "<line class=\"errorbar\" x1=\"" << num(x) << "\" y1=\"" << num(py(s.mean[i] - e))
          << "\" x2=\"" << num(x) << "\" y2=\"" << num(py(s.mean[i] + e)) << "\"/>\n"
          << "<circle cx=\"" << num(x) << "\" cy=\"" << num(py(s.mean[i])) << "\" r=\"3\"/>\n";
    }
    const double ly = kTop + 10 + 18.0 * si;
    svg << "<line x1=\"" << num(kWidth - kRight + 15) << "\" y1=\"" << num(ly) << "\" x2=\""
        << num(kWidth - kRight + 35) << "\" y2=\"" << num(ly) << "\"/>\n"
        << "<text stroke=\"none\" fill=\"black\" x=\"" << num(kWidth - kRight + 40) << "\" y=\""
        << num(ly + 4) << "\">" << xml_escape(s.label) << "</text>\n</g>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

void write_summary_csv(const std::filesystem::path& path,
                       std::span<const CohortAggregate> aggregates) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << "model_kind,training_days,count,mae_mean,mae_std,cost_mean,cost_std,savings_mean,"
         "savings_std\n";
  for (const auto& a : aggregates) {
    out << model_kind_name(a.kind) << ',' << a.training_days << ',' << a.count << ','
        << format_double(a.mae_mean) << ',' << format_double(a.mae_std) << ','
        << format_double(a.cost_mean) << ',' << format_double(a.cost_std) << ','
        << format_double(a.savings_mean) << ',' << format_double(a.savings_std) << '\n';
  }
  if (!out) throw IoError("write failed for " + path.string());
}

void write_report(const std::filesystem::path& out_dir, std::vector<CohortCell> cells) {
  if (cells.empty()) throw DataError("nothing to report");
  std::sort(cells.begin(), cells.end(), [](const CohortCell& a, const CohortCell& b) {
    return std::tie(a.household, a.kind, a.training_days) <
           std::tie(b.household, b.kind, b.training_days);
  });
  for (std::size_t i = 1; i < cells.size(); ++i) {
    const auto& a = cells[i - 1];
    const auto& b = cells[i];
    if (a.household == b.household && a.kind == b.kind && a.training_days == b.training_days) {
      throw DataError("duplicate cell " + b.household + "/" + model_kind_name(b.kind) + "/" +
                      std::to_string(b.training_days));
    }
  }
  std::filesystem::create_directories(out_dir);
  write_cohort_csv(out_dir / "cohort_report.csv", cells);
  const auto aggregates = aggregate_cells(cells);
  write_summary_csv(out_dir / "cohort_summary.csv", aggregates);

  auto chart = [&](bool cost) {
    std::vector<ChartSeries> series;
    for (const auto& a : aggregates) {
      const std::string label = model_kind_name(a.kind);
      if (series.empty() || series.back().label != label) series.push_back({label, {}, {}, {}});
      auto& s = series.back();
      s.x.push_back(a.training_days);
      const bool empty = a.count == 0;
      s.mean.push_back(empty ? std::nan("") : cost ? a.cost_mean : a.mae_mean);
      s.error.push_back(empty ? 0.0 : cost ? a.cost_std : a.mae_std);
    }
    return series;
  };
  const auto mae_series = chart(false);
  const auto cost_series = chart(true);
  write_text(out_dir / "mae_vs_training_days.svg",
             render_line_chart("Day-ahead MAE on the test weeks", "training days",
                               "MAE (kW)", mae_series));
  write_text(out_dir / "cost_vs_training_days.svg",
             render_line_chart("Realised MPC energy cost", "training days", "cost (EUR)",
                               cost_series));
}

}  // namespace hems
