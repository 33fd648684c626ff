// Copyright 2026 The GMV Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "gmv/rate_points.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "gmv/error.h"

namespace gmv {
namespace {

struct MetricInfo {
  Metric metric;
  std::string_view name;
  bool higher_better;
  std::string_view axis_label;
};

constexpr MetricInfo kMetricTable[] = {
    {Metric::kPsnr, "psnr", true, "PSNR [dB]"},
    {Metric::kSsim, "ssim", true, "SSIM"},
    {Metric::kLpips, "lpips", false, "LPIPS"},
    {Metric::kFid, "fid", false, "FID"},
    {Metric::kKid, "kid", false, "KID"},
    {Metric::kLpipsMatched, "lpips_matched", false, "bpp at matched LPIPS"},
    {Metric::kFidMatched, "fid_matched", false, "bpp at matched FID"},
    {Metric::kDetectionMatched, "detection_matched", true,
     "bpp at matched detection accuracy"},
    {Metric::kSegmentationMatched, "segmentation_matched", true,
     "bpp at matched segmentation accuracy"},
};

const MetricInfo& Info(Metric m) {
  for (const MetricInfo& info : kMetricTable) {
    if (info.metric == m) return info;
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown metric enum");
}

std::string_view Trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string_view> SplitCommas(std::string_view line) {
  std::vector<std::string_view> out;
  size_t start = 0;
  while (true) {
    const size_t pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      out.push_back(Trim(line.substr(start)));
      return out;
    }
    out.push_back(Trim(line.substr(start, pos - start)));
    start = pos + 1;
  }
}

bool ParseDouble(std::string_view s, double& out) {
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end;
}

std::string XmlEscape(std::string_view text) {
  std::string out;
  for (char ch : text) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

std::string Fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

constexpr const char* kPalette[] = {"#1f77b4", "#2ca02c", "#ff7f0e", "#d62728",
                                    "#7f7f7f", "#9467bd", "#17becf", "#8c564b"};

}  // namespace

std::string_view MetricName(Metric m) { return Info(m).name; }

std::optional<Metric> ParseMetric(std::string_view name) {
  for (const MetricInfo& info : kMetricTable) {
    if (info.name == name) return info.metric;
  }
  return std::nullopt;
}

bool HigherIsBetter(Metric m) { return Info(m).higher_better; }

std::vector<RatePoint> ParseRdCsv(std::string_view text) {
  std::vector<RatePoint> points;
  bool seen_header = false;
  int line_no = 0;
  size_t start = 0;
  while (start < text.size()) {
    size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = Trim(text.substr(start, end - start));
    start = end + 1;
    ++line_no;
    if (line.empty()) continue;
    auto fail = [line_no](const std::string& what) {
      return Error(ErrorCode::kFormatError,
                   "line " + std::to_string(line_no) + ": " + what);
    };
    const std::vector<std::string_view> fields = SplitCommas(line);
    if (!seen_header) {
      if (fields.size() != 4 || fields[0] != "codec" || fields[1] != "metric" ||
          fields[2] != "bpp" || fields[3] != "value") {
        throw fail("expected header 'codec,metric,bpp,value'");
      }
      seen_header = true;
      continue;
    }
    if (fields.size() != 4) throw fail("expected 4 fields");
    if (fields[0].empty()) throw fail("empty codec label");
    const std::optional<Metric> metric = ParseMetric(fields[1]);
    if (!metric) throw fail("unknown metric '" + std::string(fields[1]) + "'");
    RatePoint p{std::string(fields[0]), *metric, 0.0, 0.0};
    if (!ParseDouble(fields[2], p.bpp) || !std::isfinite(p.bpp) || p.bpp < 0.0) {
      throw fail("bad bpp '" + std::string(fields[2]) + "'");
    }
    if (!ParseDouble(fields[3], p.value) || !std::isfinite(p.value)) {
      throw fail("bad value '" + std::string(fields[3]) + "'");
    }
    points.push_back(std::move(p));
  }
  return points;
}

std::vector<RatePoint> ImportRdCsv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kNotFound, "file not found: " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ParseRdCsv(ss.str());
}

std::string FormatRdCsv(std::span<const RatePoint> points) {
  std::string out = "codec,metric,bpp,value\n";
  for (const RatePoint& p : points) {
    out += p.codec_label + "," + std::string(MetricName(p.metric)) + "," +
           Fmt("%.17g", p.bpp) + "," + Fmt("%.17g", p.value) + "\n";
  }
  return out;
}

void WriteRdCsv(std::span<const RatePoint> points,
                const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  out << FormatRdCsv(points);
}

std::vector<BitrateDelta> CompareBitrates(std::span<const RatePoint> points,
                                          std::string_view reference_label) {
  std::map<Metric, double> reference;
  for (const RatePoint& p : points) {
    if (p.codec_label == reference_label && !reference.contains(p.metric)) {
      reference[p.metric] = p.bpp;
    }
  }
  std::vector<BitrateDelta> deltas;
  for (const RatePoint& p : points) {
    auto it = reference.find(p.metric);
    if (it == reference.end()) {
      throw Error(ErrorCode::kNotFound,
                  "missing reference '" + std::string(reference_label) +
                      "' for metric " + std::string(MetricName(p.metric)));
    }
    if (it->second <= 0.0) {
      throw Error(ErrorCode::kInvalidArgument, "reference bpp must be positive");
    }
    const double raw = (p.bpp / it->second - 1.0) * 100.0;
    deltas.push_back({p.metric, p.codec_label, p.bpp, it->second,
                      std::round(raw * 100.0) / 100.0});
  }
  return deltas;
}

std::string FormatComparison(std::span<const BitrateDelta> deltas) {
  std::string out = "metric,codec,bpp,reference_bpp,delta_percent\n";
  for (const BitrateDelta& d : deltas) {
    out += std::string(MetricName(d.metric)) + "," + d.codec_label + "," +
           Fmt("%.6g", d.bpp) + "," + Fmt("%.6g", d.reference_bpp) + "," +
           Fmt("%+.2f", d.delta_percent) + "\n";
  }
  return out;
}

std::string RenderRdSvg(std::span<const RatePoint> points, Metric metric) {
  std::map<std::string, std::vector<RatePoint>> series;
  std::vector<std::string> order;
  for (const RatePoint& p : points) {
    if (p.metric != metric) continue;
    if (!series.contains(p.codec_label)) order.push_back(p.codec_label);
    series[p.codec_label].push_back(p);
  }
  if (series.empty()) {
    throw Error(ErrorCode::kInvalidArgument,
                "no points for metric " + std::string(MetricName(metric)));
  }
  double x_lo = 0.0, x_hi = 0.0, y_lo = 0.0, y_hi = 0.0;
  bool first = true;
  for (const auto& [label, pts] : series) {
    for (const RatePoint& p : pts) {
      if (first) {
        x_hi = p.bpp;
        y_lo = y_hi = p.value;
        first = false;
      }
      x_hi = std::max(x_hi, p.bpp);
      y_lo = std::min(y_lo, p.value);
      y_hi = std::max(y_hi, p.value);
    }
  }
  if (x_hi <= x_lo) x_hi = x_lo + 1.0;
  if (y_hi - y_lo < 1e-12) {
    y_lo -= 0.5 * std::max(1.0, std::abs(y_lo));
    y_hi += 0.5 * std::max(1.0, std::abs(y_hi));
  }
  const double pad_y = 0.05 * (y_hi - y_lo);
  y_lo -= pad_y;
  y_hi += pad_y;
  x_hi += 0.05 * (x_hi - x_lo);

  constexpr double kW = 640, kH = 480, kL = 70, kR = 170, kT = 40, kB = 60;
  auto sx = [&](double v) { return kL + (v - x_lo) / (x_hi - x_lo) * (kW - kL - kR); };
  auto sy = [&](double v) { return kH - kB - (v - y_lo) / (y_hi - y_lo) * (kH - kT - kB); };

  const MetricInfo& info = Info(metric);
  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"480\" "
         "font-family=\"sans-serif\" font-size=\"12\">\n";
  svg += "<rect width=\"640\" height=\"480\" fill=\"white\"/>\n";
  svg += "<line x1=\"" + Fmt("%.2f", kL) + "\" y1=\"" + Fmt("%.2f", kH - kB) +
         "\" x2=\"" + Fmt("%.2f", kW - kR) + "\" y2=\"" + Fmt("%.2f", kH - kB) +
         "\" stroke=\"black\"/>\n";
  svg += "<line x1=\"" + Fmt("%.2f", kL) + "\" y1=\"" + Fmt("%.2f", kT) +
         "\" x2=\"" + Fmt("%.2f", kL) + "\" y2=\"" + Fmt("%.2f", kH - kB) +
         "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double xv = x_lo + (x_hi - x_lo) * i / 4.0;
    const double yv = y_lo + (y_hi - y_lo) * i / 4.0;
    svg += "<text x=\"" + Fmt("%.2f", sx(xv)) + "\" y=\"" + Fmt("%.2f", kH - kB + 18) +
           "\" text-anchor=\"middle\">" + Fmt("%.3g", xv) + "</text>\n";
    svg += "<text x=\"" + Fmt("%.2f", kL - 6) + "\" y=\"" + Fmt("%.2f", sy(yv) + 4) +
           "\" text-anchor=\"end\">" + Fmt("%.4g", yv) + "</text>\n";
  }
  svg += "<text x=\"" + Fmt("%.2f", (kL + kW - kR) / 2) + "\" y=\"" +
         Fmt("%.2f", kH - 15) + "\" text-anchor=\"middle\">bpp</text>\n";
  svg += "<text x=\"15\" y=\"" + Fmt("%.2f", (kT + kH - kB) / 2) +
         "\" text-anchor=\"middle\" transform=\"rotate(-90 15 " +
         Fmt("%.2f", (kT + kH - kB) / 2) + ")\">" + std::string(info.axis_label) +
         (info.higher_better ? " (\xE2\x86\x91)" : " (\xE2\x86\x93)") + "</text>\n";

  for (size_t s = 0; s < order.size(); ++s) {
    std::vector<RatePoint> pts = series[order[s]];
    std::stable_sort(pts.begin(), pts.end(),
                     [](const RatePoint& a, const RatePoint& b) { return a.bpp < b.bpp; });
    const char* color = kPalette[s % std::size(kPalette)];
    if (pts.size() > 1) {
      svg += "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" points=\"";
      for (size_t i = 0; i < pts.size(); ++i) {
        if (i) svg += " ";
        svg += Fmt("%.2f", sx(pts[i].bpp)) + "," + Fmt("%.2f", sy(pts[i].value));
      }
      svg += "\"/>\n";
    }
    for (const RatePoint& p : pts) {
      svg += "<circle cx=\"" + Fmt("%.2f", sx(p.bpp)) + "\" cy=\"" +
             Fmt("%.2f", sy(p.value)) + "\" r=\"4\" fill=\"" + color + "\"/>\n";
    }
    const double ly = kT + 18.0 * s;
    svg += "<circle cx=\"" + Fmt("%.2f", kW - kR + 15) + "\" cy=\"" + Fmt("%.2f", ly) +
           "\" r=\"4\" fill=\"" + color + "\"/>\n";
    svg += "<text x=\"" + Fmt("%.2f", kW - kR + 25) + "\" y=\"" + Fmt("%.2f", ly + 4) +
           "\">" + XmlEscape(order[s]) + "</text>\n";
  }
  svg += "</svg>\n";
  return svg;
}

void PlotRd(std::span<const RatePoint> points, Metric metric,
            const std::filesystem::path& out_path) {
  const std::string svg = RenderRdSvg(points, metric);
  std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + out_path.string());
  out << svg;
  if (!out) throw Error(ErrorCode::kIoError, "write failed: " + out_path.string());
}

std::vector<std::filesystem::path> PlotRdAll(std::span<const RatePoint> points,
                                             const std::filesystem::path& out_dir,
                                             std::string_view stem) {
  std::vector<std::filesystem::path> written;
  for (Metric m : kQualityMetrics) {
    const std::filesystem::path path =
        out_dir / (std::string(stem) + "_" + std::string(MetricName(m)) + ".svg");
    PlotRd(points, m, path);
    written.push_back(path);
  }
  return written;
}

}  // namespace gmv
