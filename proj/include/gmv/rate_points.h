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

// Rate/quality points: CSV interchange, percentage bitrate comparisons and
// SVG rate-quality plots.

#ifndef GMV_RATE_POINTS_H_
#define GMV_RATE_POINTS_H_

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace gmv {

// The five quality metrics plus the "bitrate at matched quality" labels used
// for tabulated comparisons.
enum class Metric {
  kPsnr,
  kSsim,
  kLpips,
  kFid,
  kKid,
  kLpipsMatched,
  kFidMatched,
  kDetectionMatched,
  kSegmentationMatched,
};

inline constexpr Metric kQualityMetrics[] = {Metric::kPsnr, Metric::kSsim,
                                             Metric::kLpips, Metric::kFid,
                                             Metric::kKid};

std::string_view MetricName(Metric m);
std::optional<Metric> ParseMetric(std::string_view name);
// True when larger values are better.
bool HigherIsBetter(Metric m);

struct RatePoint {
  std::string codec_label;
  Metric metric = Metric::kPsnr;
  double bpp = 0.0;
  double value = 0.0;

  friend bool operator==(const RatePoint&, const RatePoint&) = default;
};

// Parses `codec,metric,bpp,value` CSV. An empty file yields no points.
// Throws kFormatError naming the offending line.
std::vector<RatePoint> ImportRdCsv(const std::filesystem::path& path);
std::vector<RatePoint> ParseRdCsv(std::string_view text);
std::string FormatRdCsv(std::span<const RatePoint> points);
void WriteRdCsv(std::span<const RatePoint> points,
                const std::filesystem::path& path);

struct BitrateDelta {
  Metric metric;
  std::string codec_label;
  double bpp;
  double reference_bpp;
  double delta_percent;  // rounded to 2 decimals
};

// delta = (bpp / bpp_reference - 1) * 100 per metric group. Throws kNotFound
// if a metric group has no point labelled `reference_label`.
std::vector<BitrateDelta> CompareBitrates(std::span<const RatePoint> points,
                                          std::string_view reference_label);
std::string FormatComparison(std::span<const BitrateDelta> deltas);

// SVG plot: bpp on x, metric on y, one series per codec label.
std::string RenderRdSvg(std::span<const RatePoint> points, Metric metric);
void PlotRd(std::span<const RatePoint> points, Metric metric,
            const std::filesystem::path& out_path);
// One file per quality metric, named <stem>_<metric>.svg.
std::vector<std::filesystem::path> PlotRdAll(std::span<const RatePoint> points,
                                             const std::filesystem::path& out_dir,
                                             std::string_view stem);

}  // namespace gmv

#endif  // GMV_RATE_POINTS_H_
