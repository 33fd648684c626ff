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

#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "gmv/error.h"

namespace gmv {
namespace {

std::filesystem::path TempDir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

ErrorCode CodeOf(std::string_view csv) {
  try {
    ParseRdCsv(csv);
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::kNumerical;
}

TEST(ParseRdCsv, PaperRows) {
  const auto points = ParseRdCsv(
      "codec,metric,bpp,value\n"
      "TCM,lpips_matched,0.137,0\n"
      "Ours,detection_matched,0.227,0\n");
  ASSERT_EQ(points.size(), 2u);
  EXPECT_EQ(points[0].codec_label, "TCM");
  EXPECT_EQ(points[0].metric, Metric::kLpipsMatched);
  EXPECT_DOUBLE_EQ(points[0].bpp, 0.137);
  EXPECT_EQ(points[1].codec_label, "Ours");
  EXPECT_EQ(points[1].metric, Metric::kDetectionMatched);
  EXPECT_DOUBLE_EQ(points[1].bpp, 0.227);
}

TEST(ParseRdCsv, EmptyFile) {
  EXPECT_TRUE(ParseRdCsv("").empty());
  const auto path = TempDir("gmv_rd_empty") / "empty.csv";
  std::ofstream(path).close();
  EXPECT_TRUE(ImportRdCsv(path).empty());
}

TEST(ParseRdCsv, Errors) {
  EXPECT_EQ(CodeOf("codec,metric,bpp,value\nA,psnrx,0.1,30\n"), ErrorCode::kFormatError);
  EXPECT_EQ(CodeOf("codec,metric,bpp\n"), ErrorCode::kFormatError);
  EXPECT_EQ(CodeOf("codec,metric,bpp,value\nA,psnr,abc,30\n"), ErrorCode::kFormatError);
  EXPECT_EQ(CodeOf("codec,metric,bpp,value\nA,psnr,-1,30\n"), ErrorCode::kFormatError);
  EXPECT_EQ(CodeOf("codec,metric,bpp,value\nA,psnr,0.1\n"), ErrorCode::kFormatError);
  try {
    ParseRdCsv("codec,metric,bpp,value\nA,psnr,0.1,30\nB,bogus,0.2,1\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
  EXPECT_THROW(ImportRdCsv("/nonexistent/rd.csv"), Error);
}

TEST(RdCsv, RoundTrip) {
  const std::vector<RatePoint> points = {{"machine", Metric::kPsnr, 0.1234567890123, 21.5},
                                         {"human_cc_total", Metric::kFid, 0.2, 1.0 / 3.0}};
  EXPECT_EQ(ParseRdCsv(FormatRdCsv(points)), points);
  const auto path = TempDir("gmv_rd_rt") / "rd.csv";
  WriteRdCsv(points, path);
  EXPECT_EQ(ImportRdCsv(path), points);
}

TEST(Metric, Names) {
  for (Metric m : kQualityMetrics) EXPECT_EQ(ParseMetric(MetricName(m)), m);
  EXPECT_TRUE(HigherIsBetter(Metric::kPsnr));
  EXPECT_TRUE(HigherIsBetter(Metric::kSsim));
  EXPECT_FALSE(HigherIsBetter(Metric::kLpips));
  EXPECT_FALSE(HigherIsBetter(Metric::kFid));
  EXPECT_FALSE(HigherIsBetter(Metric::kKid));
  EXPECT_FALSE(ParseMetric("mAP").has_value());
}

TEST(CompareBitrates, PaperTables) {
  const auto points = ParseRdCsv(
      "codec,metric,bpp,value\n"
      "TCM,lpips_matched,0.137,0\n"
      "Ours,lpips_matched,0.227,0\n"
      "TCM,fid_matched,0.710,0\n"
      "Ours,fid_matched,0.227,0\n"
      "TCM,detection_matched,0.356,0\n"
      "Ours,detection_matched,0.227,0\n");
  const auto deltas = CompareBitrates(points, "TCM");
  ASSERT_EQ(deltas.size(), 6u);
  std::map<Metric, double> ours;
  for (const auto& d : deltas) {
    if (d.codec_label == "TCM") {
      EXPECT_EQ(d.delta_percent, 0.0);
    } else {
      ours[d.metric] = d.delta_percent;
    }
  }
  EXPECT_NEAR(ours[Metric::kLpipsMatched], 65.69, 1e-9);
  EXPECT_NEAR(ours[Metric::kFidMatched], -68.03, 1e-9);
  EXPECT_NEAR(ours[Metric::kDetectionMatched], -36.23, 0.02);
  EXPECT_NE(FormatComparison(deltas).find("+65.69"), std::string::npos);
}

TEST(CompareBitrates, MissingReference) {
  const std::vector<RatePoint> points = {{"A", Metric::kPsnr, 0.1, 30},
                                         {"B", Metric::kSsim, 0.1, 0.9}};
  try {
    CompareBitrates(points, "A");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNotFound);
  }
}

TEST(PlotRd, SinglePointAndDeterminism) {
  const std::vector<RatePoint> one = {{"machine", Metric::kPsnr, 0.3, 22.0}};
  const std::string svg = RenderRdSvg(one, Metric::kPsnr);
  EXPECT_NE(svg.find("<svg"), std::string::npos);
  EXPECT_NE(svg.find("<circle"), std::string::npos);
  EXPECT_NE(svg.find("↑"), std::string::npos);
  EXPECT_EQ(svg, RenderRdSvg(one, Metric::kPsnr));

  const std::vector<RatePoint> fid = {{"a<b", Metric::kFid, 0.3, 22.0}};
  const std::string f = RenderRdSvg(fid, Metric::kFid);
  EXPECT_NE(f.find("↓"), std::string::npos);
  EXPECT_NE(f.find("a&lt;b"), std::string::npos);
}

TEST(PlotRd, Errors) {
  const std::vector<RatePoint> one = {{"machine", Metric::kPsnr, 0.3, 22.0}};
  EXPECT_THROW(RenderRdSvg(one, Metric::kSsim), Error);
  EXPECT_THROW(PlotRd(one, Metric::kPsnr, "/nonexistent/dir/x.svg"), Error);
}

TEST(PlotRdAll, FiveFiles) {
  std::vector<RatePoint> points;
  for (Metric m : kQualityMetrics) {
    points.push_back({"machine", m, 0.2, 1.0});
    points.push_back({"machine", m, 0.4, 2.0});
    points.push_back({"human_cc_total", m, 0.3, 1.5});
  }
  const auto dir = TempDir("gmv_plots");
  const auto files = PlotRdAll(points, dir, "rd");
  ASSERT_EQ(files.size(), 5u);
  for (const auto& f : files) EXPECT_TRUE(std::filesystem::exists(f)) << f;
  const auto again = PlotRdAll(points, dir, "rd2");
  for (size_t i = 0; i < 5; ++i) {
    std::ifstream a(files[i]), b(again[i]);
    std::stringstream sa, sb;
    sa << a.rdbuf();
    sb << b.rdbuf();
    EXPECT_EQ(sa.str(), sb.str());
  }
}

}  // namespace
}  // namespace gmv
