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

#include <algorithm>
#include <cmath>

#include <gtest/gtest.h>

#include "gmv/color_controller.h"
#include "gmv/dataset.h"
#include "gmv/diffusion.h"
#include "gmv/error.h"
#include "gmv/experiment.h"
#include "gmv/icm_codec.h"
#include "gmv/schedule.h"
#include "gmv/trainer.h"
#include "test_util.h"

namespace gmv {
namespace {

class ExperimentTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new std::filesystem::path(testing::TempDir("gmv_experiment"));
    cfg_ = new ExperimentConfig(testing::TinyConfig(16));
    images_ = new std::vector<RgbImage>();
    for (int i = 0; i < 8; ++i) images_->push_back(GenerateProceduralImage({16, 2, 5}, 500 + i));
    TrainOptions base;
    base.out = *dir_ / "base.gmvc";
    TrainBase(*cfg_, *images_, base);
    const auto conditions = MachineDecodes(*images_, cfg_->codec);
    TrainOptions control;
    control.out = *dir_ / "control.gmvc";
    TrainControl(*cfg_, base.out, *images_, conditions, control);
    TrainOptions zero;
    zero.steps = 0;
    zero.out = *dir_ / "control0.gmvc";
    TrainControl(*cfg_, base.out, *images_, conditions, zero);
  }
  static void TearDownTestSuite() {
    delete dir_;
    delete cfg_;
    delete images_;
  }

  std::span<const RgbImage> EvalImages() const { return {images_->data(), 4}; }

  static std::filesystem::path* dir_;
  static ExperimentConfig* cfg_;
  static std::vector<RgbImage>* images_;
};

std::filesystem::path* ExperimentTest::dir_ = nullptr;
ExperimentConfig* ExperimentTest::cfg_ = nullptr;
std::vector<RgbImage>* ExperimentTest::images_ = nullptr;

TEST_F(ExperimentTest, ExtensionRateIsZero) {
  const EvalReport r = RunEval(*cfg_, *dir_ / "base.gmvc", *dir_ / "control.gmvc", EvalImages());
  ASSERT_EQ(r.images.size(), 4u);
  EXPECT_EQ(r.extension_bpp, 0.0);
  EXPECT_EQ(r.total_bpp, r.machine_bpp);
  double mean = 0.0;
  for (const ImageRecord& rec : r.images) {
    EXPECT_EQ(rec.extension_bpp, 0.0);
    const auto bytes = EncodeMachine((*images_)[rec.index], cfg_->codec).Serialize();
    EXPECT_DOUBLE_EQ(rec.machine_bpp, RateBpp(bytes.size(), 16, 16));
    mean += rec.machine_bpp / 4;
  }
  EXPECT_DOUBLE_EQ(r.machine_bpp, mean);
  for (const char* s : {"machine", "human_cc", "human_nocc", "unconditional", "mismatched"}) {
    EXPECT_TRUE(r.series.contains(s)) << s;
  }
  EXPECT_NO_THROW(CheckReport(r));
}

TEST_F(ExperimentTest, TamperedReportRejected) {
  EvalReport r = RunEval(*cfg_, *dir_ / "base.gmvc", *dir_ / "control.gmvc", EvalImages());
  EvalReport a = r;
  a.images[1].extension_bpp = 0.01;
  EXPECT_THROW(CheckReport(a), Error);
  EvalReport b = r;
  b.total_bpp += 0.5;
  EXPECT_THROW(CheckReport(b), Error);
  EvalReport c = r;
  c.extension_bpp = 0.1;
  c.total_bpp = c.machine_bpp + 0.1;
  EXPECT_THROW(CheckReport(c), Error);
}

TEST_F(ExperimentTest, Deterministic) {
  const EvalReport a = RunEval(*cfg_, *dir_ / "base.gmvc", *dir_ / "control.gmvc", EvalImages());
  const EvalReport b = RunEval(*cfg_, *dir_ / "base.gmvc", *dir_ / "control.gmvc", EvalImages());
  EXPECT_EQ(ReportToJson(a), ReportToJson(b));
}

TEST_F(ExperimentTest, RatePointLabels) {
  const EvalReport r = RunEval(*cfg_, *dir_ / "base.gmvc", *dir_ / "control.gmvc", EvalImages());
  const std::vector<std::string> metrics = {"psnr", "fid"};
  const std::vector<RatePoint> points = ReportRatePoints(r, metrics);
  EXPECT_EQ(points.size(), 12u);
  for (const RatePoint& p : points) {
    if (p.codec_label == "machine" || p.codec_label.ends_with("_total")) {
      EXPECT_DOUBLE_EQ(p.bpp, r.total_bpp) << p.codec_label;
    } else {
      EXPECT_EQ(p.bpp, 0.0) << p.codec_label;
    }
    if (p.codec_label == "human_cc_total" && p.metric == Metric::kPsnr) {
      EXPECT_DOUBLE_EQ(p.value, r.series.at("human_cc").psnr);
    }
  }
  // Points survive a CSV round trip.
  EXPECT_EQ(ParseRdCsv(FormatRdCsv(points)), points);
}

TEST_F(ExperimentTest, ZeroStepControlMatchesUnconditional) {
  const EvalReport r = RunEval(*cfg_, *dir_ / "base.gmvc", *dir_ / "control0.gmvc", EvalImages());
  for (const ImageRecord& rec : r.images) {
    EXPECT_NEAR(rec.scores.at("human_nocc").psnr, rec.scores.at("unconditional").psnr, 1e-3);
  }
  SamplingModels models = LoadSamplingModels(*dir_ / "base.gmvc", *dir_ / "control0.gmvc");
  const std::vector<RgbImage> cond = MachineDecodes(EvalImages(), cfg_->codec);
  const std::vector<uint64_t> seeds = {3, 4, 5, 6};
  const auto with = SampleImages(models, cond, seeds, cfg_->sampling);
  const auto without = SampleImages(models, {}, seeds, cfg_->sampling);
  for (size_t i = 0; i < with.size(); ++i) {
    EXPECT_LE(MaxAbsDiff(with[i], without[i]), 1e-5);
  }
}

TEST_F(ExperimentTest, SampledPixelsMatchSampler) {
  SamplingModels models = LoadSamplingModels(*dir_ / "base.gmvc", *dir_ / "control.gmvc");
  const std::vector<uint64_t> seeds = {21, 22};
  const std::vector<RgbImage> imgs = SampleImages(models, {}, seeds, cfg_->sampling);
  const NoiseSchedule s = MakeSchedule(cfg_->training.timesteps, cfg_->training.beta_start,
                                       cfg_->training.beta_end);
  const torch::Tensor x = SampleDdim(MakePredictor(models.base), s, seeds, 16,
                                     cfg_->sampling.steps, cfg_->sampling.clip_denoised);
  for (int n = 0; n < 2; ++n) {
    for (int c = 0; c < 3; ++c) {
      EXPECT_EQ(imgs[n].at(3, 5, c), x[n][c][3][5].item<float>());
    }
  }
}

TEST_F(ExperimentTest, DecodeHumanConsumesOneBitstream) {
  SamplingModels models = LoadSamplingModels(*dir_ / "base.gmvc", *dir_ / "control.gmvc");
  const RgbImage& img = (*images_)[0];
  const auto bytes = EncodeMachine(img, cfg_->codec).Serialize();
  const RgbImage machine = DecodeMachine(MachineBitstream::Parse(bytes));

  SamplingConfig s = cfg_->sampling;
  s.cc = false;
  const RgbImage nocc = DecodeHuman(bytes, models, s);
  ASSERT_EQ(nocc.height(), img.height());
  ASSERT_EQ(nocc.width(), img.width());
  const uint64_t seed = s.seed;
  const RgbImage direct = SampleImages(models, {&machine, 1}, {&seed, 1}, s)[0];
  EXPECT_EQ(MaxAbsDiff(nocc, direct), 0.0);

  s.cc = true;
  const RgbImage cc = DecodeHuman(bytes, models, s);
  EXPECT_EQ(MaxAbsDiff(cc, ApplyColorController(nocc, machine)), 0.0);
  EXPECT_EQ(MaxAbsDiff(cc, DecodeHuman(bytes, models, s)), 0.0);

  std::vector<uint8_t> truncated(bytes.begin(), bytes.end() - 3);
  EXPECT_THROW(DecodeHuman(truncated, models, s), Error);
  std::vector<uint8_t> bad = bytes;
  bad[0] = 'X';
  EXPECT_THROW(DecodeHuman(bad, models, s), Error);
}

TEST_F(ExperimentTest, EvalErrors) {
  EXPECT_THROW(RunEval(*cfg_, *dir_ / "base.gmvc", *dir_ / "control.gmvc", {}), Error);
  EXPECT_THROW(RunEval(*cfg_, *dir_ / "base.gmvc", {}, EvalImages()), Error);
  ExperimentConfig other = *cfg_;
  other.arch.base_channels = 16;
  try {
    RunEval(other, *dir_ / "base.gmvc", *dir_ / "control.gmvc", EvalImages());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMismatch);
  }
}

TEST(ImageSeed, DistinctPerIndex) {
  EXPECT_NE(ImageSeed(11, 0), ImageSeed(11, 1));
  EXPECT_NE(ImageSeed(11, 0), ImageSeed(12, 0));
  EXPECT_EQ(ImageSeed(11, 5), ImageSeed(11, 5));
}

}  // namespace
}  // namespace gmv
