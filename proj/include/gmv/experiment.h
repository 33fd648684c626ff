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

#ifndef GMV_EXPERIMENT_H_
#define GMV_EXPERIMENT_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "gmv/checkpoint.h"
#include "gmv/config.h"
#include "gmv/image.h"
#include "gmv/rate_points.h"

namespace gmv {

// Samples one image per seed. With non-empty `conditions` (machine decodes
// at the model's image_size) the control branch is applied; otherwise the
// base samples unconditionally.
std::vector<RgbImage> SampleImages(SamplingModels& models,
                                   std::span<const RgbImage> conditions,
                                   std::span<const uint64_t> seeds,
                                   const SamplingConfig& sampling);

// The human decode path. Consumes exactly one serialized machine bitstream;
// the colour controller is applied when sampling.cc is set.
RgbImage DecodeHuman(std::span<const uint8_t> bitstream, SamplingModels& models,
                     const SamplingConfig& sampling);

// Seed for evaluation image `index`.
uint64_t ImageSeed(uint64_t global_seed, int index);

struct ImageScores {
  double psnr = 0.0;
  double ssim = 0.0;
  double lpips = 0.0;
};

struct ImageRecord {
  int index = 0;
  double machine_bpp = 0.0;
  double extension_bpp = 0.0;
  std::map<std::string, ImageScores> scores;  // keyed by series name
};

struct SeriesAggregate {
  double psnr = 0.0;
  double ssim = 0.0;
  double lpips = 0.0;
  double fid = 0.0;
  double kid = 0.0;
  double kid_std_err = 0.0;
};

// Series: "machine", "human_cc", "human_nocc" and, when enabled,
// "unconditional" and "mismatched" (conditions permuted across images).
struct EvalReport {
  std::vector<ImageRecord> images;
  std::map<std::string, SeriesAggregate> series;
  double machine_bpp = 0.0;
  double extension_bpp = 0.0;
  double total_bpp = 0.0;
  std::string embedder_id;
};

struct TrainingPaths {
  std::filesystem::path base;
  std::filesystem::path control;
};

using ProgressFn = std::function<void(const std::string& stage, int64_t step, double loss)>;

// Stage 1 trains the base on the training split; stage 2 trains the control
// branch on (original, machine decode) pairs.
TrainingPaths RunTraining(const ExperimentConfig& cfg,
                          const std::filesystem::path& out_dir,
                          const ProgressFn& progress = {});

EvalReport RunEval(const ExperimentConfig& cfg,
                   const std::filesystem::path& base_path,
                   const std::filesystem::path& control_path,
                   std::span<const RgbImage> eval_images);

// Throws kMismatch if the bitrate accounting invariants do not hold.
void CheckReport(const EvalReport& report);

std::vector<RatePoint> ReportRatePoints(const EvalReport& report,
                                        std::span<const std::string> metrics);

std::string ReportToJson(const EvalReport& report);

}  // namespace gmv

#endif  // GMV_EXPERIMENT_H_
