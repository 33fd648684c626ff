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

#ifndef GMV_CONFIG_H_
#define GMV_CONFIG_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "gmv/icm_codec.h"

namespace gmv {

struct DatasetConfig {
  std::string source_dir;  // empty: procedural images
  uint64_t seed = 1;
  uint64_t split_seed = 2;
  int train_count = 2000;
  int eval_count = 200;
  int min_shapes = 2;
  int max_shapes = 5;
};

// Noise-prediction U-Net descriptor.
struct ArchitectureConfig {
  int image_size = 64;
  int base_channels = 64;
  std::vector<int> channel_mults = {1, 2, 2};
  int num_res_blocks = 2;
  std::vector<int> attention_resolutions = {16};
  int time_embed_dim = 128;
  int groups = 8;

  void Validate() const;
  friend bool operator==(const ArchitectureConfig&,
                         const ArchitectureConfig&) = default;
};

struct TrainingConfig {
  int timesteps = 1000;
  double beta_start = 1e-4;
  double beta_end = 0.02;
  double learning_rate = 1e-4;
  double control_learning_rate = 1e-4;
  int batch_size = 64;
  int base_steps = 30000;
  int control_steps = 15000;
  double grad_clip = 1.0;
  double ema_decay = 0.999;
  uint64_t seed = 7;
  int log_every = 500;
};

struct SamplingConfig {
  std::string sampler = "ddim";  // "ddim" or "ddpm"
  int steps = 50;
  uint64_t seed = 11;
  bool cc = true;
  bool clip_denoised = true;
};

struct EvalConfig {
  std::vector<std::string> metrics = {"psnr", "ssim", "lpips", "fid", "kid"};
  std::string embedder = "random_conv";
  uint64_t embedder_seed = 20240917;
  int kid_block_size = 100;
  bool include_unconditional = true;
  int batch_size = 25;
};

struct ExperimentConfig {
  DatasetConfig dataset;
  CodecConfig codec;
  ArchitectureConfig arch;
  TrainingConfig training;
  SamplingConfig sampling;
  EvalConfig eval;

  void Validate() const;
};

// JSON document with sections dataset/codec/diffusion/sampling/eval. Keys
// absent from the document keep their defaults; unknown keys are errors.
ExperimentConfig ParseConfig(const std::string& json_text);
ExperimentConfig LoadConfig(const std::filesystem::path& path);
std::string ConfigToJson(const ExperimentConfig& cfg);

}  // namespace gmv

#endif  // GMV_CONFIG_H_
