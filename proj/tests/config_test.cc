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

#include "gmv/config.h"

#include <filesystem>

#include <gtest/gtest.h>

#include "gmv/error.h"

namespace gmv {
namespace {

ErrorCode CodeOf(const std::string& text) {
  try {
    ParseConfig(text);
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::kNumerical;
}

TEST(Config, DefaultsMatchDesign) {
  const ExperimentConfig cfg = ParseConfig("{}");
  EXPECT_EQ(cfg.codec, CodecConfig{});
  EXPECT_EQ(cfg.codec.edge_threshold, 2.0f);
  EXPECT_EQ(cfg.codec.color_downsample, 8);
  EXPECT_EQ(cfg.codec.quant_bits, 4);
  EXPECT_EQ(cfg.codec.edge_render_weight, 0.7f);
  EXPECT_EQ(cfg.arch.image_size, 64);
  EXPECT_EQ(cfg.arch.base_channels, 64);
  EXPECT_EQ(cfg.arch.channel_mults, (std::vector<int>{1, 2, 2}));
  EXPECT_EQ(cfg.arch.num_res_blocks, 2);
  EXPECT_EQ(cfg.arch.attention_resolutions, std::vector<int>{16});
  EXPECT_EQ(cfg.arch.time_embed_dim, 128);
  EXPECT_EQ(cfg.arch.groups, 8);
  EXPECT_EQ(cfg.training.timesteps, 1000);
  EXPECT_EQ(cfg.training.beta_start, 1e-4);
  EXPECT_EQ(cfg.training.beta_end, 0.02);
  EXPECT_EQ(cfg.training.learning_rate, 1e-4);
  EXPECT_EQ(cfg.training.batch_size, 64);
  EXPECT_EQ(cfg.training.grad_clip, 1.0);
  EXPECT_EQ(cfg.training.ema_decay, 0.999);
  EXPECT_EQ(cfg.dataset.train_count, 2000);
  EXPECT_EQ(cfg.dataset.eval_count, 200);
}

TEST(Config, RoundTrip) {
  ExperimentConfig cfg;
  cfg.codec.edge_threshold = 1.5f;
  cfg.arch.image_size = 32;
  cfg.arch.attention_resolutions = {8};
  cfg.training.seed = 1234567890123ull;
  cfg.sampling.sampler = "ddpm";
  cfg.eval.metrics = {"psnr", "fid"};
  const ExperimentConfig back = ParseConfig(ConfigToJson(cfg));
  EXPECT_EQ(ConfigToJson(back), ConfigToJson(cfg));
  EXPECT_EQ(back.training.seed, 1234567890123ull);
  EXPECT_EQ(back.codec, cfg.codec);
}

TEST(Config, UnknownKeysAreErrors) {
  EXPECT_EQ(CodeOf(R"({"codex": {}})"), ErrorCode::kInvalidArgument);
  EXPECT_EQ(CodeOf(R"({"codec": {"edge_treshold": 2}})"), ErrorCode::kInvalidArgument);
  EXPECT_EQ(CodeOf(R"({"sampling": {"cfg_scale": 7}})"), ErrorCode::kInvalidArgument);
}

TEST(Config, TypeAndRangeErrors) {
  EXPECT_EQ(CodeOf("{not json"), ErrorCode::kFormatError);
  EXPECT_EQ(CodeOf(R"({"codec": {"quant_bits": "four"}})"), ErrorCode::kInvalidArgument);
  EXPECT_EQ(CodeOf(R"({"codec": {"quant_bits": 9}})"), ErrorCode::kInvalidArgument);
  EXPECT_EQ(CodeOf(R"({"dataset": {"train_count": 0}})"), ErrorCode::kInvalidArgument);
  EXPECT_EQ(CodeOf(R"({"diffusion": {"image_size": 30}})"), ErrorCode::kInvalidArgument);
  EXPECT_EQ(CodeOf(R"({"diffusion": {"beta_start": 0.5, "beta_end": 0.1}})"),
            ErrorCode::kInvalidArgument);
  EXPECT_EQ(CodeOf(R"({"sampling": {"sampler": "euler"}})"), ErrorCode::kInvalidArgument);
  EXPECT_EQ(CodeOf(R"({"sampling": {"steps": 5000}})"), ErrorCode::kInvalidArgument);
}

TEST(Config, LoadShippedConfigs) {
  const std::filesystem::path root = GMV_SOURCE_DIR;
  const ExperimentConfig ci = LoadConfig(root / "configs" / "ci.json");
  EXPECT_EQ(ci.arch.image_size, 32);
  const ExperimentConfig full = LoadConfig(root / "configs" / "full.json");
  EXPECT_EQ(full.arch.image_size, 64);
  EXPECT_EQ(full.training.base_steps, 30000);
  EXPECT_EQ(full.training.control_steps, 15000);
  try {
    LoadConfig(root / "configs" / "missing.json");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNotFound);
  }
}

}  // namespace
}  // namespace gmv
