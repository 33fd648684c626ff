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

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "gmv/error.h"

namespace gmv {
namespace {

using nlohmann::json;

Error ConfigError(const std::string& what) {
  return Error(ErrorCode::kInvalidArgument, "config: " + what);
}

template <typename T>
void Read(const json& node, const std::string& section, const std::string& key,
          T& out) {
  try {
    out = node.get<T>();
  } catch (const json::exception&) {
    throw ConfigError("bad type for " + section + "." + key);
  }
}

// Dispatches every key of a section object; anything unhandled is an error.
template <typename Handler>
void ForEachKey(const json& root, const std::string& section, Handler handle) {
  if (!root.contains(section)) return;
  const json& node = root.at(section);
  if (!node.is_object()) throw ConfigError(section + " must be an object");
  for (auto it = node.begin(); it != node.end(); ++it) {
    if (!handle(it.key(), it.value())) {
      throw ConfigError("unknown key " + section + "." + it.key());
    }
  }
}

}  // namespace

void ArchitectureConfig::Validate() const {
  if (image_size < 8) throw ConfigError("image_size must be >= 8");
  if (channel_mults.empty()) throw ConfigError("channel_mults is empty");
  const int factor = 1 << (channel_mults.size() - 1);
  if (image_size % factor != 0) {
    throw ConfigError("image_size must be divisible by 2^(levels-1)");
  }
  if (base_channels < 1 || groups < 1 || num_res_blocks < 1) {
    throw ConfigError("base_channels, groups and num_res_blocks must be positive");
  }
  for (int m : channel_mults) {
    if (m < 1 || (base_channels * m) % groups != 0) {
      throw ConfigError("every level width must be divisible by groups");
    }
  }
  if (time_embed_dim < 2 || time_embed_dim % 2 != 0) {
    throw ConfigError("time_embed_dim must be even");
  }
}

void ExperimentConfig::Validate() const {
  codec.Validate();
  arch.Validate();
  if (dataset.train_count < 1 || dataset.eval_count < 1) {
    throw ConfigError("dataset counts must be >= 1");
  }
  if (dataset.min_shapes < 1 || dataset.max_shapes < dataset.min_shapes) {
    throw ConfigError("bad shape count range");
  }
  const TrainingConfig& t = training;
  if (t.timesteps < 1) throw ConfigError("timesteps must be >= 1");
  if (!(t.beta_start > 0 && t.beta_start <= t.beta_end && t.beta_end < 1)) {
    throw ConfigError("need 0 < beta_start <= beta_end < 1");
  }
  if (t.batch_size < 1 || t.base_steps < 0 || t.control_steps < 0) {
    throw ConfigError("batch_size must be >= 1 and step counts >= 0");
  }
  if (!(t.learning_rate > 0) || !(t.control_learning_rate > 0)) {
    throw ConfigError("learning rates must be positive");
  }
  if (!(t.ema_decay >= 0 && t.ema_decay < 1)) {
    throw ConfigError("ema_decay must be in [0,1)");
  }
  if (sampling.sampler != "ddim" && sampling.sampler != "ddpm") {
    throw ConfigError("sampler must be ddim or ddpm");
  }
  if (sampling.steps < 1 || sampling.steps > t.timesteps) {
    throw ConfigError("sampling.steps must be in [1, timesteps]");
  }
  if (eval.kid_block_size < 2 || eval.batch_size < 1) {
    throw ConfigError("kid_block_size must be >= 2 and eval batch_size >= 1");
  }
  for (const std::string& m : eval.metrics) {
    if (m != "psnr" && m != "ssim" && m != "lpips" && m != "fid" && m != "kid") {
      throw ConfigError("unknown metric " + m);
    }
  }
}

ExperimentConfig ParseConfig(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kFormatError, std::string("config: ") + e.what());
  }
  if (!root.is_object()) throw ConfigError("top level must be an object");
  for (auto it = root.begin(); it != root.end(); ++it) {
    const std::string& k = it.key();
    if (k != "dataset" && k != "codec" && k != "diffusion" && k != "sampling" &&
        k != "eval") {
      throw ConfigError("unknown section " + k);
    }
  }

  ExperimentConfig cfg;
  ForEachKey(root, "dataset", [&](const std::string& k, const json& v) {
    DatasetConfig& d = cfg.dataset;
    if (k == "source_dir") Read(v, "dataset", k, d.source_dir);
    else if (k == "seed") Read(v, "dataset", k, d.seed);
    else if (k == "split_seed") Read(v, "dataset", k, d.split_seed);
    else if (k == "train_count") Read(v, "dataset", k, d.train_count);
    else if (k == "eval_count") Read(v, "dataset", k, d.eval_count);
    else if (k == "min_shapes") Read(v, "dataset", k, d.min_shapes);
    else if (k == "max_shapes") Read(v, "dataset", k, d.max_shapes);
    else return false;
    return true;
  });
  ForEachKey(root, "codec", [&](const std::string& k, const json& v) {
    CodecConfig& c = cfg.codec;
    if (k == "edge_threshold") Read(v, "codec", k, c.edge_threshold);
    else if (k == "color_downsample") Read(v, "codec", k, c.color_downsample);
    else if (k == "quant_bits") Read(v, "codec", k, c.quant_bits);
    else if (k == "edge_render_weight") Read(v, "codec", k, c.edge_render_weight);
    else return false;
    return true;
  });
  ForEachKey(root, "diffusion", [&](const std::string& k, const json& v) {
    ArchitectureConfig& a = cfg.arch;
    TrainingConfig& t = cfg.training;
    if (k == "image_size") Read(v, "diffusion", k, a.image_size);
    else if (k == "base_channels") Read(v, "diffusion", k, a.base_channels);
    else if (k == "channel_mults") Read(v, "diffusion", k, a.channel_mults);
    else if (k == "num_res_blocks") Read(v, "diffusion", k, a.num_res_blocks);
    else if (k == "attention_resolutions") Read(v, "diffusion", k, a.attention_resolutions);
    else if (k == "time_embed_dim") Read(v, "diffusion", k, a.time_embed_dim);
    else if (k == "groups") Read(v, "diffusion", k, a.groups);
    else if (k == "timesteps") Read(v, "diffusion", k, t.timesteps);
    else if (k == "beta_start") Read(v, "diffusion", k, t.beta_start);
    else if (k == "beta_end") Read(v, "diffusion", k, t.beta_end);
    else if (k == "learning_rate") Read(v, "diffusion", k, t.learning_rate);
    else if (k == "control_learning_rate") Read(v, "diffusion", k, t.control_learning_rate);
    else if (k == "batch_size") Read(v, "diffusion", k, t.batch_size);
    else if (k == "base_steps") Read(v, "diffusion", k, t.base_steps);
    else if (k == "control_steps") Read(v, "diffusion", k, t.control_steps);
    else if (k == "grad_clip") Read(v, "diffusion", k, t.grad_clip);
    else if (k == "ema_decay") Read(v, "diffusion", k, t.ema_decay);
    else if (k == "seed") Read(v, "diffusion", k, t.seed);
    else if (k == "log_every") Read(v, "diffusion", k, t.log_every);
    else return false;
    return true;
  });
  ForEachKey(root, "sampling", [&](const std::string& k, const json& v) {
    SamplingConfig& s = cfg.sampling;
    if (k == "sampler") Read(v, "sampling", k, s.sampler);
    else if (k == "steps") Read(v, "sampling", k, s.steps);
    else if (k == "seed") Read(v, "sampling", k, s.seed);
    else if (k == "cc") Read(v, "sampling", k, s.cc);
    else if (k == "clip_denoised") Read(v, "sampling", k, s.clip_denoised);
    else return false;
    return true;
  });
  ForEachKey(root, "eval", [&](const std::string& k, const json& v) {
    EvalConfig& e = cfg.eval;
    if (k == "metrics") Read(v, "eval", k, e.metrics);
    else if (k == "embedder") Read(v, "eval", k, e.embedder);
    else if (k == "embedder_seed") Read(v, "eval", k, e.embedder_seed);
    else if (k == "kid_block_size") Read(v, "eval", k, e.kid_block_size);
    else if (k == "include_unconditional") Read(v, "eval", k, e.include_unconditional);
    else if (k == "batch_size") Read(v, "eval", k, e.batch_size);
    else return false;
    return true;
  });
  cfg.Validate();
  return cfg;
}

ExperimentConfig LoadConfig(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kNotFound, "file not found: " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ParseConfig(ss.str());
}

std::string ConfigToJson(const ExperimentConfig& cfg) {
  json root;
  root["dataset"] = {{"source_dir", cfg.dataset.source_dir},
                     {"seed", cfg.dataset.seed},
                     {"split_seed", cfg.dataset.split_seed},
                     {"train_count", cfg.dataset.train_count},
                     {"eval_count", cfg.dataset.eval_count},
                     {"min_shapes", cfg.dataset.min_shapes},
                     {"max_shapes", cfg.dataset.max_shapes}};
  root["codec"] = {{"edge_threshold", cfg.codec.edge_threshold},
                   {"color_downsample", cfg.codec.color_downsample},
                   {"quant_bits", cfg.codec.quant_bits},
                   {"edge_render_weight", cfg.codec.edge_render_weight}};
  root["diffusion"] = {{"image_size", cfg.arch.image_size},
                       {"base_channels", cfg.arch.base_channels},
                       {"channel_mults", cfg.arch.channel_mults},
                       {"num_res_blocks", cfg.arch.num_res_blocks},
                       {"attention_resolutions", cfg.arch.attention_resolutions},
                       {"time_embed_dim", cfg.arch.time_embed_dim},
                       {"groups", cfg.arch.groups},
                       {"timesteps", cfg.training.timesteps},
                       {"beta_start", cfg.training.beta_start},
                       {"beta_end", cfg.training.beta_end},
                       {"learning_rate", cfg.training.learning_rate},
                       {"control_learning_rate", cfg.training.control_learning_rate},
                       {"batch_size", cfg.training.batch_size},
                       {"base_steps", cfg.training.base_steps},
                       {"control_steps", cfg.training.control_steps},
                       {"grad_clip", cfg.training.grad_clip},
                       {"ema_decay", cfg.training.ema_decay},
                       {"seed", cfg.training.seed},
                       {"log_every", cfg.training.log_every}};
  root["sampling"] = {{"sampler", cfg.sampling.sampler},
                      {"steps", cfg.sampling.steps},
                      {"seed", cfg.sampling.seed},
                      {"cc", cfg.sampling.cc},
                      {"clip_denoised", cfg.sampling.clip_denoised}};
  root["eval"] = {{"metrics", cfg.eval.metrics},
                  {"embedder", cfg.eval.embedder},
                  {"embedder_seed", cfg.eval.embedder_seed},
                  {"kid_block_size", cfg.eval.kid_block_size},
                  {"include_unconditional", cfg.eval.include_unconditional},
                  {"batch_size", cfg.eval.batch_size}};
  return root.dump(2);
}

}  // namespace gmv
