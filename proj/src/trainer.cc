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

#include "gmv/trainer.h"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <ATen/CPUGeneratorImpl.h>

#include "gmv/control_net.h"
#include "gmv/diffusion.h"
#include "gmv/error.h"
#include "gmv/icm_codec.h"
#include "gmv/rng.h"
#include "gmv/schedule.h"
#include "gmv/unet.h"

namespace gmv {
namespace {

constexpr double kBeta1 = 0.9;
constexpr double kBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;
constexpr uint64_t kNoiseSalt = 0x6e6f697365ull;
constexpr uint64_t kControlSalt = 0x636f6e74726full;

torch::Tensor SampleBatch(const torch::Tensor& data, int batch, uint64_t seed) {
  Rng rng(seed);
  std::vector<int64_t> idx(batch);
  const int n = static_cast<int>(data.size(0));
  for (auto& i : idx) i = rng.UniformInt(0, n - 1);
  return torch::tensor(idx, torch::kLong);
}

void CheckLoss(double loss, int64_t step) {
  if (!std::isfinite(loss)) {
    std::ostringstream msg;
    msg << "training diverged: loss " << loss << " at step " << step;
    throw Error(ErrorCode::kNumerical, msg.str());
  }
}

int64_t TotalSteps(const TrainOptions& options, int configured) {
  return options.steps >= 0 ? options.steps : configured;
}

}  // namespace

Optimizer::Optimizer(torch::nn::Module& module, double learning_rate,
                     double grad_clip, double ema_decay)
    : lr_(learning_rate), clip_(grad_clip), decay_(ema_decay) {
  for (auto& item : module.named_parameters(/*recurse=*/true)) {
    if (!item.value().requires_grad()) continue;
    names_.push_back(item.key());
    params_.push_back(item.value());
    m_.push_back(torch::zeros_like(item.value()));
    v_.push_back(torch::zeros_like(item.value()));
    ema_.push_back(item.value().detach().clone());
  }
}

double Optimizer::Step() {
  torch::NoGradGuard no_grad;
  double sq = 0.0;
  for (auto& p : params_) {
    if (p.grad().defined()) sq += p.grad().pow(2).sum().item<double>();
  }
  const double norm = std::sqrt(sq);
  const double scale = (clip_ > 0.0 && norm > clip_) ? clip_ / (norm + 1e-6) : 1.0;
  ++step_;
  const double bc1 = 1.0 - std::pow(kBeta1, static_cast<double>(step_));
  const double bc2 = 1.0 - std::pow(kBeta2, static_cast<double>(step_));
  const double decay =
      std::min(decay_, (1.0 + static_cast<double>(step_ - 1)) /
                           (10.0 + static_cast<double>(step_ - 1)));
  for (size_t i = 0; i < params_.size(); ++i) {
    torch::Tensor& p = params_[i];
    if (p.grad().defined()) {
      const torch::Tensor g = p.grad() * scale;
      m_[i].mul_(kBeta1).add_(g, 1.0 - kBeta1);
      v_[i].mul_(kBeta2).addcmul_(g, g, 1.0 - kBeta2);
      const torch::Tensor denom = (v_[i] / bc2).sqrt_().add_(kAdamEps);
      p.addcdiv_(m_[i], denom, -lr_ / bc1);
      p.mutable_grad().zero_();
    }
    ema_[i].mul_(decay).add_(p.detach(), 1.0 - decay);
  }
  return norm;
}

TensorMap Optimizer::State() const {
  TensorMap out;
  for (size_t i = 0; i < names_.size(); ++i) {
    out.emplace("ema/" + names_[i], ema_[i].clone());
    out.emplace("adam_m/" + names_[i], m_[i].clone());
    out.emplace("adam_v/" + names_[i], v_[i].clone());
  }
  return out;
}

TensorMap Optimizer::EmaTensors(const std::string& prefix) const {
  TensorMap out;
  for (size_t i = 0; i < names_.size(); ++i) out.emplace(prefix + names_[i], ema_[i].clone());
  return out;
}

void Optimizer::LoadState(const TensorMap& tensors) {
  torch::NoGradGuard no_grad;
  auto load = [&](const std::string& group, std::vector<torch::Tensor>& dst) {
    for (size_t i = 0; i < names_.size(); ++i) {
      auto it = tensors.find(group + names_[i]);
      if (it == tensors.end() || it->second.sizes() != dst[i].sizes()) {
        throw Error(ErrorCode::kMismatch, "optimizer state lacks " + group + names_[i]);
      }
      dst[i].copy_(it->second);
    }
  };
  load("ema/", ema_);
  load("adam_m/", m_);
  load("adam_v/", v_);
}

std::vector<RgbImage> MachineDecodes(std::span<const RgbImage> images,
                                     const CodecConfig& codec) {
  std::vector<RgbImage> out;
  out.reserve(images.size());
  for (const RgbImage& img : images) {
    const std::vector<uint8_t> bytes = EncodeMachine(img, codec).Serialize();
    out.push_back(DecodeMachine(MachineBitstream::Parse(bytes)));
  }
  return out;
}

TrainResult TrainBase(const ExperimentConfig& cfg,
                      std::span<const RgbImage> images,
                      const TrainOptions& options) {
  if (images.empty()) throw Error(ErrorCode::kInvalidArgument, "empty training set");
  const TrainingConfig& tc = cfg.training;
  const NoiseSchedule sched = MakeSchedule(tc.timesteps, tc.beta_start, tc.beta_end);
  const torch::Tensor data = ImagesToTensor(images);
  if (data.size(2) != cfg.arch.image_size || data.size(3) != cfg.arch.image_size) {
    throw Error(ErrorCode::kShapeMismatch, "training images do not match image_size");
  }

  UNet model(cfg.arch);
  InitParameters(*model, tc.seed);
  Optimizer opt(*model, tc.learning_rate, tc.grad_clip, tc.ema_decay);
  if (!options.resume.empty()) {
    const Checkpoint ckpt = LoadCheckpoint(options.resume);
    if (ckpt.kind != "base") throw Error(ErrorCode::kMismatch, "resume needs a base checkpoint");
    LoadModuleTensors(*model, ckpt.tensors, "model/");
    opt.LoadState(ckpt.tensors);
    opt.set_step(ckpt.step);
  }

  auto save = [&]() {
    Checkpoint ckpt;
    ckpt.kind = "base";
    ckpt.config = cfg;
    ckpt.step = opt.step();
    ckpt.ema = true;
    ckpt.tensors = ModuleTensors(*model, "model/");
    ckpt.tensors.merge(opt.State());
    ckpt.sampling_checksum = TensorChecksum(opt.EmaTensors(""));
    SaveCheckpoint(options.out, ckpt);
    return ckpt.sampling_checksum;
  };

  const NoisePredictor predictor = MakePredictor(model);
  TrainResult result;
  const int64_t total = TotalSteps(options, tc.base_steps);
  model->train();
  while (opt.step() < total) {
    const int64_t step = opt.step();
    const torch::Tensor idx = SampleBatch(data, tc.batch_size, DeriveSeed(tc.seed, step));
    const torch::Tensor z0 = data.index_select(0, idx);
    torch::Generator gen =
        at::make_generator<at::CPUGeneratorImpl>(DeriveSeed(tc.seed ^ kNoiseSalt, step));
    torch::Tensor loss = TrainingLoss(predictor, z0, sched, gen);
    const double value = loss.item<double>();
    CheckLoss(value, step);
    loss.backward();
    opt.Step();
    result.losses.push_back(value);
    if (options.on_step) options.on_step(opt.step(), value);
    if (options.checkpoint_every > 0 && !options.out.empty() &&
        opt.step() % options.checkpoint_every == 0 && opt.step() < total) {
      save();
    }
  }
  result.final_step = opt.step();
  result.sampling_checksum = TensorChecksum(opt.EmaTensors(""));
  if (!options.out.empty()) save();
  return result;
}

TrainResult TrainControl(const ExperimentConfig& cfg,
                         const std::filesystem::path& base_path,
                         std::span<const RgbImage> originals,
                         std::span<const RgbImage> conditions,
                         const TrainOptions& options) {
  if (originals.empty()) throw Error(ErrorCode::kInvalidArgument, "empty training set");
  if (originals.size() != conditions.size()) {
    throw Error(ErrorCode::kShapeMismatch, "originals and conditions differ in count");
  }
  const TrainingConfig& tc = cfg.training;
  SamplingModels models = LoadSamplingModels(base_path);
  UNet base = models.base;
  const ExperimentConfig& base_cfg = models.config;
  if (base_cfg.arch.image_size != cfg.arch.image_size ||
      base_cfg.training.timesteps != tc.timesteps) {
    throw Error(ErrorCode::kMismatch, "config does not match the base checkpoint");
  }
  const NoiseSchedule sched = MakeSchedule(base_cfg.training.timesteps,
                                           base_cfg.training.beta_start,
                                           base_cfg.training.beta_end);
  const uint64_t base_sum = ParamChecksum(*base);
  const torch::Tensor data = ImagesToTensor(originals);
  const torch::Tensor cond = ImagesToTensor(conditions);
  if (data.sizes() != cond.sizes()) {
    throw Error(ErrorCode::kShapeMismatch, "originals and conditions differ in size");
  }

  ControlNet branch = InitControlBranch(base, tc.seed ^ kControlSalt);
  Optimizer opt(*branch, tc.control_learning_rate, tc.grad_clip, tc.ema_decay);
  if (!options.resume.empty()) {
    const Checkpoint ckpt = LoadCheckpoint(options.resume);
    if (ckpt.kind != "control") {
      throw Error(ErrorCode::kMismatch, "resume needs a control checkpoint");
    }
    if (ckpt.base_checksum != base_sum) {
      throw Error(ErrorCode::kMismatch, "resume checkpoint belongs to a different base");
    }
    LoadModuleTensors(*branch, ckpt.tensors, "model/");
    opt.LoadState(ckpt.tensors);
    opt.set_step(ckpt.step);
  }

  auto save = [&]() {
    Checkpoint ckpt;
    ckpt.kind = "control";
    ckpt.config = cfg;
    ckpt.step = opt.step();
    ckpt.ema = true;
    ckpt.base_checksum = base_sum;
    ckpt.tensors = ModuleTensors(*branch, "model/");
    ckpt.tensors.merge(opt.State());
    ckpt.sampling_checksum = TensorChecksum(opt.EmaTensors(""));
    SaveCheckpoint(options.out, ckpt);
  };

  TrainResult result;
  const int64_t total = TotalSteps(options, tc.control_steps);
  const uint64_t seed = tc.seed ^ kControlSalt;
  branch->train();
  while (opt.step() < total) {
    const int64_t step = opt.step();
    const torch::Tensor idx = SampleBatch(data, tc.batch_size, DeriveSeed(seed, step));
    const torch::Tensor z0 = data.index_select(0, idx);
    const torch::Tensor c = cond.index_select(0, idx);
    torch::Generator gen =
        at::make_generator<at::CPUGeneratorImpl>(DeriveSeed(seed ^ kNoiseSalt, step));
    const torch::Tensor features = branch->EncodeCondition(c);
    const NoisePredictor predictor = [&](const torch::Tensor& z, const torch::Tensor& t) {
      return PredictNoise(base, z, t, &branch, features);
    };
    torch::Tensor loss = TrainingLoss(predictor, z0, sched, gen);
    const double value = loss.item<double>();
    CheckLoss(value, step);
    loss.backward();
    opt.Step();
    result.losses.push_back(value);
    if (options.on_step) options.on_step(opt.step(), value);
    if (options.checkpoint_every > 0 && !options.out.empty() &&
        opt.step() % options.checkpoint_every == 0 && opt.step() < total) {
      save();
    }
  }
  if (ParamChecksum(*base) != base_sum) {
    throw Error(ErrorCode::kMismatch, "base parameters changed during control training");
  }
  result.final_step = opt.step();
  result.sampling_checksum = TensorChecksum(opt.EmaTensors(""));
  if (!options.out.empty()) save();
  return result;
}

}  // namespace gmv
