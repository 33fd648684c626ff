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

#ifndef GMV_TRAINER_H_
#define GMV_TRAINER_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <torch/torch.h>

#include "gmv/checkpoint.h"
#include "gmv/config.h"
#include "gmv/image.h"

namespace gmv {

// Adam with bias correction, global-norm gradient clipping and a weight EMA.
// All state is exposed as tensors so it can be checkpointed.
class Optimizer {
 public:
  Optimizer(torch::nn::Module& module, double learning_rate, double grad_clip,
            double ema_decay);

  // Clips, applies one Adam update and updates the EMA. Returns the
  // pre-clip gradient norm.
  double Step();

  int64_t step() const { return step_; }
  void set_step(int64_t step) { step_ = step; }

  // "ema/", "adam_m/", "adam_v/" groups keyed by parameter name.
  TensorMap State() const;
  void LoadState(const TensorMap& tensors);
  TensorMap EmaTensors(const std::string& prefix) const;

 private:
  std::vector<std::string> names_;
  std::vector<torch::Tensor> params_;
  std::vector<torch::Tensor> m_;
  std::vector<torch::Tensor> v_;
  std::vector<torch::Tensor> ema_;
  double lr_;
  double clip_;
  double decay_;
  int64_t step_ = 0;
};

struct TrainOptions {
  std::filesystem::path out;     // written at the end and every checkpoint_every steps
  std::filesystem::path resume;  // optional checkpoint of the same kind
  int64_t steps = -1;            // total optimizer steps; -1 uses the config
  int64_t checkpoint_every = 0;
  std::function<void(int64_t step, double loss)> on_step;
};

struct TrainResult {
  std::vector<double> losses;  // one per step run in this call
  int64_t final_step = 0;
  uint64_t sampling_checksum = 0;
};

TrainResult TrainBase(const ExperimentConfig& cfg,
                      std::span<const RgbImage> images,
                      const TrainOptions& options);

// `conditions[i]` is the machine decode of `originals[i]`. The base is loaded
// from `base_path` (EMA weights when present) and stays frozen; a change in
// its checksum during training throws kMismatch.
TrainResult TrainControl(const ExperimentConfig& cfg,
                         const std::filesystem::path& base_path,
                         std::span<const RgbImage> originals,
                         std::span<const RgbImage> conditions,
                         const TrainOptions& options);

// Encode, serialize, parse and decode each image with the machine codec.
std::vector<RgbImage> MachineDecodes(std::span<const RgbImage> images,
                                     const CodecConfig& codec);

}  // namespace gmv

#endif  // GMV_TRAINER_H_
