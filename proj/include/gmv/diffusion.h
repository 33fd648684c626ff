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

#ifndef GMV_DIFFUSION_H_
#define GMV_DIFFUSION_H_

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include <torch/torch.h>

#include "gmv/control_net.h"
#include "gmv/image.h"
#include "gmv/schedule.h"
#include "gmv/unet.h"

namespace gmv {

// [N,3,H,W] float32 with pixels mapped from [0,1] to [-1,1].
torch::Tensor ImagesToTensor(std::span<const RgbImage> images);
// Inverse mapping, clamped to [0,1].
std::vector<RgbImage> TensorToImages(const torch::Tensor& x);
// Sampler output, already in [0,1], to images.
std::vector<RgbImage> SamplesToImages(const torch::Tensor& x);

// eps_hat = f(z_t, t) with t an int64 [B] tensor.
using NoisePredictor =
    std::function<torch::Tensor(const torch::Tensor&, const torch::Tensor&)>;

// Unconditioned base prediction, or base + branch when `branch` is non-null
// (condition_features from ControlNet::EncodeCondition). Throws kNumerical on
// non-finite output.
torch::Tensor PredictNoise(UNet& base, const torch::Tensor& z_t,
                           const torch::Tensor& t, ControlNet* branch = nullptr,
                           const torch::Tensor& condition_features = {});

NoisePredictor MakePredictor(UNet base);
NoisePredictor MakePredictor(UNet base, ControlNet branch,
                             const torch::Tensor& condition_features);

struct NoiseDraws {
  torch::Tensor t;    // int64 [B], uniform on [1, T]
  torch::Tensor eps;  // standard normal, shaped like z0
};

NoiseDraws DrawNoise(const torch::Tensor& z0, int timesteps,
                     torch::Generator& gen);

// Mean over batch and elements of (eps - eps_hat)^2 for the given draws.
torch::Tensor LossFromDraws(const NoisePredictor& predictor,
                            const torch::Tensor& z0, const NoiseDraws& draws,
                            const NoiseSchedule& sched);

// Draws (t, eps) from `gen` and evaluates LossFromDraws. Throws
// kInvalidArgument on an empty batch.
torch::Tensor TrainingLoss(const NoisePredictor& predictor,
                           const torch::Tensor& z0, const NoiseSchedule& sched,
                           torch::Generator& gen);

// Initial z_T for each item, one generator per seed.
torch::Tensor InitialNoise(std::span<const uint64_t> seeds, int image_size);

// Ancestral sampling from z_T; returns [B,3,H,W] in [0,1].
torch::Tensor SampleDdpm(const NoisePredictor& predictor,
                         const NoiseSchedule& sched,
                         std::span<const uint64_t> seeds, int image_size);

// Deterministic (eta = 0) sampling over timesteps floor(i*T/steps),
// i = steps..1. With clip_denoised the x0 estimate is clamped to [-1,1].
torch::Tensor SampleDdim(const NoisePredictor& predictor,
                         const NoiseSchedule& sched,
                         std::span<const uint64_t> seeds, int image_size,
                         int steps, bool clip_denoised);

std::vector<int> DdimTimesteps(int timesteps, int steps);

}  // namespace gmv

#endif  // GMV_DIFFUSION_H_
