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

#ifndef GMV_SCHEDULE_H_
#define GMV_SCHEDULE_H_

#include <vector>

#include <torch/torch.h>

namespace gmv {

// Linear beta schedule. Timesteps are 1-based: betas[t-1] is beta_t.
struct NoiseSchedule {
  int timesteps = 0;
  double beta_start = 0.0;
  double beta_end = 0.0;
  std::vector<double> betas;
  std::vector<double> alphas_cumprod;

  double beta(int t) const { return betas[t - 1]; }
  double alpha(int t) const { return 1.0 - betas[t - 1]; }
  // alpha_bar(0) == 1 by convention.
  double alpha_bar(int t) const { return t == 0 ? 1.0 : alphas_cumprod[t - 1]; }
};

// Throws kInvalidArgument unless 0 < beta_start <= beta_end < 1, T >= 1.
NoiseSchedule MakeSchedule(int timesteps, double beta_start, double beta_end);

// z_t = sqrt(abar_t) z0 + sqrt(1 - abar_t) eps for a single timestep.
torch::Tensor ForwardNoise(const torch::Tensor& z0, int t,
                           const torch::Tensor& eps, const NoiseSchedule& sched);

// Batched form; t holds one int64 timestep per leading-dimension item.
torch::Tensor ForwardNoise(const torch::Tensor& z0, const torch::Tensor& t,
                           const torch::Tensor& eps, const NoiseSchedule& sched);

}  // namespace gmv

#endif  // GMV_SCHEDULE_H_
