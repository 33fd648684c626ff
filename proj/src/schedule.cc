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

#include "gmv/schedule.h"

#include <cmath>
#include <string>

#include "gmv/error.h"

namespace gmv {

NoiseSchedule MakeSchedule(int timesteps, double beta_start, double beta_end) {
  if (timesteps < 1) {
    throw Error(ErrorCode::kInvalidArgument, "schedule needs at least 1 step");
  }
  if (!(beta_start > 0.0 && beta_start <= beta_end && beta_end < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                "need 0 < beta_start <= beta_end < 1");
  }
  NoiseSchedule s;
  s.timesteps = timesteps;
  s.beta_start = beta_start;
  s.beta_end = beta_end;
  s.betas.resize(timesteps);
  s.alphas_cumprod.resize(timesteps);
  double prod = 1.0;
  for (int i = 0; i < timesteps; ++i) {
    const double frac = timesteps == 1 ? 0.0 : static_cast<double>(i) / (timesteps - 1);
    s.betas[i] = beta_start + (beta_end - beta_start) * frac;
    prod *= 1.0 - s.betas[i];
    s.alphas_cumprod[i] = prod;
  }
  if (!(s.alphas_cumprod.back() > 0.0)) {
    throw Error(ErrorCode::kNumerical, "alpha_bar underflows to zero");
  }
  return s;
}

torch::Tensor ForwardNoise(const torch::Tensor& z0, int t,
                           const torch::Tensor& eps, const NoiseSchedule& sched) {
  if (z0.sizes() != eps.sizes()) {
    throw Error(ErrorCode::kShapeMismatch, "noise shape differs from z0");
  }
  if (t < 1 || t > sched.timesteps) {
    throw Error(ErrorCode::kOutOfRange, "timestep " + std::to_string(t) +
                                            " outside [1, T]");
  }
  const double ab = sched.alpha_bar(t);
  return std::sqrt(ab) * z0 + std::sqrt(1.0 - ab) * eps;
}

torch::Tensor ForwardNoise(const torch::Tensor& z0, const torch::Tensor& t,
                           const torch::Tensor& eps, const NoiseSchedule& sched) {
  if (z0.sizes() != eps.sizes()) {
    throw Error(ErrorCode::kShapeMismatch, "noise shape differs from z0");
  }
  if (t.dim() != 1 || t.size(0) != z0.size(0)) {
    throw Error(ErrorCode::kShapeMismatch, "need one timestep per batch item");
  }
  const int64_t n = z0.size(0);
  std::vector<double> a(n), b(n);
  auto acc = t.accessor<int64_t, 1>();
  for (int64_t i = 0; i < n; ++i) {
    if (acc[i] < 1 || acc[i] > sched.timesteps) {
      throw Error(ErrorCode::kOutOfRange, "timestep outside [1, T]");
    }
    const double ab = sched.alpha_bar(static_cast<int>(acc[i]));
    a[i] = std::sqrt(ab);
    b[i] = std::sqrt(1.0 - ab);
  }
  std::vector<int64_t> shape(z0.dim(), 1);
  shape[0] = n;
  const auto opts = torch::TensorOptions().dtype(z0.dtype());
  const torch::Tensor sa = torch::tensor(a, torch::kFloat64).to(opts.dtype()).view(shape);
  const torch::Tensor sb = torch::tensor(b, torch::kFloat64).to(opts.dtype()).view(shape);
  return sa * z0 + sb * eps;
}

}  // namespace gmv
