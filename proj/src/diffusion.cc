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

#include "gmv/diffusion.h"

#include <cmath>
#include <string>

#include <ATen/CPUGeneratorImpl.h>

#include "gmv/error.h"

namespace gmv {
namespace {

void CheckFinite(const torch::Tensor& x, const char* what) {
  if (!torch::isfinite(x).all().item<bool>()) {
    throw Error(ErrorCode::kNumerical, std::string("non-finite values in ") + what);
  }
}

torch::Tensor FullSteps(int64_t batch, int t) {
  return torch::full({batch}, static_cast<int64_t>(t), torch::kLong);
}

torch::Tensor ToUnitRange(const torch::Tensor& z) {
  return ((z + 1.0) * 0.5).clamp(0.0, 1.0);
}

}  // namespace

torch::Tensor ImagesToTensor(std::span<const RgbImage> images) {
  if (images.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "no images to convert");
  }
  const int h = images[0].height();
  const int w = images[0].width();
  torch::Tensor out = torch::empty({static_cast<int64_t>(images.size()), 3, h, w});
  auto acc = out.accessor<float, 4>();
  for (size_t n = 0; n < images.size(); ++n) {
    const RgbImage& img = images[n];
    if (img.height() != h || img.width() != w) {
      throw Error(ErrorCode::kShapeMismatch, "images differ in size");
    }
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        for (int c = 0; c < 3; ++c) acc[n][c][y][x] = img.at(y, x, c) * 2.0f - 1.0f;
      }
    }
  }
  return out;
}

std::vector<RgbImage> TensorToImages(const torch::Tensor& x) {
  return SamplesToImages(ToUnitRange(x.detach()));
}

std::vector<RgbImage> SamplesToImages(const torch::Tensor& x) {
  const torch::Tensor unit = x.detach().to(torch::kFloat32).clamp(0.0, 1.0).contiguous();
  auto acc = unit.accessor<float, 4>();
  std::vector<RgbImage> out;
  for (int64_t n = 0; n < unit.size(0); ++n) {
    RgbImage img(static_cast<int>(unit.size(2)), static_cast<int>(unit.size(3)));
    for (int y = 0; y < img.height(); ++y) {
      for (int x = 0; x < img.width(); ++x) {
        for (int c = 0; c < 3; ++c) img.at(y, x, c) = acc[n][c][y][x];
      }
    }
    out.push_back(std::move(img));
  }
  return out;
}

torch::Tensor PredictNoise(UNet& base, const torch::Tensor& z_t,
                           const torch::Tensor& t, ControlNet* branch,
                           const torch::Tensor& condition_features) {
  torch::Tensor eps = (branch != nullptr && condition_features.defined())
                          ? ApplyControl(base, *branch, z_t, t, condition_features)
                          : base->forward(z_t, t);
  if (eps.sizes() != z_t.sizes()) {
    throw Error(ErrorCode::kShapeMismatch, "prediction shape differs from input");
  }
  CheckFinite(eps, "noise prediction");
  return eps;
}

NoisePredictor MakePredictor(UNet base) {
  return [base](const torch::Tensor& z, const torch::Tensor& t) mutable {
    return PredictNoise(base, z, t);
  };
}

NoisePredictor MakePredictor(UNet base, ControlNet branch,
                             const torch::Tensor& condition_features) {
  return [base, branch, condition_features](const torch::Tensor& z,
                                            const torch::Tensor& t) mutable {
    return PredictNoise(base, z, t, &branch, condition_features);
  };
}

NoiseDraws DrawNoise(const torch::Tensor& z0, int timesteps,
                     torch::Generator& gen) {
  NoiseDraws d;
  d.t = torch::randint(1, timesteps + 1, {z0.size(0)}, gen,
                       torch::TensorOptions().dtype(torch::kLong));
  d.eps = torch::randn(z0.sizes(), gen, z0.options());
  return d;
}

torch::Tensor LossFromDraws(const NoisePredictor& predictor,
                            const torch::Tensor& z0, const NoiseDraws& draws,
                            const NoiseSchedule& sched) {
  if (z0.size(0) == 0) {
    throw Error(ErrorCode::kInvalidArgument, "empty training batch");
  }
  const torch::Tensor z_t = ForwardNoise(z0, draws.t, draws.eps, sched);
  const torch::Tensor eps_hat = predictor(z_t, draws.t);
  return (draws.eps - eps_hat).pow(2).mean();
}

torch::Tensor TrainingLoss(const NoisePredictor& predictor,
                           const torch::Tensor& z0, const NoiseSchedule& sched,
                           torch::Generator& gen) {
  if (!z0.defined() || z0.dim() == 0 || z0.size(0) == 0) {
    throw Error(ErrorCode::kInvalidArgument, "empty training batch");
  }
  return LossFromDraws(predictor, z0, DrawNoise(z0, sched.timesteps, gen), sched);
}

torch::Tensor InitialNoise(std::span<const uint64_t> seeds, int image_size) {
  if (seeds.empty()) throw Error(ErrorCode::kInvalidArgument, "no seeds");
  std::vector<torch::Tensor> parts;
  for (uint64_t s : seeds) {
    torch::Generator gen = at::make_generator<at::CPUGeneratorImpl>(s);
    parts.push_back(torch::randn({1, 3, image_size, image_size}, gen,
                                 torch::TensorOptions().dtype(torch::kFloat32)));
  }
  return torch::cat(parts, 0);
}

torch::Tensor SampleDdpm(const NoisePredictor& predictor,
                         const NoiseSchedule& sched,
                         std::span<const uint64_t> seeds, int image_size) {
  torch::NoGradGuard no_grad;
  std::vector<torch::Generator> gens;
  std::vector<torch::Tensor> parts;
  for (uint64_t s : seeds) {
    gens.push_back(at::make_generator<at::CPUGeneratorImpl>(s));
    parts.push_back(torch::randn({1, 3, image_size, image_size}, gens.back(),
                                 torch::TensorOptions().dtype(torch::kFloat32)));
  }
  if (parts.empty()) throw Error(ErrorCode::kInvalidArgument, "no seeds");
  torch::Tensor z = torch::cat(parts, 0);
  const int64_t batch = z.size(0);
  for (int t = sched.timesteps; t >= 1; --t) {
    const torch::Tensor eps = predictor(z, FullSteps(batch, t));
    const double alpha = sched.alpha(t);
    const double ab = sched.alpha_bar(t);
    z = (z - (sched.beta(t) / std::sqrt(1.0 - ab)) * eps) / std::sqrt(alpha);
    if (t > 1) {
      const double sigma = std::sqrt(sched.beta(t) * (1.0 - sched.alpha_bar(t - 1)) / (1.0 - ab));
      std::vector<torch::Tensor> xi;
      for (auto& g : gens) {
        xi.push_back(torch::randn({1, 3, image_size, image_size}, g,
                                  torch::TensorOptions().dtype(torch::kFloat32)));
      }
      z = z + sigma * torch::cat(xi, 0);
    }
    CheckFinite(z, "DDPM state");
  }
  return ToUnitRange(z);
}

std::vector<int> DdimTimesteps(int timesteps, int steps) {
  if (steps < 1 || steps > timesteps) {
    throw Error(ErrorCode::kInvalidArgument, "DDIM steps must be in [1, T]");
  }
  std::vector<int> out(steps);
  for (int i = 1; i <= steps; ++i) {
    out[i - 1] = static_cast<int>(static_cast<int64_t>(i) * timesteps / steps);
  }
  return out;
}

torch::Tensor SampleDdim(const NoisePredictor& predictor,
                         const NoiseSchedule& sched,
                         std::span<const uint64_t> seeds, int image_size,
                         int steps, bool clip_denoised) {
  torch::NoGradGuard no_grad;
  const std::vector<int> taus = DdimTimesteps(sched.timesteps, steps);
  torch::Tensor z = InitialNoise(seeds, image_size);
  const int64_t batch = z.size(0);
  for (int i = steps - 1; i >= 0; --i) {
    const int t = taus[i];
    const int t_prev = i > 0 ? taus[i - 1] : 0;
    const double ab = sched.alpha_bar(t);
    const double ab_prev = sched.alpha_bar(t_prev);
    torch::Tensor eps = predictor(z, FullSteps(batch, t));
    torch::Tensor x0 = (z - std::sqrt(1.0 - ab) * eps) / std::sqrt(ab);
    if (clip_denoised) {
      x0 = x0.clamp(-1.0, 1.0);
      eps = (z - std::sqrt(ab) * x0) / std::sqrt(1.0 - ab);
    }
    z = std::sqrt(ab_prev) * x0 + std::sqrt(1.0 - ab_prev) * eps;
    CheckFinite(z, "DDIM state");
  }
  return ToUnitRange(z);
}

}  // namespace gmv
