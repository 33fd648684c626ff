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

#include "gmv/control_net.h"

#include "gmv/error.h"

namespace gmv {
namespace {

namespace nn = torch::nn;
namespace F = torch::nn::functional;

nn::Conv2d Conv(int in, int out, int kernel) {
  return nn::Conv2d(nn::Conv2dOptions(in, out, kernel).padding(kernel / 2));
}

}  // namespace

ControlNetImpl::ControlNetImpl(const ArchitectureConfig& arch) : arch_(arch) {
  cond1_ = register_module("cond1", Conv(3, 32, 3));
  cond2_ = register_module("cond2", Conv(32, 64, 3));
  cond3_ = register_module("cond3", Conv(64, arch.base_channels, 3));
  encoder_ = register_module("encoder", UNetEncoder(arch));
  couplings_ = register_module("couplings", nn::ModuleList());
  for (int ch : encoder_->skip_channels()) couplings_->push_back(Conv(ch, ch, 1));
  couplings_->push_back(Conv(encoder_->middle_channels(),
                             encoder_->middle_channels(), 1));
  mean_coupling_ = register_module(
      "mean_coupling", MeanHead(arch.time_embed_dim, arch.base_channels + 3));
}

torch::Tensor ControlNetImpl::EncodeCondition(const torch::Tensor& condition) {
  if (condition.dim() != 4 || condition.size(1) != 3 ||
      condition.size(2) != arch_.image_size || condition.size(3) != arch_.image_size) {
    throw Error(ErrorCode::kShapeMismatch, "condition does not match image_size");
  }
  torch::Tensor h = F::silu(cond1_(condition));
  h = F::silu(cond2_(h));
  return cond3_(h);
}

ControlResiduals ControlNetImpl::forward(const torch::Tensor& x,
                                         const torch::Tensor& t,
                                         const torch::Tensor& condition_features) {
  EncoderOutput enc = encoder_(x, t, condition_features);
  ControlResiduals out;
  const size_t n = enc.skips.size();
  for (size_t i = 0; i < n; ++i) {
    out.skips.push_back(couplings_[i]->as<nn::Conv2dImpl>()->forward(enc.skips[i]));
  }
  out.middle = couplings_[n]->as<nn::Conv2dImpl>()->forward(enc.middle);
  out.mean = mean_coupling_(
      enc.temb, torch::cat({condition_features.mean({2, 3}), x.mean({2, 3})}, 1));
  return out;
}

ControlNet InitControlBranch(UNet& base, uint64_t seed) {
  ControlNet branch(base->arch());
  InitParameters(*branch, seed);
  torch::NoGradGuard no_grad;
  const auto base_params = base->encoder()->named_parameters();
  auto copy_params = branch->encoder()->named_parameters();
  if (base_params.size() != copy_params.size()) {
    throw Error(ErrorCode::kMismatch, "encoder copy does not mirror base encoder");
  }
  for (auto& item : copy_params) {
    const torch::Tensor* src = base_params.find(item.key());
    if (src == nullptr || src->sizes() != item.value().sizes()) {
      throw Error(ErrorCode::kMismatch, "encoder copy mismatch at " + item.key());
    }
    item.value().copy_(*src);
  }
  for (auto& item : branch->couplings()->named_parameters()) item.value().zero_();
  for (auto& p : branch->mean_coupling()->parameters()) p.zero_();
  return branch;
}

torch::Tensor ApplyControl(UNet& base, ControlNet& branch, const torch::Tensor& z_t,
                           const torch::Tensor& t,
                           const torch::Tensor& condition_features) {
  const ControlResiduals residuals = branch->forward(z_t, t, condition_features);
  return base->forward(z_t, t, &residuals);
}

}  // namespace gmv
