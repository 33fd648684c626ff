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

#include "gmv/unet.h"

#include <algorithm>
#include <cmath>

#include "gmv/error.h"
#include "gmv/rng.h"

namespace gmv {
namespace {

namespace nn = torch::nn;
namespace F = torch::nn::functional;

nn::Conv2d Conv(int in, int out, int kernel, int stride = 1) {
  return nn::Conv2d(
      nn::Conv2dOptions(in, out, kernel).stride(stride).padding(kernel / 2));
}

bool Contains(const std::vector<int>& v, int x) {
  return std::find(v.begin(), v.end(), x) != v.end();
}

}  // namespace

torch::Tensor SinusoidalEmbedding(const torch::Tensor& t, int dim) {
  const int half = dim / 2;
  const auto opts = torch::TensorOptions().dtype(torch::kFloat32);
  const torch::Tensor freqs =
      torch::exp(-std::log(10000.0) * torch::arange(half, opts) / half);
  const torch::Tensor args = t.to(torch::kFloat32).unsqueeze(1) * freqs.unsqueeze(0);
  return torch::cat({torch::sin(args), torch::cos(args)}, 1);
}

AttentionBlockImpl::AttentionBlockImpl(int channels, int groups)
    : norm_(register_module("norm", nn::GroupNorm(groups, channels))),
      qkv_(register_module("qkv", Conv(channels, 3 * channels, 1))),
      proj_(register_module("proj", Conv(channels, channels, 1))) {}

torch::Tensor AttentionBlockImpl::forward(const torch::Tensor& x) {
  const int64_t b = x.size(0), c = x.size(1), h = x.size(2), w = x.size(3);
  const torch::Tensor qkv = qkv_(norm_(x)).reshape({b, 3, c, h * w});
  const torch::Tensor q = qkv.select(1, 0);
  const torch::Tensor k = qkv.select(1, 1);
  const torch::Tensor v = qkv.select(1, 2);
  const torch::Tensor attn =
      torch::softmax(torch::bmm(q.transpose(1, 2), k) / std::sqrt(double(c)), -1);
  const torch::Tensor out = torch::bmm(v, attn.transpose(1, 2)).reshape({b, c, h, w});
  return x + proj_(out);
}

ResBlockImpl::ResBlockImpl(int in_channels, int out_channels, int temb_dim,
                           int groups, bool attention)
    : norm1_(register_module("norm1", nn::GroupNorm(groups, in_channels))),
      conv1_(register_module("conv1", Conv(in_channels, out_channels, 3))),
      temb_proj_(register_module("temb_proj", nn::Linear(temb_dim, out_channels))),
      norm2_(register_module("norm2", nn::GroupNorm(groups, out_channels))),
      conv2_(register_module("conv2", Conv(out_channels, out_channels, 3))) {
  if (in_channels != out_channels) {
    skip_ = register_module("skip", Conv(in_channels, out_channels, 1));
  }
  if (attention) attn_ = register_module("attn", AttentionBlock(out_channels, groups));
}

torch::Tensor ResBlockImpl::forward(const torch::Tensor& x,
                                    const torch::Tensor& temb) {
  torch::Tensor h = conv1_(F::silu(norm1_(x)));
  h = h + temb_proj_(F::silu(temb)).unsqueeze(-1).unsqueeze(-1);
  h = conv2_(F::silu(norm2_(h)));
  h = (skip_ ? skip_(x) : x) + h;
  return attn_ ? attn_(h) : h;
}

MeanHeadImpl::MeanHeadImpl(int temb_dim, int inputs)
    : inputs_(inputs),
      proj_(register_module("proj", nn::Linear(temb_dim, 3 * (inputs + 1)))) {}

torch::Tensor MeanHeadImpl::forward(const torch::Tensor& temb,
                                    const torch::Tensor& u) {
  const int64_t b = u.size(0);
  const torch::Tensor gates = proj_(F::silu(temb)).view({b, 3, inputs_ + 1});
  const torch::Tensor u1 = torch::cat({u, torch::ones({b, 1}, u.options())}, 1);
  return torch::bmm(gates, u1.unsqueeze(-1)).squeeze(-1);
}

DownsampleImpl::DownsampleImpl(int channels)
    : conv_(register_module("conv", Conv(channels, channels, 3, 2))) {}

torch::Tensor DownsampleImpl::forward(const torch::Tensor& x) { return conv_(x); }

UpsampleImpl::UpsampleImpl(int channels)
    : conv_(register_module("conv", Conv(channels, channels, 3))) {}

torch::Tensor UpsampleImpl::forward(const torch::Tensor& x) {
  return conv_(F::interpolate(
      x, F::InterpolateFuncOptions()
             .scale_factor(std::vector<double>{2.0, 2.0})
             .mode(torch::kNearest)));
}

UNetEncoderImpl::UNetEncoderImpl(const ArchitectureConfig& arch) : arch_(arch) {
  arch.Validate();
  const int temb = arch.time_embed_dim;
  const int base = arch.base_channels;
  time1_ = register_module("time1", nn::Linear(temb, temb));
  time2_ = register_module("time2", nn::Linear(temb, temb));
  conv_in_ = register_module("conv_in", Conv(3, base, 3));
  down_ = register_module("down", nn::ModuleList());

  int ch = base;
  int res = arch.image_size;
  skip_channels_.push_back(ch);
  const int levels = static_cast<int>(arch.channel_mults.size());
  for (int level = 0; level < levels; ++level) {
    const int out = base * arch.channel_mults[level];
    for (int r = 0; r < arch.num_res_blocks; ++r) {
      down_->push_back(ResBlock(ch, out, temb, arch.groups,
                                Contains(arch.attention_resolutions, res)));
      ch = out;
      skip_channels_.push_back(ch);
    }
    if (level + 1 < levels) {
      down_->push_back(Downsample(ch));
      skip_channels_.push_back(ch);
      res /= 2;
    }
  }
  mid1_ = register_module("mid1", ResBlock(ch, ch, temb, arch.groups, true));
  mid2_ = register_module("mid2", ResBlock(ch, ch, temb, arch.groups, false));
  middle_channels_ = ch;
}

EncoderOutput UNetEncoderImpl::forward(const torch::Tensor& x,
                                       const torch::Tensor& t,
                                       const torch::Tensor& hint) {
  EncoderOutput out;
  const torch::Tensor emb = SinusoidalEmbedding(t, arch_.time_embed_dim).to(x.dtype());
  out.temb = time2_(F::silu(time1_(emb)));
  torch::Tensor h = conv_in_(x);
  if (hint.defined()) h = h + hint;
  out.skips.push_back(h);
  for (const auto& module : *down_) {
    if (auto* res = module->as<ResBlockImpl>()) {
      h = res->forward(h, out.temb);
    } else {
      h = module->as<DownsampleImpl>()->forward(h);
    }
    out.skips.push_back(h);
  }
  h = mid1_(h, out.temb);
  out.middle = mid2_(h, out.temb);
  return out;
}

UNetImpl::UNetImpl(const ArchitectureConfig& arch) : arch_(arch) {
  encoder_ = register_module("encoder", UNetEncoder(arch));
  up_ = register_module("up", nn::ModuleList());
  const int base = arch.base_channels;
  const int temb = arch.time_embed_dim;
  std::vector<int> skips = encoder_->skip_channels();
  int ch = encoder_->middle_channels();
  const int levels = static_cast<int>(arch.channel_mults.size());
  int res = arch.image_size >> (levels - 1);
  for (int level = levels - 1; level >= 0; --level) {
    const int out = base * arch.channel_mults[level];
    for (int r = 0; r <= arch.num_res_blocks; ++r) {
      const int skip_ch = skips.back();
      skips.pop_back();
      up_->push_back(ResBlock(ch + skip_ch, out, temb, arch.groups,
                              Contains(arch.attention_resolutions, res)));
      ch = out;
    }
    if (level > 0) {
      up_->push_back(Upsample(ch));
      res *= 2;
    }
  }
  out_norm_ = register_module("out_norm", nn::GroupNorm(arch.groups, ch));
  out_conv_ = register_module("out_conv", Conv(ch, 3, 3));
  mean_head_ = register_module("mean_head", MeanHead(temb, 3));
}

torch::Tensor UNetImpl::forward(const torch::Tensor& x, const torch::Tensor& t,
                                const ControlResiduals* residuals) {
  if (x.dim() != 4 || x.size(1) != 3 || x.size(2) != arch_.image_size ||
      x.size(3) != arch_.image_size) {
    throw Error(ErrorCode::kShapeMismatch, "input does not match image_size");
  }
  EncoderOutput enc = encoder_(x, t);
  torch::Tensor h = enc.middle;
  if (residuals != nullptr) {
    if (residuals->skips.size() != enc.skips.size()) {
      throw Error(ErrorCode::kShapeMismatch, "control residual count mismatch");
    }
    for (size_t i = 0; i < enc.skips.size(); ++i) {
      enc.skips[i] = enc.skips[i] + residuals->skips[i];
    }
    h = h + residuals->middle;
  }
  for (const auto& module : *up_) {
    if (auto* res = module->as<ResBlockImpl>()) {
      h = res->forward(torch::cat({h, enc.skips.back()}, 1), enc.temb);
      enc.skips.pop_back();
    } else {
      h = module->as<UpsampleImpl>()->forward(h);
    }
  }
  torch::Tensor mean = mean_head_(enc.temb, x.mean({2, 3}));
  if (residuals != nullptr && residuals->mean.defined()) mean = mean + residuals->mean;
  return out_conv_(F::silu(out_norm_(h))) + mean.unsqueeze(-1).unsqueeze(-1);
}

void InitParameters(torch::nn::Module& module, uint64_t seed) {
  torch::NoGradGuard no_grad;
  Rng rng(seed);
  for (auto& item : module.named_parameters()) {
    torch::Tensor& p = item.value();
    const std::string& name = item.key();
    const bool is_norm = name.find("norm") != std::string::npos;
    if (p.dim() == 1) {
      p.fill_(is_norm && name.ends_with(".weight") ? 1.0 : 0.0);
      continue;
    }
    const int64_t fan_in = p.numel() / p.size(0);
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    std::vector<float> values(p.numel());
    for (float& v : values) v = static_cast<float>(rng.Uniform(-bound, bound));
    p.copy_(torch::from_blob(values.data(), p.sizes(), torch::kFloat32).to(p.dtype()));
  }
}

}  // namespace gmv
