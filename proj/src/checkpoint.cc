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

#include "gmv/checkpoint.h"

#include <cstring>
#include <fstream>
#include <vector>

#include <json.hpp>

#include "gmv/error.h"

namespace gmv {
namespace {

constexpr char kMagic[4] = {'G', 'M', 'V', 'C'};
constexpr uint32_t kVersion = 1;

class Fnv {
 public:
  void Add(const void* data, size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (size_t i = 0; i < n; ++i) {
      h_ ^= p[i];
      h_ *= 1099511628211ull;
    }
  }
  uint64_t value() const { return h_; }

 private:
  uint64_t h_ = 14695981039346656037ull;
};

template <typename T>
void Put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

template <typename T>
T Get(std::istream& in) {
  T v{};
  if (!in.read(reinterpret_cast<char*>(&v), sizeof(v))) {
    throw Error(ErrorCode::kTruncated, "checkpoint truncated");
  }
  return v;
}

std::string GetString(std::istream& in, uint64_t n) {
  if (n > (1ull << 30)) throw Error(ErrorCode::kFormatError, "checkpoint string too long");
  std::string s(n, '\0');
  if (!in.read(s.data(), static_cast<std::streamsize>(n))) {
    throw Error(ErrorCode::kTruncated, "checkpoint truncated");
  }
  return s;
}

torch::Tensor AsFloat(const torch::Tensor& t) {
  return t.detach().to(torch::kFloat32).contiguous();
}

}  // namespace

void SaveCheckpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  nlohmann::json meta = {
      {"kind", ckpt.kind},
      {"step", ckpt.step},
      {"ema", ckpt.ema},
      {"sampling_checksum", std::to_string(ckpt.sampling_checksum)},
      {"base_checksum", std::to_string(ckpt.base_checksum)},
      {"config", nlohmann::json::parse(ConfigToJson(ckpt.config))},
  };
  const std::string meta_text = meta.dump();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  out.write(kMagic, 4);
  Put<uint32_t>(out, kVersion);
  Put<uint64_t>(out, meta_text.size());
  out.write(meta_text.data(), static_cast<std::streamsize>(meta_text.size()));
  Put<uint64_t>(out, ckpt.tensors.size());
  for (const auto& [name, tensor] : ckpt.tensors) {
    const torch::Tensor t = AsFloat(tensor);
    Put<uint32_t>(out, static_cast<uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    Put<uint32_t>(out, static_cast<uint32_t>(t.dim()));
    for (int64_t d : t.sizes()) Put<int64_t>(out, d);
    out.write(static_cast<const char*>(t.data_ptr()),
              static_cast<std::streamsize>(t.numel() * sizeof(float)));
  }
  if (!out.flush()) throw Error(ErrorCode::kIoError, "write failed: " + path.string());
}

Checkpoint LoadCheckpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kNotFound, "cannot open " + path.string());
  char magic[4];
  if (!in.read(magic, 4)) throw Error(ErrorCode::kTruncated, "checkpoint truncated");
  if (std::memcmp(magic, kMagic, 4) != 0) {
    throw Error(ErrorCode::kFormatError, path.string() + " is not a checkpoint");
  }
  if (Get<uint32_t>(in) != kVersion) {
    throw Error(ErrorCode::kFormatError, "unsupported checkpoint version");
  }
  Checkpoint ckpt;
  try {
    const nlohmann::json meta = nlohmann::json::parse(GetString(in, Get<uint64_t>(in)));
    ckpt.kind = meta.at("kind").get<std::string>();
    ckpt.step = meta.at("step").get<int64_t>();
    ckpt.ema = meta.at("ema").get<bool>();
    ckpt.sampling_checksum = std::stoull(meta.at("sampling_checksum").get<std::string>());
    ckpt.base_checksum = std::stoull(meta.at("base_checksum").get<std::string>());
    ckpt.config = ParseConfig(meta.at("config").dump());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kFormatError, std::string("checkpoint metadata: ") + e.what());
  }
  if (ckpt.kind != "base" && ckpt.kind != "control") {
    throw Error(ErrorCode::kFormatError, "unknown checkpoint kind " + ckpt.kind);
  }
  const uint64_t count = Get<uint64_t>(in);
  for (uint64_t i = 0; i < count; ++i) {
    std::string name = GetString(in, Get<uint32_t>(in));
    const uint32_t ndim = Get<uint32_t>(in);
    if (ndim > 8) throw Error(ErrorCode::kFormatError, "bad tensor rank");
    std::vector<int64_t> shape(ndim);
    int64_t numel = 1;
    for (auto& d : shape) {
      d = Get<int64_t>(in);
      if (d < 0 || d > (1 << 28)) throw Error(ErrorCode::kFormatError, "bad tensor shape");
      numel *= d;
    }
    torch::Tensor t = torch::empty(shape, torch::kFloat32);
    if (!in.read(static_cast<char*>(t.data_ptr()),
                 static_cast<std::streamsize>(numel * sizeof(float)))) {
      throw Error(ErrorCode::kTruncated, "checkpoint truncated in " + name);
    }
    ckpt.tensors.emplace(std::move(name), std::move(t));
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw Error(ErrorCode::kFormatError, "trailing bytes in checkpoint");
  }
  return ckpt;
}

uint64_t TensorChecksum(const TensorMap& tensors) {
  Fnv h;
  for (const auto& [name, tensor] : tensors) {
    const torch::Tensor t = AsFloat(tensor);
    h.Add(name.data(), name.size());
    for (int64_t d : t.sizes()) h.Add(&d, sizeof(d));
    h.Add(t.data_ptr(), t.numel() * sizeof(float));
  }
  return h.value();
}

uint64_t ParamChecksum(torch::nn::Module& module) {
  return TensorChecksum(ModuleTensors(module, ""));
}

TensorMap ModuleTensors(torch::nn::Module& module, const std::string& prefix) {
  TensorMap out;
  for (const auto& item : module.named_parameters()) {
    out.emplace(prefix + item.key(), item.value().detach().clone());
  }
  return out;
}

void LoadModuleTensors(torch::nn::Module& module, const TensorMap& tensors,
                       const std::string& prefix) {
  torch::NoGradGuard no_grad;
  for (auto& item : module.named_parameters()) {
    auto it = tensors.find(prefix + item.key());
    if (it == tensors.end()) {
      throw Error(ErrorCode::kMismatch, "checkpoint lacks " + prefix + item.key());
    }
    if (it->second.sizes() != item.value().sizes()) {
      throw Error(ErrorCode::kMismatch, "shape differs for " + prefix + item.key());
    }
    item.value().copy_(it->second);
  }
}

std::string SamplingPrefix(const Checkpoint& ckpt) {
  return ckpt.ema ? "ema/" : "model/";
}

SamplingModels LoadSamplingModels(const std::filesystem::path& base_path,
                                  const std::filesystem::path& control_path) {
  const Checkpoint base_ckpt = LoadCheckpoint(base_path);
  if (base_ckpt.kind != "base") {
    throw Error(ErrorCode::kMismatch, base_path.string() + " is not a base checkpoint");
  }
  SamplingModels models;
  models.config = base_ckpt.config;
  models.base = UNet(base_ckpt.config.arch);
  LoadModuleTensors(*models.base, base_ckpt.tensors, SamplingPrefix(base_ckpt));
  models.base->eval();
  for (auto& p : models.base->parameters()) p.set_requires_grad(false);
  if (control_path.empty()) return models;

  const Checkpoint ctrl_ckpt = LoadCheckpoint(control_path);
  if (ctrl_ckpt.kind != "control") {
    throw Error(ErrorCode::kMismatch,
                control_path.string() + " is not a control checkpoint");
  }
  const uint64_t base_sum = ParamChecksum(*models.base);
  if (ctrl_ckpt.base_checksum != base_sum) {
    throw Error(ErrorCode::kMismatch,
                "control checkpoint was trained against a different base");
  }
  models.branch = ControlNet(ctrl_ckpt.config.arch);
  LoadModuleTensors(*models.branch, ctrl_ckpt.tensors, SamplingPrefix(ctrl_ckpt));
  models.branch->eval();
  for (auto& p : models.branch->parameters()) p.set_requires_grad(false);
  return models;
}

}  // namespace gmv
