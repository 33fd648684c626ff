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

#include "gmv/range_coder.h"

#include <string>

#include "gmv/error.h"

namespace gmv {
namespace {

constexpr uint32_t kTop = 1u << 24;

void CheckContexts(std::span<const int> contexts, int n_contexts) {
  if (n_contexts < 1) {
    throw Error(ErrorCode::kInvalidArgument, "n_contexts must be positive");
  }
  for (size_t i = 0; i < contexts.size(); ++i) {
    if (contexts[i] < 0 || contexts[i] >= n_contexts) {
      throw Error(ErrorCode::kOutOfRange,
                  "context id " + std::to_string(contexts[i]) +
                      " out of range at position " + std::to_string(i));
    }
  }
}

}  // namespace

void RangeEncoder::Encode(int bit, BitModel& model) {
  const uint32_t bound = (range_ >> BitModel::kBits) * model.CodingProbability();
  if (bit) {
    range_ = bound;
  } else {
    low_ += bound;
    range_ -= bound;
  }
  model.Update(bit);
  while (range_ < kTop) {
    range_ <<= 8;
    ShiftLow();
  }
}

void RangeEncoder::ShiftLow() {
  if (static_cast<uint32_t>(low_) < 0xFF000000u || (low_ >> 32) != 0) {
    const uint8_t carry = static_cast<uint8_t>(low_ >> 32);
    uint8_t pending = cache_;
    do {
      out_.push_back(static_cast<uint8_t>(pending + carry));
      pending = 0xFF;
    } while (--cache_size_ != 0);
    cache_ = static_cast<uint8_t>(low_ >> 24);
  }
  ++cache_size_;
  low_ = (low_ & 0x00FFFFFFu) << 8;
}

std::vector<uint8_t> RangeEncoder::Finish() {
  for (int i = 0; i < 5; ++i) ShiftLow();
  // The first byte holds bits above the initial 32-bit interval and is
  // always zero; drop it.
  std::vector<uint8_t> out(out_.begin() + 1, out_.end());
  out_.clear();
  return out;
}

RangeDecoder::RangeDecoder(std::span<const uint8_t> bytes) : bytes_(bytes) {
  if (bytes_.size() < 4) {
    throw Error(ErrorCode::kTruncated, "range-coded stream shorter than 4 bytes");
  }
  for (int i = 0; i < 4; ++i) code_ = (code_ << 8) | NextByte();
}

uint8_t RangeDecoder::NextByte() {
  if (pos_ >= bytes_.size()) {
    throw Error(ErrorCode::kTruncated, "range-coded stream truncated");
  }
  return bytes_[pos_++];
}

int RangeDecoder::Decode(BitModel& model) {
  const uint32_t bound = (range_ >> BitModel::kBits) * model.CodingProbability();
  int bit;
  if (code_ < bound) {
    range_ = bound;
    bit = 1;
  } else {
    code_ -= bound;
    range_ -= bound;
    bit = 0;
  }
  model.Update(bit);
  while (range_ < kTop) {
    range_ <<= 8;
    code_ = (code_ << 8) | NextByte();
  }
  return bit;
}

std::vector<uint8_t> EncodeBits(std::span<const uint8_t> bits,
                                std::span<const int> contexts, int n_contexts) {
  if (bits.size() != contexts.size()) {
    throw Error(ErrorCode::kInvalidArgument, "bits and contexts differ in length");
  }
  CheckContexts(contexts, n_contexts);
  std::vector<BitModel> models(n_contexts);
  RangeEncoder enc;
  for (size_t i = 0; i < bits.size(); ++i) {
    enc.Encode(bits[i] != 0, models[contexts[i]]);
  }
  return enc.Finish();
}

std::vector<uint8_t> DecodeBits(std::span<const uint8_t> bytes,
                                std::span<const int> contexts, int n_contexts) {
  CheckContexts(contexts, n_contexts);
  if (contexts.empty()) return {};
  std::vector<BitModel> models(n_contexts);
  RangeDecoder dec(bytes);
  std::vector<uint8_t> bits(contexts.size());
  for (size_t i = 0; i < contexts.size(); ++i) {
    bits[i] = static_cast<uint8_t>(dec.Decode(models[contexts[i]]));
  }
  return bits;
}

}  // namespace gmv
