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

#ifndef GMV_RANGE_CODER_H_
#define GMV_RANGE_CODER_H_

#include <cstdint>
#include <span>
#include <vector>

namespace gmv {

// Adaptive binary model. p is the probability of a 1 bit in 1/4096 units.
struct BitModel {
  static constexpr int kBits = 12;
  static constexpr int kOne = 1 << kBits;
  static constexpr int kShift = 5;

  uint16_t p = kOne / 2;

  void Update(int bit) {
    const int target = bit ? kOne : 0;
    p = static_cast<uint16_t>(p + ((target - static_cast<int>(p)) >> kShift));
  }
  // The update rule can drive p to 0; the coder never splits with an empty
  // sub-interval.
  uint32_t CodingProbability() const { return p == 0 ? 1u : p; }
};

// 32-bit range encoder with carry propagation. Bytes are emitted whenever
// range drops below 2^24; Finish() appends the 4 bytes of the low register.
class RangeEncoder {
 public:
  void Encode(int bit, BitModel& model);
  std::vector<uint8_t> Finish();

 private:
  void ShiftLow();

  uint64_t low_ = 0;
  uint32_t range_ = 0xFFFFFFFFu;
  uint8_t cache_ = 0;
  uint64_t cache_size_ = 1;
  std::vector<uint8_t> out_;
};

class RangeDecoder {
 public:
  // Throws kTruncated if fewer than 4 bytes are available.
  explicit RangeDecoder(std::span<const uint8_t> bytes);

  // Throws kTruncated on reading past the end of the stream.
  int Decode(BitModel& model);

  size_t bytes_consumed() const { return pos_; }

 private:
  uint8_t NextByte();

  std::span<const uint8_t> bytes_;
  size_t pos_ = 0;
  uint32_t range_ = 0xFFFFFFFFu;
  uint32_t code_ = 0;
};

// Codes bits[i] under model contexts[i]. Throws kOutOfRange for a context id
// >= n_contexts and kInvalidArgument on a length mismatch.
std::vector<uint8_t> EncodeBits(std::span<const uint8_t> bits,
                                std::span<const int> contexts, int n_contexts);

std::vector<uint8_t> DecodeBits(std::span<const uint8_t> bytes,
                                std::span<const int> contexts, int n_contexts);

}  // namespace gmv

#endif  // GMV_RANGE_CODER_H_
