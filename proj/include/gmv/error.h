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

#ifndef GMV_ERROR_H_
#define GMV_ERROR_H_

#include <stdexcept>
#include <string>

namespace gmv {

enum class ErrorCode {
  kInvalidArgument,
  kNotFound,
  kIoError,
  kFormatError,
  kShapeMismatch,
  kOutOfRange,
  kTruncated,
  kNumerical,
  kMismatch,
};

// Stable identifier used in machine-parseable CLI error lines.
const char* ErrorCodeName(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace gmv

#endif  // GMV_ERROR_H_
