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

#include "gmv/color_controller.h"

#include <utility>

#include "gmv/error.h"

namespace gmv {

RgbImage ApplyColorController(const RgbImage& generated,
                              const RgbImage& machine_decode) {
  if (generated.height() != machine_decode.height() ||
      generated.width() != machine_decode.width()) {
    throw Error(ErrorCode::kShapeMismatch,
                "color controller inputs differ in dimensions");
  }
  YccImage gen = RgbToYcc(generated);
  YccImage mach = RgbToYcc(machine_decode);
  YccImage mixed{std::move(gen.y), std::move(mach.cb), std::move(mach.cr)};
  return YccToRgb(mixed);
}

RgbImage ColorControllerPipeline(bool enabled, const RgbImage& generated,
                                 const RgbImage& machine_decode) {
  if (!enabled) {
    if (generated.height() != machine_decode.height() ||
        generated.width() != machine_decode.width()) {
      throw Error(ErrorCode::kShapeMismatch,
                  "color controller inputs differ in dimensions");
    }
    return generated;
  }
  return ApplyColorController(generated, machine_decode);
}

}  // namespace gmv
