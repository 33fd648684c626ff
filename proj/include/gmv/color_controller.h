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

#ifndef GMV_COLOR_CONTROLLER_H_
#define GMV_COLOR_CONTROLLER_H_

#include "gmv/image.h"

namespace gmv {

// Keeps the luma of `generated` and takes Cb/Cr from `machine_decode`.
// Throws kShapeMismatch when the dimensions differ.
RgbImage ApplyColorController(const RgbImage& generated,
                              const RgbImage& machine_decode);

// Returns `generated` untouched when disabled.
RgbImage ColorControllerPipeline(bool enabled, const RgbImage& generated,
                                 const RgbImage& machine_decode);

}  // namespace gmv

#endif  // GMV_COLOR_CONTROLLER_H_
