// Copyright 2026 The skinscreen Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#pragma once

#include <string>

#include "skinscreen/imaging.hpp"

namespace skinscreen {

struct RestorationPolicy {
  int min_side_trigger = 224;
  int upscale_factor = 2;
  int max_output_side = 2048;
  // Throws InvalidInput on factor < 1, trigger < 1 or max side < 1.
  void validate() const;
};

// Super-resolution model. upscale() must return exactly the requested size.
class RestorationBackend {
 public:
  virtual ~RestorationBackend() = default;
  virtual std::string name() const = 0;
  virtual ScreeningImage upscale(const ScreeningImage& image, int target_w, int target_h) const = 0;
};

struct RestorationOutcome {
  ScreeningImage image;
  StageDecision decision;
};

// Output size for an image that triggers restoration: both sides scaled by
// the factor, then scaled down uniformly if the longer side would exceed the
// cap, never below the input size.
ImageSize restored_size(int width, int height, const RestorationPolicy& policy);

// Upscales images whose shorter side is below the trigger. Uses the backend
// when given and falls back to bicubic interpolation (decision variant
// "bicubic") when it is absent or fails.
RestorationOutcome restore(const ScreeningImage& image, const RestorationPolicy& policy,
                           const RestorationBackend* backend = nullptr);

}  // namespace skinscreen
