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

#include <algorithm>
#include <cmath>

#include "skinscreen/errors.hpp"
#include "skinscreen/restoration.hpp"

namespace skinscreen {

void RestorationPolicy::validate() const {
  if (upscale_factor < 1) throw InvalidInput("upscale_factor must be >= 1");
  if (min_side_trigger < 1) throw InvalidInput("min_side_trigger must be >= 1");
  if (max_output_side < 1) throw InvalidInput("max_output_side must be >= 1");
}

ImageSize restored_size(int width, int height, const RestorationPolicy& policy) {
  const double longest = static_cast<double>(std::max(width, height));
  double scale = static_cast<double>(policy.upscale_factor);
  if (longest * scale > policy.max_output_side) scale = policy.max_output_side / longest;
  scale = std::max(scale, 1.0);
  return {std::max(width, static_cast<int>(std::lround(width * scale))),
          std::max(height, static_cast<int>(std::lround(height * scale)))};
}

RestorationOutcome restore(const ScreeningImage& image, const RestorationPolicy& policy,
                           const RestorationBackend* backend) {
  policy.validate();
  const auto not_requested = StageDecision::not_requested(StageName::restoration);
  if (std::min(image.width(), image.height()) >= policy.min_side_trigger) return {image, not_requested};

  const ImageSize target = restored_size(image.width(), image.height(), policy);
  if (target.width == image.width() && target.height == image.height()) return {image, not_requested};

  if (backend != nullptr) {
    try {
      ScreeningImage out = backend->upscale(image, target.width, target.height);
      if (out.width() == target.width && out.height() == target.height) {
        return {std::move(out), StageDecision{StageName::restoration, true, 0.0, StageReason::ok, {}}};
      }
    } catch (const std::exception&) {
      // fall through to bicubic
    }
  }
  return {resize_bicubic(image, target.width, target.height),
          StageDecision{StageName::restoration, true, 0.0, StageReason::ok, "bicubic"}};
}

}  // namespace skinscreen
