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

#include "skinscreen/errors.hpp"
#include "skinscreen/segmentation.hpp"

namespace skinscreen {

std::string_view to_string(BackendKind kind) {
  return kind == BackendKind::salient_object ? "salient_object" : "skin_region";
}

BackendKind parse_backend_kind(std::string_view text) {
  if (text == "salient_object") return BackendKind::salient_object;
  if (text == "skin_region") return BackendKind::skin_region;
  throw InvalidInput("unknown backend kind: " + std::string(text));
}

void GateConfig::validate() const {
  if (!(blackout_threshold > 0.0 && blackout_threshold < 1.0)) {
    throw InvalidInput("blackout threshold must lie in (0, 1)");
  }
}

GateOutcome gated_segment(const ScreeningImage& image, const SegmentationBackend* backend,
                          const GateConfig& config, StageName stage) {
  config.validate();
  if (backend == nullptr) {
    return {image, StageDecision{stage, false, 0.0, StageReason::backend_unavailable, {}}};
  }
  BinaryMask mask;
  try {
    mask = backend->predict(image);
  } catch (const std::exception&) {
    return {image, StageDecision{stage, false, 0.0, StageReason::backend_unavailable, {}}};
  }
  if (mask.width() != image.width() || mask.height() != image.height() || mask.cell_count() == 0) {
    return {image, StageDecision{stage, false, 0.0, StageReason::backend_unavailable, {}}};
  }
  const double fraction = blackout_fraction(mask);
  if (fraction > config.blackout_threshold) {
    return {image, StageDecision{stage, false, fraction, StageReason::over_threshold, {}}};
  }
  return {apply_mask(image, mask), StageDecision{stage, true, fraction, StageReason::ok, {}}};
}

}  // namespace skinscreen
