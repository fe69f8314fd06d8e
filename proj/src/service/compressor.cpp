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
#include "skinscreen/service.hpp"

namespace skinscreen {

void CompressorPolicy::validate() const {
  if (max_side < 224) throw InvalidInput("compressor max_side must be at least 224");
  if (re_encode_quality < 1 || re_encode_quality > 100) throw InvalidInput("JPEG quality must be in [1, 100]");
  if (max_upload_bytes == 0) throw InvalidInput("max_upload_bytes must be positive");
}

ImageSize compressed_size(int width, int height, int max_side) {
  const int longest = std::max(width, height);
  if (longest <= max_side) return {width, height};
  const double scale = static_cast<double>(max_side) / longest;
  return {std::clamp(static_cast<int>(std::lround(width * scale)), 1, max_side),
          std::clamp(static_cast<int>(std::lround(height * scale)), 1, max_side)};
}

ScreeningImage compress_ingress(std::span<const std::uint8_t> upload, const CompressorPolicy& policy) {
  policy.validate();
  if (upload.size() > policy.max_upload_bytes) {
    throw RequestError(413, "payload_too_large",
                       "upload of " + std::to_string(upload.size()) + " bytes exceeds the limit of " +
                           std::to_string(policy.max_upload_bytes));
  }
  if (upload.empty() || !sniff_format(upload)) {
    throw RequestError(415, "unsupported_media_type", "upload must be a PNG or JPEG image");
  }
  ScreeningImage image;
  try {
    image = decode_image(upload, "upload");
  } catch (const InvalidInput& e) {
    throw RequestError(415, "unsupported_media_type", e.what());
  }
  const ImageSize target = compressed_size(image.width(), image.height(), policy.max_side);
  if (target.width == image.width() && target.height == image.height()) return image;

  const auto jpeg = encode_image(resize_area(image, target.width, target.height), ImageFormat::jpeg,
                                 policy.re_encode_quality);
  return decode_image(jpeg, "upload");
}

}  // namespace skinscreen
