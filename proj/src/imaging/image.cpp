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

#include <sstream>

#include "skinscreen/errors.hpp"
#include "skinscreen/imaging.hpp"
#include "skinscreen/simd.hpp"

namespace skinscreen {

ScreeningImage::ScreeningImage(int width, int height, std::vector<std::uint8_t> pixels,
                               std::string source_id)
    : width_(width), height_(height), pixels_(std::move(pixels)), source_id_(std::move(source_id)) {
  if (width < 1 || height < 1) {
    std::ostringstream msg;
    msg << "image dimensions must be positive, got " << width << "x" << height;
    throw InvalidInput(msg.str());
  }
  if (pixels_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * 3) {
    throw InvalidInput("pixel buffer size does not match width*height*3");
  }
}

ScreeningImage ScreeningImage::filled(int width, int height, std::uint8_t r, std::uint8_t g,
                                      std::uint8_t b, std::string source_id) {
  if (width < 1 || height < 1) throw InvalidInput("image dimensions must be positive");
  std::vector<std::uint8_t> px(static_cast<std::size_t>(width) * height * 3);
  for (std::size_t i = 0; i < px.size(); i += 3) {
    px[i] = r;
    px[i + 1] = g;
    px[i + 2] = b;
  }
  return ScreeningImage(width, height, std::move(px), std::move(source_id));
}

ScreeningImage ScreeningImage::with_source_id(std::string source_id) const {
  ScreeningImage copy = *this;
  copy.source_id_ = std::move(source_id);
  return copy;
}

BinaryMask::BinaryMask(int width, int height, bool value)
    : width_(width), height_(height) {
  if (width < 0 || height < 0) throw InvalidInput("mask dimensions must be non-negative");
  bits_.assign(static_cast<std::size_t>(width) * height, value ? 1 : 0);
}

BinaryMask::BinaryMask(int width, int height, std::vector<std::uint8_t> bits)
    : width_(width), height_(height), bits_(std::move(bits)) {
  if (width < 0 || height < 0) throw InvalidInput("mask dimensions must be non-negative");
  if (bits_.size() != static_cast<std::size_t>(width) * height) {
    throw InvalidInput("mask buffer size does not match width*height");
  }
  for (auto& b : bits_) b = b != 0 ? 1 : 0;
}

std::size_t BinaryMask::foreground_count() const {
  return bits_.size() - simd::kernels().count_zero(bits_.data(), bits_.size());
}

std::string_view to_string(StageName name) {
  switch (name) {
    case StageName::restoration: return "restoration";
    case StageName::background_removal: return "background_removal";
    case StageName::skin_segmentation: return "skin_segmentation";
  }
  return "unknown";
}

std::string_view to_string(StageReason reason) {
  switch (reason) {
    case StageReason::ok: return "ok";
    case StageReason::over_threshold: return "over_threshold";
    case StageReason::backend_unavailable: return "backend_unavailable";
    case StageReason::not_requested: return "not_requested";
  }
  return "unknown";
}

std::string StageDecision::display_name() const {
  std::string name(to_string(stage));
  if (!variant.empty()) name += "+" + variant;
  return name;
}

double blackout_fraction(const BinaryMask& mask) {
  if (mask.cell_count() == 0) throw InvalidInput("blackout fraction of a zero-area mask");
  const auto zeros = simd::kernels().count_zero(mask.bits().data(), mask.cell_count());
  return static_cast<double>(zeros) / static_cast<double>(mask.cell_count());
}

ScreeningImage apply_mask(const ScreeningImage& image, const BinaryMask& mask) {
  if (image.width() != mask.width() || image.height() != mask.height()) {
    std::ostringstream msg;
    msg << "mask " << mask.width() << "x" << mask.height() << " does not match image "
        << image.width() << "x" << image.height();
    throw InvalidInput(msg.str());
  }
  std::vector<std::uint8_t> out(image.pixels().size());
  simd::kernels().mask_rgb(image.pixels().data(), mask.bits().data(), out.data(),
                           image.pixel_count());
  return ScreeningImage(image.width(), image.height(), std::move(out), image.source_id());
}

}  // namespace skinscreen
