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

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace skinscreen {

struct ImageSize {
  int width = 0;
  int height = 0;
  friend bool operator==(const ImageSize&, const ImageSize&) = default;
};

// 8-bit interleaved sRGB raster. Immutable once constructed.
class ScreeningImage {
 public:
  ScreeningImage() = default;
  // Throws InvalidInput unless width, height >= 1 and pixels.size() == width * height * 3.
  ScreeningImage(int width, int height, std::vector<std::uint8_t> pixels,
                 std::string source_id = {});

  // Uniform-colour image.
  static ScreeningImage filled(int width, int height, std::uint8_t r, std::uint8_t g,
                               std::uint8_t b, std::string source_id = {});

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  bool empty() const noexcept { return pixels_.empty(); }
  std::size_t pixel_count() const noexcept {
    return static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_);
  }
  std::span<const std::uint8_t> pixels() const noexcept { return pixels_; }
  const std::string& source_id() const noexcept { return source_id_; }
  static constexpr std::string_view color_space() noexcept { return "sRGB"; }

  std::uint8_t at(int x, int y, int channel) const {
    return pixels_[(static_cast<std::size_t>(y) * width_ + x) * 3 + channel];
  }

  ScreeningImage with_source_id(std::string source_id) const;

  friend bool operator==(const ScreeningImage& a, const ScreeningImage& b) {
    return a.width_ == b.width_ && a.height_ == b.height_ && a.pixels_ == b.pixels_;
  }

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> pixels_;
  std::string source_id_;
};

// Foreground mask; true (1) keeps a pixel, false (0) blacks it out.
class BinaryMask {
 public:
  BinaryMask() = default;
  BinaryMask(int width, int height, bool value);
  // Throws InvalidInput unless bits.size() == width * height. Non-zero bytes are foreground.
  BinaryMask(int width, int height, std::vector<std::uint8_t> bits);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t cell_count() const noexcept { return bits_.size(); }
  std::span<const std::uint8_t> bits() const noexcept { return bits_; }
  bool at(int x, int y) const { return bits_[static_cast<std::size_t>(y) * width_ + x] != 0; }
  void set(int x, int y, bool value) {
    bits_[static_cast<std::size_t>(y) * width_ + x] = value ? 1 : 0;
  }
  std::size_t foreground_count() const;

  friend bool operator==(const BinaryMask&, const BinaryMask&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> bits_;
};

enum class StageName { restoration, background_removal, skin_segmentation };
enum class StageReason { ok, over_threshold, backend_unavailable, not_requested };

std::string_view to_string(StageName name);
std::string_view to_string(StageReason reason);

struct StageDecision {
  StageName stage = StageName::restoration;
  bool applied = false;
  double blackout_fraction = 0.0;
  StageReason reason = StageReason::not_requested;
  // Free-form qualifier appended to the wire name, e.g. "bicubic" for the
  // restoration fallback path.
  std::string variant;

  // "restoration", or "restoration+bicubic" when a variant is set.
  std::string display_name() const;

  static StageDecision not_requested(StageName stage) {
    return StageDecision{stage, false, 0.0, StageReason::not_requested, {}};
  }

  friend bool operator==(const StageDecision&, const StageDecision&) = default;
};

// Fraction of mask cells that are background. Throws InvalidInput on a zero-area mask.
double blackout_fraction(const BinaryMask& mask);

// Blacks out every pixel whose mask cell is false. Throws InvalidInput on a size mismatch.
ScreeningImage apply_mask(const ScreeningImage& image, const BinaryMask& mask);

// Bilinear resampling with pixel-centre alignment. Throws InvalidInput for targets < 1.
ScreeningImage resize(const ScreeningImage& image, int target_w, int target_h);

// Bicubic (Catmull-Rom style, a = -0.5) resampling; used by the restoration fallback.
ScreeningImage resize_bicubic(const ScreeningImage& image, int target_w, int target_h);

// Box-filter (pixel area) downscaling. Throws InvalidInput when either side would grow.
ScreeningImage resize_area(const ScreeningImage& image, int target_w, int target_h);

// Area averaging when both sides shrink, bilinear otherwise.
ScreeningImage resize_for_model(const ScreeningImage& image, int target_w, int target_h);

// Nearest-neighbour mask resampling.
BinaryMask resize_nearest(const BinaryMask& mask, int target_w, int target_h);

// Image decoding/encoding. Only PNG and JPEG are accepted.
enum class ImageFormat { png, jpeg };

std::optional<ImageFormat> sniff_format(std::span<const std::uint8_t> bytes);
// Throws InvalidInput when the bytes are not a decodable PNG/JPEG.
ScreeningImage decode_image(std::span<const std::uint8_t> bytes, std::string source_id = {});
std::vector<std::uint8_t> encode_image(const ScreeningImage& image, ImageFormat format,
                                       int jpeg_quality = 95);

std::vector<std::uint8_t> read_file_bytes(const std::string& path);
void write_file_bytes(const std::string& path, std::span<const std::uint8_t> bytes);
ScreeningImage load_image(const std::string& path);
// Format chosen from the extension (.jpg/.jpeg -> JPEG, otherwise PNG).
void save_image(const ScreeningImage& image, const std::string& path);

// Lower-case hex SHA-256.
std::string sha256_hex(std::span<const std::uint8_t> bytes);
std::string sha256_hex(std::string_view text);
std::string sha256_file(const std::string& path);

}  // namespace skinscreen
