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

#include <filesystem>
#include <fstream>
#include <iterator>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "skinscreen/errors.hpp"
#include "skinscreen/imaging.hpp"

namespace skinscreen {

std::optional<ImageFormat> sniff_format(std::span<const std::uint8_t> bytes) {
  static constexpr std::uint8_t png_magic[] = {0x89, 'P', 'N', 'G', 0x0D, 0x0A, 0x1A, 0x0A};
  if (bytes.size() >= sizeof(png_magic) &&
      std::equal(std::begin(png_magic), std::end(png_magic), bytes.begin())) {
    return ImageFormat::png;
  }
  if (bytes.size() >= 3 && bytes[0] == 0xFF && bytes[1] == 0xD8 && bytes[2] == 0xFF) {
    return ImageFormat::jpeg;
  }
  return std::nullopt;
}

ScreeningImage decode_image(std::span<const std::uint8_t> bytes, std::string source_id) {
  if (!sniff_format(bytes)) throw InvalidInput("payload is neither PNG nor JPEG");
  const cv::Mat buffer(1, static_cast<int>(bytes.size()), CV_8UC1,
                       const_cast<std::uint8_t*>(bytes.data()));
  cv::Mat decoded;
  try {
    decoded = cv::imdecode(buffer, cv::IMREAD_COLOR);
  } catch (const cv::Exception& e) {
    throw InvalidInput(std::string("image decode failed: ") + e.what());
  }
  if (decoded.empty()) throw InvalidInput("image decode failed");
  if (decoded.depth() != CV_8U || decoded.channels() != 3) {
    throw InvalidInput("decoded image is not 8-bit 3-channel");
  }
  std::vector<std::uint8_t> px(static_cast<std::size_t>(decoded.cols) * decoded.rows * 3);
  for (int y = 0; y < decoded.rows; ++y) {
    const auto* row = decoded.ptr<std::uint8_t>(y);
    auto* dst = px.data() + static_cast<std::size_t>(y) * decoded.cols * 3;
    for (int x = 0; x < decoded.cols; ++x) {
      // BGR -> RGB
      dst[3 * x + 0] = row[3 * x + 2];
      dst[3 * x + 1] = row[3 * x + 1];
      dst[3 * x + 2] = row[3 * x + 0];
    }
  }
  return ScreeningImage(decoded.cols, decoded.rows, std::move(px), std::move(source_id));
}

std::vector<std::uint8_t> encode_image(const ScreeningImage& image, ImageFormat format,
                                       int jpeg_quality) {
  cv::Mat bgr(image.height(), image.width(), CV_8UC3);
  for (int y = 0; y < image.height(); ++y) {
    auto* row = bgr.ptr<std::uint8_t>(y);
    for (int x = 0; x < image.width(); ++x) {
      row[3 * x + 0] = image.at(x, y, 2);
      row[3 * x + 1] = image.at(x, y, 1);
      row[3 * x + 2] = image.at(x, y, 0);
    }
  }
  std::vector<std::uint8_t> out;
  const bool ok = format == ImageFormat::png
                      ? cv::imencode(".png", bgr, out)
                      : cv::imencode(".jpg", bgr, out, {cv::IMWRITE_JPEG_QUALITY, jpeg_quality});
  if (!ok) throw Error("image encode failed");
  return out;
}

std::vector<std::uint8_t> read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open file: " + path);
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), {});
}

void write_file_bytes(const std::string& path, std::span<const std::uint8_t> bytes) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write file: " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("short write: " + path);
}

ScreeningImage load_image(const std::string& path) {
  const auto bytes = read_file_bytes(path);
  return decode_image(bytes, path);
}

void save_image(const ScreeningImage& image, const std::string& path) {
  const auto ext = std::filesystem::path(path).extension().string();
  const bool jpeg = ext == ".jpg" || ext == ".jpeg" || ext == ".JPG" || ext == ".JPEG";
  write_file_bytes(path, encode_image(image, jpeg ? ImageFormat::jpeg : ImageFormat::png));
}

}  // namespace skinscreen
