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
#include <numbers>
#include <random>
#include <sstream>

#include "skinscreen/dataset.hpp"
#include "skinscreen/errors.hpp"

namespace skinscreen {
namespace {

std::uint8_t clamp_u8(double v) {
  return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
}

double snap(double v) {
  const double r = std::round(v);
  return std::fabs(v - r) < 1e-9 ? r : v;
}

// Counter-clockwise rotation about the image centre, bilinear sampling,
// black outside the source.
ScreeningImage rotate(const ScreeningImage& image, double degrees) {
  const int w = image.width();
  const int h = image.height();
  const double theta = degrees * std::numbers::pi / 180.0;
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  const double cx = (w - 1) / 2.0;
  const double cy = (h - 1) / 2.0;
  std::vector<std::uint8_t> out(image.pixels().size(), 0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double ox = x - cx;
      const double oy = y - cy;
      const double sx = snap(cx + c * ox - s * oy);
      const double sy = snap(cy + s * ox + c * oy);
      if (sx < -0.5 || sy < -0.5 || sx > w - 0.5 || sy > h - 0.5) continue;
      const double fx = std::clamp(sx, 0.0, static_cast<double>(w - 1));
      const double fy = std::clamp(sy, 0.0, static_cast<double>(h - 1));
      const int x0 = static_cast<int>(std::floor(fx));
      const int y0 = static_cast<int>(std::floor(fy));
      const int x1 = std::min(x0 + 1, w - 1);
      const int y1 = std::min(y0 + 1, h - 1);
      const double tx = fx - x0;
      const double ty = fy - y0;
      for (int ch = 0; ch < 3; ++ch) {
        const double top = image.at(x0, y0, ch) * (1 - tx) + image.at(x1, y0, ch) * tx;
        const double bottom = image.at(x0, y1, ch) * (1 - tx) + image.at(x1, y1, ch) * tx;
        out[(static_cast<std::size_t>(y) * w + x) * 3 + ch] = clamp_u8(top * (1 - ty) + bottom * ty);
      }
    }
  }
  return ScreeningImage(w, h, std::move(out), image.source_id());
}

ScreeningImage translate(const ScreeningImage& image, double dx, double dy) {
  const int w = image.width();
  const int h = image.height();
  const long shift_x = std::lround(dx * w);
  const long shift_y = std::lround(dy * h);
  std::vector<std::uint8_t> out(image.pixels().size(), 0);
  for (int y = 0; y < h; ++y) {
    const long sy = y - shift_y;
    if (sy < 0 || sy >= h) continue;
    for (int x = 0; x < w; ++x) {
      const long sx = x - shift_x;
      if (sx < 0 || sx >= w) continue;
      for (int ch = 0; ch < 3; ++ch) {
        out[(static_cast<std::size_t>(y) * w + x) * 3 + ch] =
            image.at(static_cast<int>(sx), static_cast<int>(sy), ch);
      }
    }
  }
  return ScreeningImage(w, h, std::move(out), image.source_id());
}

ScreeningImage add_noise(const ScreeningImage& image, double variance, std::uint64_t seed) {
  if (variance == 0.0) return image;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, std::sqrt(variance) * 255.0);
  std::vector<std::uint8_t> out(image.pixels().begin(), image.pixels().end());
  for (auto& v : out) v = clamp_u8(v + noise(rng));
  return ScreeningImage(image.width(), image.height(), std::move(out), image.source_id());
}

ScreeningImage shift_channels(const ScreeningImage& image, const std::array<double, 3>& shift) {
  std::array<long, 3> delta{};
  for (std::size_t c = 0; c < 3; ++c) delta[c] = std::lround(shift[c] * 255.0);
  std::vector<std::uint8_t> out(image.pixels().begin(), image.pixels().end());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = clamp_u8(static_cast<double>(out[i] + delta[i % 3]));
  return ScreeningImage(image.width(), image.height(), std::move(out), image.source_id());
}

}  // namespace

void TransformDescriptor::validate() const {
  auto fail = [](const std::string& what) { throw InvalidTransform(what); };
  auto finite = [](double v) { return std::isfinite(v); };
  if (!finite(rotation_deg) || std::fabs(rotation_deg) > TransformBounds::max_rotation_deg) {
    // 90 degree rotations are exact pixel permutations and are allowed as
    // well; they carry no resampling loss.
    if (!(finite(rotation_deg) && std::fmod(std::fabs(rotation_deg), 90.0) == 0.0)) {
      std::ostringstream msg;
      msg << "rotation " << rotation_deg << " deg outside [-" << TransformBounds::max_rotation_deg
          << ", " << TransformBounds::max_rotation_deg << "]";
      fail(msg.str());
    }
  }
  if (!finite(dx) || !finite(dy) || std::fabs(dx) > TransformBounds::max_translation ||
      std::fabs(dy) > TransformBounds::max_translation) {
    fail("translation exceeds 20% of the image side");
  }
  if (!finite(noise_variance) || noise_variance < 0.0 ||
      noise_variance > TransformBounds::max_noise_variance) {
    fail("noise variance outside [0, 0.05]");
  }
  for (double s : channel_shift) {
    if (!finite(s) || std::fabs(s) > TransformBounds::max_channel_shift + 1e-12) {
      fail("channel shift exceeds 20/255");
    }
  }
}

ScreeningImage augment(const ScreeningImage& image, const TransformDescriptor& t) {
  t.validate();
  switch (t.kind) {
    case TransformKind::rotation: return t.rotation_deg == 0.0 ? image : rotate(image, t.rotation_deg);
    case TransformKind::translation: return translate(image, t.dx, t.dy);
    case TransformKind::noise_injection: return add_noise(image, t.noise_variance, t.seed);
    case TransformKind::color_space_shift: return shift_channels(image, t.channel_shift);
  }
  return image;
}

TransformDescriptor draw_transform(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto uniform = [&rng](double lo, double hi) {
    return lo + (hi - lo) * std::generate_canonical<double, 53>(rng);
  };
  TransformDescriptor t;
  t.kind = static_cast<TransformKind>(rng() % 4);
  switch (t.kind) {
    case TransformKind::rotation:
      t.rotation_deg = uniform(-TransformBounds::max_rotation_deg, TransformBounds::max_rotation_deg);
      break;
    case TransformKind::translation:
      t.dx = uniform(-TransformBounds::max_translation, TransformBounds::max_translation);
      t.dy = uniform(-TransformBounds::max_translation, TransformBounds::max_translation);
      break;
    case TransformKind::noise_injection:
      t.noise_variance = uniform(0.0, TransformBounds::max_noise_variance);
      break;
    case TransformKind::color_space_shift:
      for (auto& s : t.channel_shift) {
        s = uniform(-TransformBounds::max_channel_shift, TransformBounds::max_channel_shift);
      }
      break;
  }
  t.seed = rng();
  return t;
}

}  // namespace skinscreen
