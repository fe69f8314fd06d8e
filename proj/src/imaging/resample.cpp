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
#include <array>
#include <cmath>

#include "skinscreen/errors.hpp"
#include "skinscreen/imaging.hpp"
#include "skinscreen/simd.hpp"

namespace skinscreen {
namespace {

struct Tap {
  int lo = 0;
  int hi = 0;
  float t = 0.0f;
};

// Pixel-centre aligned source coordinate for each destination index.
std::vector<Tap> linear_taps(int src_len, int dst_len) {
  std::vector<Tap> taps(static_cast<std::size_t>(dst_len));
  const double scale = static_cast<double>(src_len) / dst_len;
  for (int i = 0; i < dst_len; ++i) {
    double s = (i + 0.5) * scale - 0.5;
    s = std::clamp(s, 0.0, static_cast<double>(src_len - 1));
    const int lo = static_cast<int>(std::floor(s));
    const int hi = std::min(lo + 1, src_len - 1);
    taps[static_cast<std::size_t>(i)] = Tap{lo, hi, static_cast<float>(s - lo)};
  }
  return taps;
}

std::uint8_t to_u8(float v) {
  if (!(v > 0.0f)) return 0;
  if (v >= 255.0f) return 255;
  return static_cast<std::uint8_t>(v + 0.5f);
}

void check_target(int target_w, int target_h) {
  if (target_w < 1 || target_h < 1) throw InvalidInput("resize target must be at least 1x1");
}

float cubic_weight(float x) {
  constexpr float a = -0.5f;
  x = std::fabs(x);
  if (x <= 1.0f) return ((a + 2.0f) * x - (a + 3.0f)) * x * x + 1.0f;
  if (x < 2.0f) return ((a * x - 5.0f * a) * x + 8.0f * a) * x - 4.0f * a;
  return 0.0f;
}

}  // namespace

ScreeningImage resize(const ScreeningImage& image, int target_w, int target_h) {
  check_target(target_w, target_h);
  if (target_w == image.width() && target_h == image.height()) return image;

  const auto& k = simd::kernels();
  const int src_w = image.width();
  const std::size_t row_len = static_cast<std::size_t>(src_w) * 3;
  const auto xs = linear_taps(src_w, target_w);
  const auto ys = linear_taps(image.height(), target_h);

  std::vector<float> row_lo(row_len), row_hi(row_len), blended(row_len);
  int cached_lo = -1, cached_hi = -1;
  auto load_row = [&](int y, std::vector<float>& dst) {
    k.u8_to_f32(image.pixels().data() + static_cast<std::size_t>(y) * row_len, dst.data(), row_len);
  };

  std::vector<std::uint8_t> out(static_cast<std::size_t>(target_w) * target_h * 3);
  for (int oy = 0; oy < target_h; ++oy) {
    const Tap ty = ys[static_cast<std::size_t>(oy)];
    if (ty.lo != cached_lo) {
      if (ty.lo == cached_hi) {
        std::swap(row_lo, row_hi);
        cached_hi = -1;
      } else {
        load_row(ty.lo, row_lo);
      }
      cached_lo = ty.lo;
    }
    if (ty.hi != cached_hi) {
      load_row(ty.hi, row_hi);
      cached_hi = ty.hi;
    }
    k.lerp(row_lo.data(), row_hi.data(), ty.t, blended.data(), row_len);

    std::uint8_t* dst = out.data() + static_cast<std::size_t>(oy) * target_w * 3;
    for (int ox = 0; ox < target_w; ++ox) {
      const Tap tx = xs[static_cast<std::size_t>(ox)];
      const float s = 1.0f - tx.t;
      for (int c = 0; c < 3; ++c) {
        const float v = blended[static_cast<std::size_t>(tx.lo) * 3 + c] * s +
                        blended[static_cast<std::size_t>(tx.hi) * 3 + c] * tx.t;
        dst[ox * 3 + c] = to_u8(v);
      }
    }
  }
  return ScreeningImage(target_w, target_h, std::move(out), image.source_id());
}

ScreeningImage resize_bicubic(const ScreeningImage& image, int target_w, int target_h) {
  check_target(target_w, target_h);
  if (target_w == image.width() && target_h == image.height()) return image;

  const int src_w = image.width();
  const int src_h = image.height();
  struct CubicTaps {
    std::array<int, 4> idx;
    std::array<float, 4> w;
  };
  auto make_taps = [](int src_len, int dst_len) {
    std::vector<CubicTaps> taps(static_cast<std::size_t>(dst_len));
    const double scale = static_cast<double>(src_len) / dst_len;
    for (int i = 0; i < dst_len; ++i) {
      const double s = (i + 0.5) * scale - 0.5;
      const int base = static_cast<int>(std::floor(s));
      const float frac = static_cast<float>(s - base);
      auto& t = taps[static_cast<std::size_t>(i)];
      for (int j = 0; j < 4; ++j) {
        t.idx[static_cast<std::size_t>(j)] = std::clamp(base - 1 + j, 0, src_len - 1);
        t.w[static_cast<std::size_t>(j)] = cubic_weight(frac - static_cast<float>(j - 1));
      }
    }
    return taps;
  };
  const auto xs = make_taps(src_w, target_w);
  const auto ys = make_taps(src_h, target_h);

  // Horizontal pass into float rows, then vertical.
  std::vector<float> horiz(static_cast<std::size_t>(src_h) * target_w * 3);
  for (int y = 0; y < src_h; ++y) {
    for (int ox = 0; ox < target_w; ++ox) {
      const auto& t = xs[static_cast<std::size_t>(ox)];
      for (int c = 0; c < 3; ++c) {
        float acc = 0.0f;
        for (std::size_t j = 0; j < 4; ++j) acc += t.w[j] * image.at(t.idx[j], y, c);
        horiz[(static_cast<std::size_t>(y) * target_w + ox) * 3 + c] = acc;
      }
    }
  }
  std::vector<std::uint8_t> out(static_cast<std::size_t>(target_w) * target_h * 3);
  const std::size_t row_len = static_cast<std::size_t>(target_w) * 3;
  for (int oy = 0; oy < target_h; ++oy) {
    const auto& t = ys[static_cast<std::size_t>(oy)];
    for (std::size_t i = 0; i < row_len; ++i) {
      float acc = 0.0f;
      for (std::size_t j = 0; j < 4; ++j) {
        acc += t.w[j] * horiz[static_cast<std::size_t>(t.idx[j]) * row_len + i];
      }
      out[static_cast<std::size_t>(oy) * row_len + i] = to_u8(acc);
    }
  }
  return ScreeningImage(target_w, target_h, std::move(out), image.source_id());
}

ScreeningImage resize_area(const ScreeningImage& image, int target_w, int target_h) {
  check_target(target_w, target_h);
  if (target_w > image.width() || target_h > image.height()) {
    throw InvalidInput("area resampling only reduces image size");
  }
  if (target_w == image.width() && target_h == image.height()) return image;

  struct Span {
    int first = 0;
    std::vector<float> w;
  };
  auto make_spans = [](int src_len, int dst_len) {
    std::vector<Span> spans(static_cast<std::size_t>(dst_len));
    const double scale = static_cast<double>(src_len) / dst_len;
    for (int i = 0; i < dst_len; ++i) {
      const double lo = i * scale;
      const double hi = (i + 1) * scale;
      auto& sp = spans[static_cast<std::size_t>(i)];
      sp.first = static_cast<int>(std::floor(lo));
      const int last = std::min(src_len - 1, static_cast<int>(std::ceil(hi)) - 1);
      for (int s = sp.first; s <= last; ++s) {
        const double overlap = std::min<double>(hi, s + 1) - std::max<double>(lo, s);
        sp.w.push_back(static_cast<float>(overlap / scale));
      }
    }
    return spans;
  };
  const auto xs = make_spans(image.width(), target_w);
  const auto ys = make_spans(image.height(), target_h);

  const auto& k = simd::kernels();
  const std::size_t src_row = static_cast<std::size_t>(image.width()) * 3;
  std::vector<float> row(src_row), acc(src_row);
  std::vector<std::uint8_t> out(static_cast<std::size_t>(target_w) * target_h * 3);
  for (int oy = 0; oy < target_h; ++oy) {
    const auto& sy = ys[static_cast<std::size_t>(oy)];
    std::fill(acc.begin(), acc.end(), 0.0f);
    for (std::size_t j = 0; j < sy.w.size(); ++j) {
      k.u8_to_f32(image.pixels().data() + (static_cast<std::size_t>(sy.first) + j) * src_row, row.data(), src_row);
      k.axpy(sy.w[j], row.data(), acc.data(), src_row);
    }
    std::uint8_t* dst = out.data() + static_cast<std::size_t>(oy) * target_w * 3;
    for (int ox = 0; ox < target_w; ++ox) {
      const auto& sx = xs[static_cast<std::size_t>(ox)];
      for (int c = 0; c < 3; ++c) {
        float v = 0.0f;
        for (std::size_t j = 0; j < sx.w.size(); ++j) {
          v += sx.w[j] * acc[(static_cast<std::size_t>(sx.first) + j) * 3 + c];
        }
        dst[ox * 3 + c] = to_u8(v);
      }
    }
  }
  return ScreeningImage(target_w, target_h, std::move(out), image.source_id());
}

ScreeningImage resize_for_model(const ScreeningImage& image, int target_w, int target_h) {
  if (target_w <= image.width() && target_h <= image.height()) return resize_area(image, target_w, target_h);
  return resize(image, target_w, target_h);
}

BinaryMask resize_nearest(const BinaryMask& mask, int target_w, int target_h) {
  check_target(target_w, target_h);
  if (mask.cell_count() == 0) throw InvalidInput("cannot resample an empty mask");
  if (target_w == mask.width() && target_h == mask.height()) return mask;
  BinaryMask out(target_w, target_h, false);
  const double sx = static_cast<double>(mask.width()) / target_w;
  const double sy = static_cast<double>(mask.height()) / target_h;
  for (int y = 0; y < target_h; ++y) {
    const int src_y = std::min(static_cast<int>((y + 0.5) * sy), mask.height() - 1);
    for (int x = 0; x < target_w; ++x) {
      const int src_x = std::min(static_cast<int>((x + 0.5) * sx), mask.width() - 1);
      out.set(x, y, mask.at(src_x, src_y));
    }
  }
  return out;
}

}  // namespace skinscreen
