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

#include <doctest.h>

#include <random>

#include "skinscreen/errors.hpp"
#include "skinscreen/imaging.hpp"
#include "synthetic.hpp"

using namespace skinscreen;

namespace {

ScreeningImage random_image(int w, int h, std::mt19937& rng) {
  std::uniform_int_distribution<int> d(0, 255);
  std::vector<std::uint8_t> px(static_cast<std::size_t>(w) * h * 3);
  for (auto& p : px) p = static_cast<std::uint8_t>(d(rng));
  return ScreeningImage(w, h, std::move(px));
}

BinaryMask random_mask(int w, int h, std::mt19937& rng, double keep = 0.5) {
  std::bernoulli_distribution d(keep);
  BinaryMask m(w, h, false);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) m.set(x, y, d(rng));
  }
  return m;
}

bool is_uniform(const ScreeningImage& img, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      if (img.at(x, y, 0) != r || img.at(x, y, 1) != g || img.at(x, y, 2) != b) return false;
    }
  }
  return true;
}

}  // namespace

TEST_SUITE("imaging") {
  TEST_CASE("image construction enforces invariants") {
    CHECK_THROWS_AS(ScreeningImage(0, 4, {}), InvalidInput);
    CHECK_THROWS_AS(ScreeningImage(2, 2, std::vector<std::uint8_t>(11)), InvalidInput);
    const ScreeningImage img(2, 1, {1, 2, 3, 4, 5, 6}, "src");
    CHECK(img.at(1, 0, 2) == 6);
    CHECK(img.source_id() == "src");
    CHECK(ScreeningImage::color_space() == "sRGB");
  }

  TEST_CASE("blackout_fraction examples") {
    CHECK(blackout_fraction(BinaryMask(10, 10, true)) == 0.0);
    CHECK(blackout_fraction(BinaryMask(10, 10, false)) == 1.0);
    BinaryMask m(10, 10, true);
    for (int i = 0; i < 90; ++i) m.set(i % 10, i / 10, false);
    CHECK(blackout_fraction(m) == doctest::Approx(0.90).epsilon(1e-12));
    CHECK_THROWS_AS(blackout_fraction(BinaryMask{}), InvalidInput);
  }

  TEST_CASE("blackout and foreground shares sum to one") {
    std::mt19937 rng(5);
    for (int t = 0; t < 200; ++t) {
      const int w = 1 + static_cast<int>(rng() % 40);
      const int h = 1 + static_cast<int>(rng() % 40);
      const auto m = random_mask(w, h, rng, (rng() % 100) / 100.0);
      const double fg = static_cast<double>(m.foreground_count()) / static_cast<double>(m.cell_count());
      CHECK(blackout_fraction(m) + fg == 1.0);
    }
  }

  TEST_CASE("apply_mask examples") {
    std::mt19937 rng(1);
    const auto img = random_image(7, 5, rng);
    CHECK(apply_mask(img, BinaryMask(7, 5, true)) == img);
    CHECK(is_uniform(apply_mask(img, BinaryMask(7, 5, false)), 0, 0, 0));

    const ScreeningImage small(2, 2, {10, 20, 30, 40, 50, 60, 70, 80, 90, 100, 110, 120});
    BinaryMask only_origin(2, 2, false);
    only_origin.set(0, 0, true);
    const auto out = apply_mask(small, only_origin);
    CHECK(out == ScreeningImage(2, 2, {10, 20, 30, 0, 0, 0, 0, 0, 0, 0, 0, 0}));

    CHECK_THROWS_AS(apply_mask(img, BinaryMask(5, 7, true)), InvalidInput);
  }

  TEST_CASE("apply_mask is idempotent and preserves foreground") {
    std::mt19937 rng(9);
    for (int t = 0; t < 100; ++t) {
      const int w = 1 + static_cast<int>(rng() % 50);
      const int h = 1 + static_cast<int>(rng() % 50);
      const auto img = random_image(w, h, rng);
      const auto m = random_mask(w, h, rng);
      const auto once = apply_mask(img, m);
      CHECK(apply_mask(once, m) == once);
      bool preserved = true;
      for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
          for (int c = 0; c < 3; ++c) {
            const auto expected = m.at(x, y) ? img.at(x, y, c) : 0;
            preserved = preserved && once.at(x, y, c) == expected;
          }
        }
      }
      CHECK(preserved);
    }
  }

  TEST_CASE("resize examples") {
    std::mt19937 rng(3);
    const auto img = random_image(224, 224, rng);
    CHECK(resize(img, 224, 224) == img);
    CHECK(is_uniform(resize(ScreeningImage::filled(448, 448, 128, 128, 128), 224, 224), 128, 128, 128));
    const auto up = resize(random_image(100, 80, rng), 224, 224);
    CHECK(up.width() == 224);
    CHECK(up.height() == 224);
    CHECK_THROWS_AS(resize(img, 0, 10), InvalidInput);
    CHECK_THROWS_AS(resize(img, 10, -1), InvalidInput);
  }

  TEST_CASE("resampling a constant image yields the same constant") {
    std::mt19937 rng(11);
    for (int t = 0; t < 40; ++t) {
      const int w = 1 + static_cast<int>(rng() % 300);
      const int h = 1 + static_cast<int>(rng() % 300);
      const int tw = 1 + static_cast<int>(rng() % 300);
      const int th = 1 + static_cast<int>(rng() % 300);
      const auto r = static_cast<std::uint8_t>(rng());
      const auto g = static_cast<std::uint8_t>(rng());
      const auto b = static_cast<std::uint8_t>(rng());
      const auto img = ScreeningImage::filled(w, h, r, g, b);
      CHECK(is_uniform(resize(img, tw, th), r, g, b));
      CHECK(is_uniform(resize_bicubic(img, tw, th), r, g, b));
      CHECK(is_uniform(resize_for_model(img, tw, th), r, g, b));
    }
  }

  TEST_CASE("area downscaling averages whole blocks") {
    const ScreeningImage img(2, 2, {0, 0, 0, 100, 100, 100, 200, 200, 200, 100, 100, 100});
    const auto out = resize_area(img, 1, 1);
    CHECK(out.at(0, 0, 0) == 100);
    CHECK_THROWS_AS(resize_area(img, 3, 1), InvalidInput);
  }

  TEST_CASE("nearest mask resampling keeps blocks") {
    BinaryMask m(2, 2, false);
    m.set(1, 0, true);
    const auto big = resize_nearest(m, 4, 4);
    CHECK(big.at(3, 0));
    CHECK(big.at(2, 1));
    CHECK_FALSE(big.at(0, 0));
    CHECK(blackout_fraction(big) == 0.75);
  }

  TEST_CASE("PNG round trip is lossless and JPEG decodes") {
    const auto img = testing::lesion_texture(Label::monkeypox, 3, 48);
    const auto png = encode_image(img, ImageFormat::png);
    CHECK(sniff_format(png) == ImageFormat::png);
    CHECK(decode_image(png) == img);
    const auto jpg = encode_image(img, ImageFormat::jpeg, 90);
    CHECK(sniff_format(jpg) == ImageFormat::jpeg);
    const auto back = decode_image(jpg);
    CHECK(back.width() == 48);
    CHECK(back.height() == 48);
    const std::string text = "not an image";
    const std::vector<std::uint8_t> bytes(text.begin(), text.end());
    CHECK_FALSE(sniff_format(bytes).has_value());
    CHECK_THROWS_AS(decode_image(bytes), InvalidInput);
  }

  TEST_CASE("SHA-256 known vectors") {
    CHECK(sha256_hex(std::string_view("abc")) ==
          "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(sha256_hex(std::string_view("")) ==
          "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  }

  TEST_CASE("stage decision naming") {
    auto d = StageDecision::not_requested(StageName::restoration);
    CHECK(d.display_name() == "restoration");
    CHECK_FALSE(d.applied);
    d.variant = "bicubic";
    CHECK(d.display_name() == "restoration+bicubic");
    CHECK(to_string(StageName::background_removal) == "background_removal");
    CHECK(to_string(StageReason::over_threshold) == "over_threshold");
  }
}
