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

#include "skinscreen/simd.hpp"

namespace skinscreen::simd {
namespace {

std::size_t count_zero(const std::uint8_t* bits, std::size_t n) {
  std::size_t zeros = 0;
  for (std::size_t i = 0; i < n; ++i) zeros += bits[i] == 0 ? 1 : 0;
  return zeros;
}

void mask_rgb(const std::uint8_t* rgb, const std::uint8_t* mask, std::uint8_t* out,
              std::size_t pixels) {
  for (std::size_t p = 0; p < pixels; ++p) {
    const std::uint8_t keep = mask[p] != 0 ? 0xFF : 0x00;
    out[3 * p + 0] = rgb[3 * p + 0] & keep;
    out[3 * p + 1] = rgb[3 * p + 1] & keep;
    out[3 * p + 2] = rgb[3 * p + 2] & keep;
  }
}

void u8_to_f32(const std::uint8_t* in, float* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = static_cast<float>(in[i]);
}

void lerp(const float* a, const float* b, float t, float* out, std::size_t n) {
  const float s = 1.0f - t;
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * s + b[i] * t;
}

float dot(const float* x, const float* y, std::size_t n) {
  float acc = 0.0f;
  for (std::size_t i = 0; i < n; ++i) acc += x[i] * y[i];
  return acc;
}

void axpy(float alpha, const float* x, float* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void scale_shift(const float* x, float alpha, float beta, float* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = alpha * x[i] + beta;
}

float sum(const float* x, std::size_t n) {
  float acc = 0.0f;
  for (std::size_t i = 0; i < n; ++i) acc += x[i];
  return acc;
}

void relu(const float* x, float* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = x[i] > 0.0f ? x[i] : 0.0f;
}

}  // namespace

const KernelTable& scalar_kernels() {
  static const KernelTable table{
      "scalar", count_zero, mask_rgb, u8_to_f32, lerp, dot, axpy, scale_shift, sum, relu,
  };
  return table;
}

}  // namespace skinscreen::simd
