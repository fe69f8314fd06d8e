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

// Runtime-dispatched arithmetic kernels. Every entry has a scalar reference
// implementation; vector variants must match it bit-for-bit for elementwise
// and integer kernels, and within float reassociation error for reductions.

#include <cstddef>
#include <cstdint>
#include <string_view>

namespace skinscreen::simd {

struct KernelTable {
  std::string_view name;

  // Number of zero bytes in [bits, bits + n).
  std::size_t (*count_zero)(const std::uint8_t* bits, std::size_t n);
  // Interleaved RGB: out = rgb where mask != 0, else 0.
  void (*mask_rgb)(const std::uint8_t* rgb, const std::uint8_t* mask, std::uint8_t* out,
                   std::size_t pixels);
  void (*u8_to_f32)(const std::uint8_t* in, float* out, std::size_t n);
  // out = a * (1 - t) + b * t
  void (*lerp)(const float* a, const float* b, float t, float* out, std::size_t n);

  float (*dot)(const float* x, const float* y, std::size_t n);
  // y += alpha * x
  void (*axpy)(float alpha, const float* x, float* y, std::size_t n);
  // y = alpha * x + beta
  void (*scale_shift)(const float* x, float alpha, float beta, float* y, std::size_t n);
  float (*sum)(const float* x, std::size_t n);
  void (*relu)(const float* x, float* y, std::size_t n);
};

const KernelTable& scalar_kernels();
#if defined(SKINSCREEN_HAVE_AVX2)
const KernelTable& avx2_kernels();
#endif

bool cpu_has_avx2();

// The table in use. Chosen once: AVX2 when the CPU supports it unless the
// SKINSCREEN_SIMD environment variable is set to "scalar".
const KernelTable& kernels();

// Overrides the active table (tests and benchmarks).
void set_kernels(const KernelTable& table);

}  // namespace skinscreen::simd
