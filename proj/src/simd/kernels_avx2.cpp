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

#include <immintrin.h>

#include "skinscreen/simd.hpp"

namespace skinscreen::simd {
namespace {

inline float hsum(__m256 v) {
  __m128 lo = _mm256_castps256_ps128(v);
  __m128 hi = _mm256_extractf128_ps(v, 1);
  lo = _mm_add_ps(lo, hi);
  __m128 shuf = _mm_movehdup_ps(lo);
  __m128 sums = _mm_add_ps(lo, shuf);
  shuf = _mm_movehl_ps(shuf, sums);
  sums = _mm_add_ss(sums, shuf);
  return _mm_cvtss_f32(sums);
}

std::size_t count_zero(const std::uint8_t* bits, std::size_t n) {
  std::size_t zeros = 0;
  std::size_t i = 0;
  const __m256i zero = _mm256_setzero_si256();
  for (; i + 32 <= n; i += 32) {
    const __m256i v = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(bits + i));
    const auto eq = static_cast<std::uint32_t>(_mm256_movemask_epi8(_mm256_cmpeq_epi8(v, zero)));
    zeros += static_cast<std::size_t>(__builtin_popcount(eq));
  }
  for (; i < n; ++i) zeros += bits[i] == 0 ? 1 : 0;
  return zeros;
}

void mask_rgb(const std::uint8_t* rgb, const std::uint8_t* mask, std::uint8_t* out,
              std::size_t pixels) {
  std::size_t p = 0;
  // 16 pixels = 48 bytes per iteration, processed as three 16-byte blocks.
  const __m128i zero = _mm_setzero_si128();
  const __m128i sel0 = _mm_setr_epi8(0, 0, 0, 1, 1, 1, 2, 2, 2, 3, 3, 3, 4, 4, 4, 5);
  const __m128i sel1 = _mm_setr_epi8(5, 5, 6, 6, 6, 7, 7, 7, 8, 8, 8, 9, 9, 9, 10, 10);
  const __m128i sel2 = _mm_setr_epi8(10, 11, 11, 11, 12, 12, 12, 13, 13, 13, 14, 14, 14, 15, 15, 15);
  for (; p + 16 <= pixels; p += 16) {
    const __m128i m = _mm_loadu_si128(reinterpret_cast<const __m128i*>(mask + p));
    // 0xFF where mask != 0.
    const __m128i keep = _mm_xor_si128(_mm_cmpeq_epi8(m, zero), _mm_set1_epi8(-1));
    const std::uint8_t* src = rgb + 3 * p;
    std::uint8_t* dst = out + 3 * p;
    const __m128i k0 = _mm_shuffle_epi8(keep, sel0);
    const __m128i k1 = _mm_shuffle_epi8(keep, sel1);
    const __m128i k2 = _mm_shuffle_epi8(keep, sel2);
    _mm_storeu_si128(reinterpret_cast<__m128i*>(dst),
                     _mm_and_si128(_mm_loadu_si128(reinterpret_cast<const __m128i*>(src)), k0));
    _mm_storeu_si128(reinterpret_cast<__m128i*>(dst + 16),
                     _mm_and_si128(_mm_loadu_si128(reinterpret_cast<const __m128i*>(src + 16)), k1));
    _mm_storeu_si128(reinterpret_cast<__m128i*>(dst + 32),
                     _mm_and_si128(_mm_loadu_si128(reinterpret_cast<const __m128i*>(src + 32)), k2));
  }
  for (; p < pixels; ++p) {
    const std::uint8_t keep = mask[p] != 0 ? 0xFF : 0x00;
    out[3 * p + 0] = rgb[3 * p + 0] & keep;
    out[3 * p + 1] = rgb[3 * p + 1] & keep;
    out[3 * p + 2] = rgb[3 * p + 2] & keep;
  }
}

void u8_to_f32(const std::uint8_t* in, float* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m128i bytes = _mm_loadl_epi64(reinterpret_cast<const __m128i*>(in + i));
    _mm256_storeu_ps(out + i, _mm256_cvtepi32_ps(_mm256_cvtepu8_epi32(bytes)));
  }
  for (; i < n; ++i) out[i] = static_cast<float>(in[i]);
}

void lerp(const float* a, const float* b, float t, float* out, std::size_t n) {
  const float s = 1.0f - t;
  const __m256 vs = _mm256_set1_ps(s);
  const __m256 vt = _mm256_set1_ps(t);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256 va = _mm256_mul_ps(_mm256_loadu_ps(a + i), vs);
    const __m256 vb = _mm256_mul_ps(_mm256_loadu_ps(b + i), vt);
    _mm256_storeu_ps(out + i, _mm256_add_ps(va, vb));
  }
  for (; i < n; ++i) out[i] = a[i] * s + b[i] * t;
}

float dot(const float* x, const float* y, std::size_t n) {
  __m256 acc0 = _mm256_setzero_ps();
  __m256 acc1 = _mm256_setzero_ps();
  std::size_t i = 0;
  for (; i + 16 <= n; i += 16) {
    acc0 = _mm256_fmadd_ps(_mm256_loadu_ps(x + i), _mm256_loadu_ps(y + i), acc0);
    acc1 = _mm256_fmadd_ps(_mm256_loadu_ps(x + i + 8), _mm256_loadu_ps(y + i + 8), acc1);
  }
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_ps(_mm256_loadu_ps(x + i), _mm256_loadu_ps(y + i), acc0);
  }
  float acc = hsum(_mm256_add_ps(acc0, acc1));
  for (; i < n; ++i) acc += x[i] * y[i];
  return acc;
}

void axpy(float alpha, const float* x, float* y, std::size_t n) {
  const __m256 va = _mm256_set1_ps(alpha);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256 prod = _mm256_mul_ps(va, _mm256_loadu_ps(x + i));
    _mm256_storeu_ps(y + i, _mm256_add_ps(_mm256_loadu_ps(y + i), prod));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void scale_shift(const float* x, float alpha, float beta, float* y, std::size_t n) {
  const __m256 va = _mm256_set1_ps(alpha);
  const __m256 vb = _mm256_set1_ps(beta);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    _mm256_storeu_ps(y + i, _mm256_add_ps(_mm256_mul_ps(va, _mm256_loadu_ps(x + i)), vb));
  }
  for (; i < n; ++i) y[i] = alpha * x[i] + beta;
}

float sum(const float* x, std::size_t n) {
  __m256 acc = _mm256_setzero_ps();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) acc = _mm256_add_ps(acc, _mm256_loadu_ps(x + i));
  float total = hsum(acc);
  for (; i < n; ++i) total += x[i];
  return total;
}

void relu(const float* x, float* y, std::size_t n) {
  const __m256 zero = _mm256_setzero_ps();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    // maxps returns its second operand on NaN or equal inputs, matching the scalar ternary.
    _mm256_storeu_ps(y + i, _mm256_max_ps(_mm256_loadu_ps(x + i), zero));
  }
  for (; i < n; ++i) y[i] = x[i] > 0.0f ? x[i] : 0.0f;
}

}  // namespace

const KernelTable& avx2_kernels() {
  static const KernelTable table{
      "avx2", count_zero, mask_rgb, u8_to_f32, lerp, dot, axpy, scale_shift, sum, relu,
  };
  return table;
}

}  // namespace skinscreen::simd
