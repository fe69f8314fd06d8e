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

#include "skinscreen/nn.hpp"
#include "skinscreen/simd.hpp"

namespace skinscreen::nn {

void gemm_nn(int m, int n, int k, const float* a, const float* b, float* c) {
  const auto& kern = simd::kernels();
  for (int i = 0; i < m; ++i) {
    float* c_row = c + static_cast<std::size_t>(i) * n;
    const float* a_row = a + static_cast<std::size_t>(i) * k;
    for (int p = 0; p < k; ++p) {
      const float alpha = a_row[p];
      if (alpha != 0.0f) kern.axpy(alpha, b + static_cast<std::size_t>(p) * n, c_row, static_cast<std::size_t>(n));
    }
  }
}

void gemm_nt(int m, int n, int k, const float* a, const float* b, float* c) {
  const auto& kern = simd::kernels();
  for (int i = 0; i < m; ++i) {
    const float* a_row = a + static_cast<std::size_t>(i) * k;
    float* c_row = c + static_cast<std::size_t>(i) * n;
    for (int j = 0; j < n; ++j) {
      c_row[j] += kern.dot(a_row, b + static_cast<std::size_t>(j) * k, static_cast<std::size_t>(k));
    }
  }
}

void gemm_tn(int m, int n, int k, const float* a, const float* b, float* c) {
  const auto& kern = simd::kernels();
  for (int p = 0; p < k; ++p) {
    const float* a_row = a + static_cast<std::size_t>(p) * m;
    const float* b_row = b + static_cast<std::size_t>(p) * n;
    for (int i = 0; i < m; ++i) {
      const float alpha = a_row[i];
      if (alpha != 0.0f) kern.axpy(alpha, b_row, c + static_cast<std::size_t>(i) * n, static_cast<std::size_t>(n));
    }
  }
}

}  // namespace skinscreen::nn
