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

#include <cmath>

#include "skinscreen/errors.hpp"
#include "skinscreen/nn.hpp"

namespace skinscreen::nn {

Adam::Adam(std::vector<Parameter*> params, Options options)
    : params_(std::move(params)), options_(options) {
  m_.reserve(params_.size());
  v_.reserve(params_.size());
  for (auto* p : params_) {
    m_.emplace_back(p->value.shape());
    v_.emplace_back(p->value.shape());
  }
}

void Adam::step() {
  ++step_;
  const double bc1 = 1.0 - std::pow(static_cast<double>(options_.beta1), static_cast<double>(step_));
  const double bc2 = 1.0 - std::pow(static_cast<double>(options_.beta2), static_cast<double>(step_));
  const auto step_size = static_cast<float>(options_.learning_rate * std::sqrt(bc2) / bc1);
  const float eps_hat = options_.epsilon;
  const float b1 = options_.beta1, b2 = options_.beta2;
  for (std::size_t i = 0; i < params_.size(); ++i) {
    auto& p = *params_[i];
    float* m = m_[i].data();
    float* v = v_[i].data();
    float* w = p.value.data();
    const float* g = p.grad.data();
    for (std::size_t j = 0; j < p.value.size(); ++j) {
      m[j] = b1 * m[j] + (1.0f - b1) * g[j];
      v[j] = b2 * v[j] + (1.0f - b2) * g[j] * g[j];
      w[j] -= step_size * m[j] / (std::sqrt(v[j]) + eps_hat);
    }
  }
}

void Adam::zero_grad() {
  for (auto* p : params_) p->grad.fill(0.0f);
}

std::vector<float> collect_state(Layer& layer) {
  std::vector<float> out;
  for (auto* p : layer.parameters()) out.insert(out.end(), p->value.values().begin(), p->value.values().end());
  for (auto* b : layer.buffers()) out.insert(out.end(), b->values().begin(), b->values().end());
  return out;
}

void restore_state(Layer& layer, std::span<const float> state) {
  std::size_t expected = 0;
  auto params = layer.parameters();
  auto buffers = layer.buffers();
  for (auto* p : params) expected += p->value.size();
  for (auto* b : buffers) expected += b->size();
  if (expected != state.size()) {
    throw LoadError("weight blob holds " + std::to_string(state.size()) + " values, model expects " +
                    std::to_string(expected));
  }
  std::size_t off = 0;
  for (auto* p : params) {
    std::copy_n(state.begin() + static_cast<std::ptrdiff_t>(off), p->value.size(), p->value.data());
    off += p->value.size();
  }
  for (auto* b : buffers) {
    std::copy_n(state.begin() + static_cast<std::ptrdiff_t>(off), b->size(), b->data());
    off += b->size();
  }
}

std::size_t trainable_parameter_count(Layer& layer) {
  std::size_t n = 0;
  for (auto* p : layer.parameters()) n += p->value.size();
  return n;
}

}  // namespace skinscreen::nn
