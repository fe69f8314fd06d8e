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

#include <array>
#include <cmath>

#include "skinscreen/classifier.hpp"
#include "skinscreen/errors.hpp"

namespace skinscreen {
namespace {

struct StageLayout {
  int expand;
  int kernel;
  int stride;
  int in_filters;
  int out_filters;
  int repeats;
};

// Base (coefficient 1.0) inverted-bottleneck layout.
constexpr std::array<StageLayout, 7> kBaseStages{{
    {1, 3, 1, 32, 16, 1},
    {6, 3, 2, 16, 24, 2},
    {6, 5, 2, 24, 40, 2},
    {6, 3, 2, 40, 80, 3},
    {6, 5, 1, 80, 112, 3},
    {6, 5, 2, 112, 192, 4},
    {6, 3, 1, 192, 320, 1},
}};
constexpr int kStemFilters = 32;
constexpr int kHeadFilters = 1280;
constexpr float kBnEpsilon = 0.001f;

struct BuildContext {
  std::mt19937_64& rng;
  float bn_momentum;
};

void conv_bn_act(nn::Sequential& seq, const nn::Conv2dOptions& o, bool act, BuildContext& ctx) {
  seq.add(std::make_unique<nn::Conv2d>(o, ctx.rng));
  seq.add(std::make_unique<nn::BatchNorm>(o.out_channels, ctx.bn_momentum, kBnEpsilon));
  if (act) seq.add(std::make_unique<nn::ActivationLayer>(nn::Activation::silu));
}

nn::LayerPtr inverted_bottleneck(int in, int out, int expand, int kernel, int stride, BuildContext& ctx) {
  auto body = std::make_unique<nn::Sequential>();
  const int mid = in * expand;
  if (expand != 1) {
    conv_bn_act(*body, {in, mid, 1, 1, 0, false, false}, true, ctx);
  }
  conv_bn_act(*body, {mid, mid, kernel, stride, -1, true, false}, true, ctx);
  conv_bn_act(*body, {mid, out, 1, 1, 0, false, false}, false, ctx);
  if (stride == 1 && in == out) return std::make_unique<nn::Residual>(std::move(body));
  return body;
}

}  // namespace

int round_filters(int filters, double width_coefficient) {
  constexpr int divisor = 8;
  const double scaled = filters * width_coefficient;
  int rounded = std::max(divisor, static_cast<int>(scaled + divisor / 2.0) / divisor * divisor);
  if (rounded < 0.9 * scaled) rounded += divisor;
  return rounded;
}

int round_repeats(int repeats, double depth_coefficient) {
  return std::max(1, static_cast<int>(std::ceil(depth_coefficient * repeats)));
}

BackboneSpec BackboneSpec::preset(const std::string& name) {
  struct Coeffs {
    const char* name;
    double width, depth;
    int resolution;
  };
  // Width/depth coefficients of the standard family; inputs are resized to 224 here.
  static constexpr Coeffs table[] = {
      {"b0", 1.0, 1.0, 224}, {"b1", 1.0, 1.1, 224}, {"b2", 1.1, 1.2, 224}, {"b3", 1.2, 1.4, 224},
      {"b4", 1.4, 1.8, 224}, {"b5", 1.6, 2.2, 224}, {"b6", 1.8, 2.6, 224}, {"b7", 2.0, 3.1, 224},
  };
  if (name == "micro") return micro();
  for (const auto& c : table) {
    if (name == c.name) return BackboneSpec{c.name, c.width, c.depth, c.resolution, 7, 0.99};
  }
  throw InvalidInput("unknown backbone preset: " + name);
}

BackboneSpec BackboneSpec::micro() { return BackboneSpec{"micro", 0.25, 0.25, 224, 4, 0.9}; }

void BackboneSpec::validate() const {
  if (!(width_coefficient > 0.0) || !(depth_coefficient > 0.0)) {
    throw InvalidInput("backbone coefficients must be positive");
  }
  if (resolution < 32) throw InvalidInput("backbone resolution must be at least 32");
  if (stages < 1 || stages > static_cast<int>(kBaseStages.size())) {
    throw InvalidInput("backbone stage count must be in [1, 7]");
  }
  if (!(bn_momentum >= 0.0 && bn_momentum < 1.0)) throw InvalidInput("backbone bn_momentum must be in [0, 1)");
}

std::unique_ptr<nn::Sequential> build_backbone(const BackboneSpec& spec, std::mt19937_64& rng, int& features) {
  spec.validate();
  BuildContext ctx{rng, static_cast<float>(spec.bn_momentum)};
  auto net = std::make_unique<nn::Sequential>();
  const int stem = round_filters(kStemFilters, spec.width_coefficient);
  conv_bn_act(*net, {3, stem, 3, 2, 1, false, false}, true, ctx);
  int channels = stem;
  for (int s = 0; s < spec.stages; ++s) {
    const auto& st = kBaseStages[static_cast<std::size_t>(s)];
    const int out = round_filters(st.out_filters, spec.width_coefficient);
    const int repeats = round_repeats(st.repeats, spec.depth_coefficient);
    for (int r = 0; r < repeats; ++r) {
      net->add(inverted_bottleneck(channels, out, st.expand, st.kernel, r == 0 ? st.stride : 1, ctx));
      channels = out;
    }
  }
  features = round_filters(kHeadFilters, spec.width_coefficient);
  conv_bn_act(*net, {channels, features, 1, 1, 0, false, false}, true, ctx);
  net->add(std::make_unique<nn::GlobalAvgPool>());
  return net;
}

}  // namespace skinscreen
