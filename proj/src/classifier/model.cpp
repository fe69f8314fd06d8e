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
#include <cstring>
#include <sstream>

#include "skinscreen/classifier.hpp"
#include "skinscreen/errors.hpp"
#include "skinscreen/simd.hpp"

namespace skinscreen {
namespace {

// ImageNet channel statistics on the [0,1] scale.
constexpr std::array<float, 3> kMean{0.485f, 0.456f, 0.406f};
constexpr std::array<float, 3> kStd{0.229f, 0.224f, 0.225f};

}  // namespace

void HeadSpec::validate() const {
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) throw InvalidInput("dropout rate must be in [0, 1)");
  if (classes != 2) throw InvalidInput("the classifier head is binary (classes = 2)");
  if (dense_units < 1) throw InvalidInput("dense_units must be positive");
  if (!(bn_momentum >= 0.0 && bn_momentum < 1.0)) throw InvalidInput("bn momentum must be in [0, 1)");
  if (!(bn_epsilon > 0.0)) throw InvalidInput("bn epsilon must be positive");
  if (kernel_l2 < 0.0 || activity_l1 < 0.0 || bias_l1 < 0.0) {
    throw InvalidInput("regularisation factors must be non-negative");
  }
}

void TrainConfig::validate() const {
  if (batch_size < 1) throw InvalidInput("batch_size must be >= 1");
  if (!(learning_rate > 0.0)) throw InvalidInput("learning_rate must be > 0");
  if (!(lr_decay > 0.0 && lr_decay <= 1.0)) throw InvalidInput("lr_decay must be in (0, 1]");
  if (epochs < 1) throw InvalidInput("epochs must be >= 1");
  if (input_size < 32) throw InvalidInput("input_size must be >= 32");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw InvalidInput("momentum must be in [0, 1)");
}

int steps_per_epoch(std::size_t examples, int batch_size) {
  if (batch_size < 1) throw InvalidInput("batch_size must be >= 1");
  return static_cast<int>((examples + static_cast<std::size_t>(batch_size) - 1) / static_cast<std::size_t>(batch_size));
}

double learning_rate_at(const TrainConfig& config, int epoch) {
  return config.learning_rate * std::pow(config.lr_decay, epoch);
}

std::unique_ptr<Classifier> Classifier::build(const HeadSpec& head, const BackboneSpec& backbone,
                                              bool pretrained, const std::string& backbone_weights,
                                              std::uint64_t seed) {
  head.validate();
  backbone.validate();
  std::unique_ptr<Classifier> model(new Classifier());
  model->head_spec_ = head;
  model->backbone_spec_ = backbone;
  model->assemble(seed);
  if (pretrained) {
    if (backbone_weights.empty()) throw LoadError("pretrained backbone requested but no weights were given");
    std::vector<std::uint8_t> bytes;
    try {
      bytes = read_file_bytes(backbone_weights);
    } catch (const Error& e) {
      throw LoadError(std::string("backbone weights unavailable: ") + e.what());
    }
    if (bytes.size() % sizeof(float) != 0) throw LoadError("backbone weights file is truncated");
    std::vector<float> values(bytes.size() / sizeof(float));
    std::memcpy(values.data(), bytes.data(), bytes.size());
    nn::restore_state(*model->backbone_, values);
  }
  return model;
}

void Classifier::assemble(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  backbone_ = build_backbone(backbone_spec_, rng, feature_width_);
  head_ = std::make_unique<nn::Sequential>();

  auto bn = std::make_unique<nn::BatchNorm>(feature_width_, static_cast<float>(head_spec_.bn_momentum),
                                            static_cast<float>(head_spec_.bn_epsilon));
  head_bn_ = bn.get();
  head_->add(std::move(bn));

  nn::DenseOptions dense;
  dense.in_features = feature_width_;
  dense.out_features = head_spec_.dense_units;
  dense.activation = nn::Activation::relu;
  dense.kernel_l2 = static_cast<float>(head_spec_.kernel_l2);
  dense.activity_l1 = static_cast<float>(head_spec_.activity_l1);
  dense.bias_l1 = static_cast<float>(head_spec_.bias_l1);
  auto d = std::make_unique<nn::Dense>(dense, rng);
  head_dense_ = d.get();
  head_->add(std::move(d));

  auto drop = std::make_unique<nn::Dropout>(static_cast<float>(head_spec_.dropout_rate), rng());
  head_dropout_ = drop.get();
  head_->add(std::move(drop));

  nn::DenseOptions out;
  out.in_features = head_spec_.dense_units;
  out.out_features = head_spec_.classes;
  auto o = std::make_unique<nn::Dense>(out, rng);
  output_ = o.get();
  head_->add(std::move(o));

  std::ostringstream version;
  version << "effnet-" << backbone_spec_.name << "-d" << head_spec_.dense_units;
  model_version_ = version.str();
}

nn::Tensor Classifier::to_input(std::span<const ScreeningImage> images) const {
  const int r = backbone_spec_.resolution;
  const std::size_t plane = static_cast<std::size_t>(r) * r;
  nn::Tensor x({static_cast<int>(images.size()), 3, r, r});
  std::vector<float> row(plane * 3);
  for (std::size_t i = 0; i < images.size(); ++i) {
    const ScreeningImage scaled = resize_for_model(images[i], r, r);
    simd::kernels().u8_to_f32(scaled.pixels().data(), row.data(), row.size());
    float* dst = x.data() + i * 3 * plane;
    for (std::size_t p = 0; p < plane; ++p) {
      for (std::size_t c = 0; c < 3; ++c) {
        dst[c * plane + p] = (row[p * 3 + c] / 255.0f - kMean[c]) / kStd[c];
      }
    }
  }
  return x;
}

nn::Tensor Classifier::forward(const nn::Tensor& input, nn::Mode mode) {
  if (!backbone_ || !head_) throw Error("classifier is not initialised");
  return head_->forward(backbone_->forward(input, mode), mode);
}

nn::Tensor Classifier::predict_probabilities(const nn::Tensor& input) {
  std::lock_guard lock(inference_mutex_);
  return nn::softmax(forward(input, nn::Mode::eval));
}

ClassificationResult Classifier::predict(const ScreeningImage& image) const {
  if (!backbone_ || !head_) throw Error("classifier is not initialised");
  if (image.empty()) throw InvalidInput("cannot classify an empty image");
  const nn::Tensor x = to_input(std::span(&image, 1));
  nn::Tensor logits;
  {
    std::lock_guard lock(inference_mutex_);
    logits = head_->forward(backbone_->forward(x, nn::Mode::eval), nn::Mode::eval);
  }
  const double z0 = logits[0], z1 = logits[1];
  const double zmax = std::max(z0, z1);
  const double e0 = std::exp(z0 - zmax), e1 = std::exp(z1 - zmax);
  ClassificationResult result;
  result.probabilities = {e0 / (e0 + e1), e1 / (e0 + e1)};
  result.label = result.probabilities[0] >= result.probabilities[1] ? Label::monkeypox : Label::others;
  result.model_version = model_version_;
  return result;
}

LossBreakdown Classifier::loss_and_gradients(const nn::Tensor& input, std::span<const int> targets) {
  for (auto* p : parameters()) p->grad.fill(0.0f);
  const nn::Tensor logits = forward(input, nn::Mode::train);
  auto loss = nn::softmax_cross_entropy(logits, targets);
  LossBreakdown out{loss.loss, backbone_->penalty() + head_->penalty()};
  backbone_->backward(head_->backward(loss.grad));
  return out;
}

std::vector<nn::Parameter*> Classifier::parameters() {
  auto out = backbone_->parameters();
  auto h = head_->parameters();
  out.insert(out.end(), h.begin(), h.end());
  return out;
}

std::vector<nn::Parameter*> Classifier::head_parameters() { return head_->parameters(); }

std::size_t Classifier::parameter_count() {
  return nn::trainable_parameter_count(*backbone_) + nn::trainable_parameter_count(*head_);
}

std::size_t Classifier::head_parameter_count() { return nn::trainable_parameter_count(*head_); }

std::vector<float> Classifier::state() {
  auto out = nn::collect_state(*backbone_);
  auto h = nn::collect_state(*head_);
  out.insert(out.end(), h.begin(), h.end());
  return out;
}

void Classifier::set_state(std::span<const float> values) {
  const std::size_t backbone_len = nn::collect_state(*backbone_).size();
  if (values.size() < backbone_len) throw LoadError("weight blob shorter than the backbone");
  nn::restore_state(*backbone_, values.first(backbone_len));
  nn::restore_state(*head_, values.subspan(backbone_len));
}

}  // namespace skinscreen
