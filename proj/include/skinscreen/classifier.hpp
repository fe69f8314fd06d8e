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

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "skinscreen/dataset.hpp"
#include "skinscreen/imaging.hpp"
#include "skinscreen/nn.hpp"

namespace skinscreen {

// Transfer head attached on top of the pooled backbone features:
// batch norm -> regularised dense (relu) -> dropout -> softmax output.
struct HeadSpec {
  double bn_momentum = 0.99;
  double bn_epsilon = 0.001;
  int dense_units = 256;
  double kernel_l2 = 0.016;
  double activity_l1 = 0.006;
  double bias_l1 = 0.006;
  double dropout_rate = 0.45;
  int classes = 2;

  void validate() const;
  friend bool operator==(const HeadSpec&, const HeadSpec&) = default;
};

// Compound-scaled inverted-bottleneck backbone. Channel counts and block
// repeats of the base seven-stage layout are multiplied by the width and
// depth coefficients.
struct BackboneSpec {
  std::string name = "b0";
  double width_coefficient = 1.0;
  double depth_coefficient = 1.0;
  int resolution = 224;
  int stages = 7;  // leading stages of the base layout to keep
  double bn_momentum = 0.99;  // backbone batch norm running-statistics momentum

  // Standard coefficient presets b0..b7.
  static BackboneSpec preset(const std::string& name);
  // Reduced variant for desk-scale experiments and tests.
  static BackboneSpec micro();
  void validate() const;
  friend bool operator==(const BackboneSpec&, const BackboneSpec&) = default;
};

// Channel rounding used by compound scaling (multiples of 8, never more than
// 10% below the scaled value).
int round_filters(int filters, double width_coefficient);
int round_repeats(int repeats, double depth_coefficient);

struct TrainConfig {
  int input_size = 224;
  double learning_rate = 0.001;
  double lr_decay = 0.95;  // multiplicative, per epoch
  int batch_size = 48;
  double momentum = 0.99;  // Adam first-moment coefficient
  double beta2 = 0.999;
  int epochs = 10;
  std::uint64_t seed = 0;

  void validate() const;
  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

int steps_per_epoch(std::size_t examples, int batch_size);
double learning_rate_at(const TrainConfig& config, int epoch);

// Class index 0 is monkeypox, 1 is others.
struct ClassificationResult {
  Label label = Label::others;
  std::array<double, 2> probabilities{};
  std::vector<StageDecision> stage_trace;
  std::string model_version;
};

struct LossBreakdown {
  double data_loss = 0.0;
  double penalty = 0.0;
  double total() const { return data_loss + penalty; }
};

class Classifier {
 public:
  // Builds backbone + head. With pretrained set, backbone weights are read
  // from backbone_weights (LoadError when absent or incompatible).
  static std::unique_ptr<Classifier> build(const HeadSpec& head, const BackboneSpec& backbone,
                                           bool pretrained, const std::string& backbone_weights = {},
                                           std::uint64_t seed = 0);

  // Artifact directory: weights.bin + metadata.json.
  static std::unique_ptr<Classifier> load(const std::string& dir);
  void save(const std::string& dir, const std::optional<TrainConfig>& train_config = std::nullopt,
            const std::string& dataset_manifest_checksum = {}) const;

  const HeadSpec& head_spec() const noexcept { return head_spec_; }
  const BackboneSpec& backbone_spec() const noexcept { return backbone_spec_; }
  const std::string& model_version() const noexcept { return model_version_; }
  void set_model_version(std::string v) { model_version_ = std::move(v); }
  int feature_width() const noexcept { return feature_width_; }

  // Input tensor [N, 3, R, R] from images resized to the backbone resolution.
  nn::Tensor to_input(std::span<const ScreeningImage> images) const;

  // Logits [N, 2].
  nn::Tensor forward(const nn::Tensor& input, nn::Mode mode);
  // Softmax probabilities in eval mode.
  nn::Tensor predict_probabilities(const nn::Tensor& input);

  // Eval-mode, deterministic; resizes internally.
  ClassificationResult predict(const ScreeningImage& image) const;

  // Zeroes gradients, runs a train-mode forward/backward over the batch and
  // returns the loss split into data term and regularisation.
  LossBreakdown loss_and_gradients(const nn::Tensor& input, std::span<const int> targets);

  std::vector<nn::Parameter*> parameters();
  std::vector<nn::Parameter*> head_parameters();
  std::size_t parameter_count();
  std::size_t head_parameter_count();

  nn::Sequential& backbone() noexcept { return *backbone_; }
  nn::Sequential& head() noexcept { return *head_; }
  nn::Dense& head_dense() noexcept { return *head_dense_; }
  nn::Dense& output_layer() noexcept { return *output_; }
  nn::BatchNorm& head_batch_norm() noexcept { return *head_bn_; }
  nn::Dropout& head_dropout() noexcept { return *head_dropout_; }

  std::vector<float> state();
  void set_state(std::span<const float> values);

 private:
  Classifier() = default;
  void assemble(std::uint64_t seed);

  HeadSpec head_spec_;
  BackboneSpec backbone_spec_;
  std::string model_version_;
  int feature_width_ = 0;
  std::unique_ptr<nn::Sequential> backbone_;
  std::unique_ptr<nn::Sequential> head_;
  nn::BatchNorm* head_bn_ = nullptr;
  nn::Dense* head_dense_ = nullptr;
  nn::Dropout* head_dropout_ = nullptr;
  nn::Dense* output_ = nullptr;
  mutable std::mutex inference_mutex_;
};

// Builds the stem, inverted-bottleneck stages, 1x1 head convolution and
// global pooling. Returns the pooled feature width through features.
std::unique_ptr<nn::Sequential> build_backbone(const BackboneSpec& spec, std::mt19937_64& rng,
                                               int& features);

struct LabeledImage {
  ScreeningImage image;
  Label label = Label::others;
};

struct EpochStats {
  int epoch = 0;
  double learning_rate = 0.0;
  double train_loss = 0.0;
  double train_accuracy = 0.0;
  double val_loss = 0.0;
  double val_accuracy = 0.0;
};

struct TrainHistory {
  int steps_per_epoch = 0;
  int best_epoch = -1;
  std::vector<EpochStats> epochs;
};

struct EvalStats {
  double loss = 0.0;
  double accuracy = 0.0;
};

// Eval-mode mean data loss and accuracy.
EvalStats evaluate_set(Classifier& model, const std::vector<LabeledImage>& data, int batch_size = 32);

// Mini-batch Adam with per-epoch learning-rate decay. Keeps the weights of
// the epoch with the best validation accuracy (ties: lower validation loss).
// Throws TrainingError on empty or single-class training data and on a
// non-finite loss.
TrainHistory train(Classifier& model, const std::vector<LabeledImage>& train_set,
                   const std::vector<LabeledImage>& val_set, const TrainConfig& config,
                   const std::function<void(const EpochStats&)>& on_epoch = {});

}  // namespace skinscreen
