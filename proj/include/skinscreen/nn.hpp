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

// Minimal layer library with explicit forward/backward passes. Tensors are
// dense float32, NCHW for feature maps and NF for vectors.

#include <cstdint>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace skinscreen::nn {

class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<int> shape, float fill = 0.0f);

  const std::vector<int>& shape() const noexcept { return shape_; }
  int dim(std::size_t i) const { return shape_.at(i); }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t size() const noexcept { return data_.size(); }
  float* data() noexcept { return data_.data(); }
  const float* data() const noexcept { return data_.data(); }
  std::span<float> values() noexcept { return data_; }
  std::span<const float> values() const noexcept { return data_; }
  float& operator[](std::size_t i) { return data_[i]; }
  float operator[](std::size_t i) const { return data_[i]; }

  void fill(float v);
  // Same element count required.
  Tensor reshaped(std::vector<int> shape) const;

 private:
  std::vector<int> shape_;
  std::vector<float> data_;
};

enum class Mode { train, eval };

struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;
};

// Row-major C[M,N] += A[M,K] * B[K,N] and transposed variants, built on the
// dispatched dot/axpy kernels.
void gemm_nn(int m, int n, int k, const float* a, const float* b, float* c);
void gemm_nt(int m, int n, int k, const float* a, const float* b, float* c);  // B is [N,K]
void gemm_tn(int m, int n, int k, const float* a, const float* b, float* c);  // A is [K,M]

class Layer {
 public:
  virtual ~Layer() = default;
  virtual std::string type() const = 0;
  virtual Tensor forward(const Tensor& x, Mode mode) = 0;
  // Consumes dL/d(output), accumulates parameter gradients, returns dL/d(input).
  virtual Tensor backward(const Tensor& grad) = 0;
  virtual std::vector<Parameter*> parameters() { return {}; }
  // Non-trainable state that is still part of the saved model.
  virtual std::vector<Tensor*> buffers() { return {}; }
  // Regularisation loss contributed by this layer for the last forward pass.
  virtual double penalty() const { return 0.0; }
};

using LayerPtr = std::unique_ptr<Layer>;

class Sequential : public Layer {
 public:
  Sequential() = default;
  void add(LayerPtr layer) { layers_.push_back(std::move(layer)); }
  std::size_t size() const noexcept { return layers_.size(); }
  Layer& at(std::size_t i) { return *layers_.at(i); }
  const Layer& at(std::size_t i) const { return *layers_.at(i); }

  std::string type() const override { return "sequential"; }
  Tensor forward(const Tensor& x, Mode mode) override;
  Tensor backward(const Tensor& grad) override;
  std::vector<Parameter*> parameters() override;
  std::vector<Tensor*> buffers() override;
  double penalty() const override;

 private:
  std::vector<LayerPtr> layers_;
};

struct Conv2dOptions {
  int in_channels = 1;
  int out_channels = 1;
  int kernel = 3;
  int stride = 1;
  int padding = -1;  // -1 = "same" padding of kernel / 2
  bool depthwise = false;  // one filter per channel; requires in == out
  bool bias = true;
};

class Conv2d : public Layer {
 public:
  Conv2d(const Conv2dOptions& options, std::mt19937_64& rng);
  std::string type() const override { return options_.depthwise ? "depthwise_conv2d" : "conv2d"; }
  Tensor forward(const Tensor& x, Mode mode) override;
  Tensor backward(const Tensor& grad) override;
  std::vector<Parameter*> parameters() override;
  const Conv2dOptions& options() const noexcept { return options_; }
  Parameter& weight() noexcept { return weight_; }
  Parameter& bias() noexcept { return bias_; }

 private:
  Conv2dOptions options_;
  Parameter weight_;
  Parameter bias_;
  Tensor input_;
};

// Per-channel (NCHW) or per-feature (NF) batch normalisation. The running
// averages follow running = momentum * running + (1 - momentum) * batch.
class BatchNorm : public Layer {
 public:
  BatchNorm(int features, float momentum, float epsilon);
  std::string type() const override { return "batch_norm"; }
  Tensor forward(const Tensor& x, Mode mode) override;
  Tensor backward(const Tensor& grad) override;
  std::vector<Parameter*> parameters() override { return {&gamma_, &beta_}; }
  std::vector<Tensor*> buffers() override { return {&running_mean_, &running_var_}; }
  float momentum() const noexcept { return momentum_; }
  float epsilon() const noexcept { return epsilon_; }
  int features() const noexcept { return features_; }

 private:
  int features_;
  float momentum_;
  float epsilon_;
  Parameter gamma_;
  Parameter beta_;
  Tensor running_mean_;
  Tensor running_var_;
  // Cache for backward.
  Tensor x_hat_;
  std::vector<float> inv_std_;
  Mode last_mode_ = Mode::eval;
};

enum class Activation { none, relu, silu, sigmoid };

class ActivationLayer : public Layer {
 public:
  explicit ActivationLayer(Activation kind) : kind_(kind) {}
  std::string type() const override;
  Tensor forward(const Tensor& x, Mode mode) override;
  Tensor backward(const Tensor& grad) override;

 private:
  Activation kind_;
  Tensor input_;
  Tensor output_;
};

class GlobalAvgPool : public Layer {
 public:
  std::string type() const override { return "global_avg_pool"; }
  Tensor forward(const Tensor& x, Mode mode) override;
  Tensor backward(const Tensor& grad) override;

 private:
  std::vector<int> in_shape_;
};

struct DenseOptions {
  int in_features = 1;
  int out_features = 1;
  Activation activation = Activation::none;
  float kernel_l2 = 0.0f;
  float bias_l1 = 0.0f;
  float activity_l1 = 0.0f;  // applied to the post-activation output, averaged over the batch
};

class Dense : public Layer {
 public:
  Dense(const DenseOptions& options, std::mt19937_64& rng);
  std::string type() const override { return "dense"; }
  Tensor forward(const Tensor& x, Mode mode) override;
  Tensor backward(const Tensor& grad) override;
  std::vector<Parameter*> parameters() override { return {&weight_, &bias_}; }
  double penalty() const override;
  const DenseOptions& options() const noexcept { return options_; }
  Parameter& weight() noexcept { return weight_; }  // [out, in]
  Parameter& bias() noexcept { return bias_; }

 private:
  DenseOptions options_;
  Parameter weight_;
  Parameter bias_;
  Tensor input_;
  Tensor pre_activation_;
  Tensor output_;
  double activity_penalty_ = 0.0;
};

// Inverted dropout; identity in eval mode.
class Dropout : public Layer {
 public:
  Dropout(float rate, std::uint64_t seed) : rate_(rate), rng_(seed) {}
  std::string type() const override { return "dropout"; }
  Tensor forward(const Tensor& x, Mode mode) override;
  Tensor backward(const Tensor& grad) override;
  float rate() const noexcept { return rate_; }
  void reseed(std::uint64_t seed) { rng_.seed(seed); }

 private:
  float rate_;
  std::mt19937_64 rng_;
  std::vector<float> keep_;
};

// Adds the block input to its output when shapes allow.
class Residual : public Layer {
 public:
  explicit Residual(std::unique_ptr<Sequential> body) : body_(std::move(body)) {}
  std::string type() const override { return "residual"; }
  Tensor forward(const Tensor& x, Mode mode) override;
  Tensor backward(const Tensor& grad) override;
  std::vector<Parameter*> parameters() override { return body_->parameters(); }
  std::vector<Tensor*> buffers() override { return body_->buffers(); }
  double penalty() const override { return body_->penalty(); }

 private:
  std::unique_ptr<Sequential> body_;
};

// Row-wise softmax of [N, C] logits.
Tensor softmax(const Tensor& logits);

struct LossResult {
  double loss = 0.0;  // mean cross-entropy over the batch
  Tensor grad;        // dL/dlogits
};

// Softmax cross-entropy against integer targets.
LossResult softmax_cross_entropy(const Tensor& logits, std::span<const int> targets);

// Adam with bias correction.
class Adam {
 public:
  struct Options {
    float learning_rate = 1e-3f;
    float beta1 = 0.9f;
    float beta2 = 0.999f;
    float epsilon = 1e-7f;
  };
  Adam(std::vector<Parameter*> params, Options options);
  void set_learning_rate(float lr) noexcept { options_.learning_rate = lr; }
  float learning_rate() const noexcept { return options_.learning_rate; }
  const Options& options() const noexcept { return options_; }
  void step();
  void zero_grad();

 private:
  std::vector<Parameter*> params_;
  Options options_;
  std::vector<Tensor> m_;
  std::vector<Tensor> v_;
  long step_ = 0;
};

// Flattened parameter and buffer values in traversal order.
std::vector<float> collect_state(Layer& layer);
// Throws LoadError when the element count does not match.
void restore_state(Layer& layer, std::span<const float> state);
std::size_t trainable_parameter_count(Layer& layer);

}  // namespace skinscreen::nn
