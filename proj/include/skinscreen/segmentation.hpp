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

#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include "skinscreen/imaging.hpp"
#include "skinscreen/nn.hpp"

namespace skinscreen {

enum class BackendKind { salient_object, skin_region };
std::string_view to_string(BackendKind kind);
BackendKind parse_backend_kind(std::string_view text);

using InputSize = ImageSize;

// Produces a foreground mask the size of the input image. Implementations
// must tolerate concurrent predict() calls.
class SegmentationBackend {
 public:
  virtual ~SegmentationBackend() = default;
  virtual std::string name() const = 0;
  virtual BackendKind kind() const = 0;
  virtual InputSize input_size() const = 0;
  virtual BinaryMask predict(const ScreeningImage& image) const = 0;
};

using BackendPtr = std::shared_ptr<const SegmentationBackend>;

// Wraps a callable; used for stubs and for embedding external runtimes.
class CallbackBackend final : public SegmentationBackend {
 public:
  using Fn = std::function<BinaryMask(const ScreeningImage&)>;
  CallbackBackend(std::string name, BackendKind kind, Fn fn, InputSize input_size = {})
      : name_(std::move(name)), kind_(kind), fn_(std::move(fn)), input_size_(input_size) {}
  std::string name() const override { return name_; }
  BackendKind kind() const override { return kind_; }
  InputSize input_size() const override { return input_size_; }
  BinaryMask predict(const ScreeningImage& image) const override { return fn_(image); }

 private:
  std::string name_;
  BackendKind kind_;
  Fn fn_;
  InputSize input_size_;
};

struct GateConfig {
  double blackout_threshold = 0.87;
  // Throws InvalidInput unless the threshold lies in (0, 1).
  void validate() const;
};

struct GateOutcome {
  ScreeningImage image;
  StageDecision decision;
};

// Runs the backend and applies its mask unless the blacked-out share
// strictly exceeds the threshold. A null or failing backend passes the image
// through with reason backend_unavailable.
GateOutcome gated_segment(const ScreeningImage& image, const SegmentationBackend* backend,
                          const GateConfig& config, StageName stage);

// Fully convolutional mask network stored in a weights artifact. Every layer
// is a stride-1 "same" convolution; the last one emits a single logit
// channel, thresholded at probability 0.5.
struct SegmentationLayerSpec {
  int in_channels = 3;
  int out_channels = 1;
  int kernel = 1;
  nn::Activation activation = nn::Activation::none;
};

struct SegmentationWeights {
  BackendKind kind = BackendKind::skin_region;
  std::string name;
  InputSize input_size{64, 64};
  std::vector<SegmentationLayerSpec> layers;
  std::vector<float> payload;  // weights then bias of each layer, in order

  std::size_t expected_payload() const;
};

// Artifact layout: 8-byte magic "SKSEGW01", little-endian u32 header length,
// JSON header (kind, name, input_size, layers, payload_floats,
// payload_sha256), then the float32 payload.
std::vector<std::uint8_t> serialize_weights(const SegmentationWeights& weights);
SegmentationWeights parse_weights(std::span<const std::uint8_t> bytes);
void save_weights(const SegmentationWeights& weights, const std::string& path);

// Heuristic chroma skin detector (single 1x1 layer on normalised RGB).
SegmentationWeights chroma_skin_weights();
// Constant mask of the given polarity, useful as a pass-through backend.
SegmentationWeights constant_weights(BackendKind kind, bool foreground);

class ConvMaskBackend final : public SegmentationBackend {
 public:
  explicit ConvMaskBackend(SegmentationWeights weights);
  std::string name() const override { return name_; }
  BackendKind kind() const override { return kind_; }
  InputSize input_size() const override { return input_size_; }
  BinaryMask predict(const ScreeningImage& image) const override;

 private:
  std::string name_;
  BackendKind kind_;
  InputSize input_size_;
  mutable std::mutex mutex_;
  mutable nn::Sequential net_;
};

// Loads a weights artifact from a filesystem path, a file:// URL or an
// http:// URL. Throws LoadError on a missing or corrupt artifact, or when
// the artifact's kind differs from the requested one.
BackendPtr load_backend(BackendKind kind, const std::string& locator);

}  // namespace skinscreen
