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

#include <cstring>
#include <random>
#include <sstream>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "skinscreen/errors.hpp"
#include "skinscreen/segmentation.hpp"

namespace skinscreen {
namespace {

constexpr char kMagic[8] = {'S', 'K', 'S', 'E', 'G', 'W', '0', '1'};

std::string_view activation_name(nn::Activation a) {
  switch (a) {
    case nn::Activation::none: return "none";
    case nn::Activation::relu: return "relu";
    case nn::Activation::silu: return "silu";
    case nn::Activation::sigmoid: return "sigmoid";
  }
  return "none";
}

nn::Activation parse_activation(std::string_view s) {
  if (s == "none") return nn::Activation::none;
  if (s == "relu") return nn::Activation::relu;
  if (s == "silu") return nn::Activation::silu;
  if (s == "sigmoid") return nn::Activation::sigmoid;
  throw LoadError("unknown activation in weights header: " + std::string(s));
}

void check_topology(const SegmentationWeights& w) {
  if (w.layers.empty()) throw LoadError("weights artifact declares no layers");
  if (w.input_size.width < 1 || w.input_size.height < 1) throw LoadError("invalid input_size");
  int channels = 3;
  for (const auto& l : w.layers) {
    if (l.in_channels != channels) throw LoadError("layer channel chain is inconsistent");
    if (l.kernel < 1 || l.kernel % 2 == 0) throw LoadError("layer kernel must be odd and positive");
    if (l.out_channels < 1) throw LoadError("layer must have at least one output channel");
    channels = l.out_channels;
  }
  if (channels != 1) throw LoadError("final layer must emit a single logit channel");
}

std::vector<std::uint8_t> fetch_locator(const std::string& locator) {
  if (locator.rfind("http://", 0) == 0) {
    const auto slash = locator.find('/', 7);
    const std::string host = locator.substr(0, slash);
    const std::string path = slash == std::string::npos ? "/" : locator.substr(slash);
    httplib::Client client(host);
    client.set_connection_timeout(10);
    auto res = client.Get(path);
    if (!res) throw LoadError("cannot fetch weights from " + locator);
    if (res->status != 200) {
      throw LoadError("fetching weights from " + locator + " returned HTTP " + std::to_string(res->status));
    }
    return std::vector<std::uint8_t>(res->body.begin(), res->body.end());
  }
  std::string path = locator;
  if (path.rfind("file://", 0) == 0) path = path.substr(7);
  try {
    return read_file_bytes(path);
  } catch (const Error& e) {
    throw LoadError(std::string("weights artifact unavailable: ") + e.what());
  }
}

}  // namespace

std::size_t SegmentationWeights::expected_payload() const {
  std::size_t n = 0;
  for (const auto& l : layers) {
    n += static_cast<std::size_t>(l.out_channels) * l.in_channels * l.kernel * l.kernel + l.out_channels;
  }
  return n;
}

std::vector<std::uint8_t> serialize_weights(const SegmentationWeights& weights) {
  check_topology(weights);
  if (weights.payload.size() != weights.expected_payload()) {
    throw InvalidInput("payload size does not match the declared layers");
  }
  const auto* raw = reinterpret_cast<const std::uint8_t*>(weights.payload.data());
  const std::span<const std::uint8_t> payload(raw, weights.payload.size() * sizeof(float));

  nlohmann::ordered_json header;
  header["kind"] = to_string(weights.kind);
  header["name"] = weights.name;
  header["input_size"] = {weights.input_size.width, weights.input_size.height};
  auto& layers = header["layers"] = nlohmann::ordered_json::array();
  for (const auto& l : weights.layers) {
    layers.push_back({{"type", "conv"},
                      {"in", l.in_channels},
                      {"out", l.out_channels},
                      {"kernel", l.kernel},
                      {"activation", activation_name(l.activation)}});
  }
  header["payload_floats"] = weights.payload.size();
  header["payload_sha256"] = sha256_hex(payload);
  const std::string text = header.dump();

  std::vector<std::uint8_t> out(std::begin(kMagic), std::end(kMagic));
  const auto len = static_cast<std::uint32_t>(text.size());
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((len >> (8 * i)) & 0xFF));
  out.insert(out.end(), text.begin(), text.end());
  out.insert(out.end(), payload.begin(), payload.end());
  return out;
}

SegmentationWeights parse_weights(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 12 || std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
    throw LoadError("not a segmentation weights artifact (bad magic)");
  }
  std::uint32_t len = 0;
  for (int i = 0; i < 4; ++i) len |= static_cast<std::uint32_t>(bytes[8 + i]) << (8 * i);
  if (bytes.size() < 12 + static_cast<std::size_t>(len)) throw LoadError("weights header truncated");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(bytes.begin() + 12, bytes.begin() + 12 + len);
  } catch (const nlohmann::json::exception& e) {
    throw LoadError(std::string("weights header is not valid JSON: ") + e.what());
  }

  SegmentationWeights w;
  try {
    w.kind = parse_backend_kind(header.at("kind").get<std::string>());
    w.name = header.value("name", std::string("segmentation"));
    w.input_size = {header.at("input_size").at(0).get<int>(), header.at("input_size").at(1).get<int>()};
    for (const auto& l : header.at("layers")) {
      w.layers.push_back({l.at("in").get<int>(), l.at("out").get<int>(), l.at("kernel").get<int>(),
                          parse_activation(l.value("activation", std::string("none")))});
    }
  } catch (const nlohmann::json::exception& e) {
    throw LoadError(std::string("weights header incomplete: ") + e.what());
  } catch (const InvalidInput& e) {
    throw LoadError(e.what());
  }
  check_topology(w);

  const std::size_t floats = header.value("payload_floats", std::size_t{0});
  const std::size_t payload_bytes = bytes.size() - 12 - len;
  if (floats != w.expected_payload()) throw LoadError("declared payload does not match the layers");
  if (payload_bytes != floats * sizeof(float)) {
    std::ostringstream msg;
    msg << "weights payload truncated or padded: " << payload_bytes << " bytes, expected "
        << floats * sizeof(float);
    throw LoadError(msg.str());
  }
  const auto payload = bytes.subspan(12 + len);
  const std::string expected = header.value("payload_sha256", std::string());
  const std::string actual = sha256_hex(payload);
  if (expected != actual) {
    throw LoadError("weights checksum mismatch: header " + expected + ", payload " + actual);
  }
  w.payload.resize(floats);
  std::memcpy(w.payload.data(), payload.data(), payload_bytes);
  return w;
}

void save_weights(const SegmentationWeights& weights, const std::string& path) {
  write_file_bytes(path, serialize_weights(weights));
}

SegmentationWeights chroma_skin_weights() {
  // logit = 12 (r - g) + 6 (r - b) + 2 r - 1.6 on [0,1] intensities: reddish,
  // not too dark pixels read as skin.
  SegmentationWeights w;
  w.kind = BackendKind::skin_region;
  w.name = "chroma-skin-v1";
  w.input_size = {128, 128};
  w.layers = {{3, 1, 1, nn::Activation::none}};
  w.payload = {20.0f, -12.0f, -6.0f, -1.6f};
  return w;
}

SegmentationWeights constant_weights(BackendKind kind, bool foreground) {
  SegmentationWeights w;
  w.kind = kind;
  w.name = foreground ? "constant-foreground" : "constant-background";
  w.input_size = {8, 8};
  w.layers = {{3, 1, 1, nn::Activation::none}};
  w.payload = {0.0f, 0.0f, 0.0f, foreground ? 8.0f : -8.0f};
  return w;
}

ConvMaskBackend::ConvMaskBackend(SegmentationWeights weights)
    : name_(weights.name), kind_(weights.kind), input_size_(weights.input_size) {
  check_topology(weights);
  if (weights.payload.size() != weights.expected_payload()) throw LoadError("payload size mismatch");
  std::mt19937_64 rng(0);
  for (const auto& l : weights.layers) {
    nn::Conv2dOptions o;
    o.in_channels = l.in_channels;
    o.out_channels = l.out_channels;
    o.kernel = l.kernel;
    net_.add(std::make_unique<nn::Conv2d>(o, rng));
    if (l.activation != nn::Activation::none) net_.add(std::make_unique<nn::ActivationLayer>(l.activation));
  }
  nn::restore_state(net_, weights.payload);
}

BinaryMask ConvMaskBackend::predict(const ScreeningImage& image) const {
  const ScreeningImage scaled = resize(image, input_size_.width, input_size_.height);
  const int w = scaled.width(), h = scaled.height();
  const std::size_t plane = static_cast<std::size_t>(w) * h;
  nn::Tensor x({1, 3, h, w});
  const auto px = scaled.pixels();
  for (std::size_t p = 0; p < plane; ++p) {
    for (std::size_t c = 0; c < 3; ++c) x[c * plane + p] = px[p * 3 + c] / 255.0f;
  }
  nn::Tensor logits;
  {
    std::lock_guard lock(mutex_);
    logits = net_.forward(x, nn::Mode::eval);
  }
  std::vector<std::uint8_t> bits(plane);
  for (std::size_t p = 0; p < plane; ++p) bits[p] = logits[p] > 0.0f ? 1 : 0;
  return resize_nearest(BinaryMask(w, h, std::move(bits)), image.width(), image.height());
}

BackendPtr load_backend(BackendKind kind, const std::string& locator) {
  const auto bytes = fetch_locator(locator);
  SegmentationWeights weights = parse_weights(bytes);
  if (weights.kind != kind) {
    throw LoadError("weights at " + locator + " are for " + std::string(to_string(weights.kind)) +
                    ", expected " + std::string(to_string(kind)));
  }
  return std::make_shared<ConvMaskBackend>(std::move(weights));
}

}  // namespace skinscreen
