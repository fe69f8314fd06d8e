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
#include <filesystem>

#include <nlohmann/json.hpp>

#include "skinscreen/classifier.hpp"
#include "skinscreen/errors.hpp"

namespace skinscreen {
namespace {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

constexpr char kMagic[8] = {'S', 'K', 'M', 'O', 'D', 'W', '0', '1'};

ordered_json head_to_json(const HeadSpec& h) {
  ordered_json j;
  j["batch_norm"] = {{"momentum", h.bn_momentum}, {"epsilon", h.bn_epsilon}};
  j["dense"] = {{"units", h.dense_units},
                {"kernel_l2", h.kernel_l2},
                {"activity_l1", h.activity_l1},
                {"bias_l1", h.bias_l1},
                {"activation", "relu"}};
  j["dropout_rate"] = h.dropout_rate;
  j["output"] = {{"classes", h.classes}, {"activation", "softmax"}};
  return j;
}

HeadSpec head_from_json(const nlohmann::json& j) {
  HeadSpec h;
  h.bn_momentum = j.at("batch_norm").at("momentum").get<double>();
  h.bn_epsilon = j.at("batch_norm").at("epsilon").get<double>();
  h.dense_units = j.at("dense").at("units").get<int>();
  h.kernel_l2 = j.at("dense").at("kernel_l2").get<double>();
  h.activity_l1 = j.at("dense").at("activity_l1").get<double>();
  h.bias_l1 = j.at("dense").at("bias_l1").get<double>();
  h.dropout_rate = j.at("dropout_rate").get<double>();
  h.classes = j.at("output").at("classes").get<int>();
  return h;
}

ordered_json train_to_json(const TrainConfig& c) {
  return {{"input_size", c.input_size},   {"optimizer", "adam"},      {"learning_rate", c.learning_rate},
          {"lr_decay", c.lr_decay},       {"batch_size", c.batch_size}, {"momentum", c.momentum},
          {"beta2", c.beta2},             {"epochs", c.epochs},       {"seed", c.seed}};
}

}  // namespace

void Classifier::save(const std::string& dir, const std::optional<TrainConfig>& train_config,
                      const std::string& dataset_manifest_checksum) const {
  fs::create_directories(dir);
  auto* self = const_cast<Classifier*>(this);
  std::vector<float> values;
  {
    std::lock_guard lock(inference_mutex_);
    values = self->state();
  }
  std::vector<std::uint8_t> blob(std::begin(kMagic), std::end(kMagic));
  const auto count = static_cast<std::uint64_t>(values.size());
  for (int i = 0; i < 8; ++i) blob.push_back(static_cast<std::uint8_t>((count >> (8 * i)) & 0xFF));
  const std::size_t header = blob.size();
  blob.resize(header + values.size() * sizeof(float));
  std::memcpy(blob.data() + header, values.data(), values.size() * sizeof(float));
  write_file_bytes((fs::path(dir) / "weights.bin").string(), blob);

  ordered_json meta;
  meta["model_version"] = model_version_;
  meta["backbone"] = {{"name", backbone_spec_.name},
                      {"width_coefficient", backbone_spec_.width_coefficient},
                      {"depth_coefficient", backbone_spec_.depth_coefficient},
                      {"resolution", backbone_spec_.resolution},
                      {"stages", backbone_spec_.stages},
                      {"bn_momentum", backbone_spec_.bn_momentum}};
  meta["head_spec"] = head_to_json(head_spec_);
  meta["train_config"] = train_config ? train_to_json(*train_config) : ordered_json(nullptr);
  meta["dataset_manifest_checksum"] = dataset_manifest_checksum;
  meta["class_order"] = {"monkeypox", "others"};
  meta["input_size"] = {backbone_spec_.resolution, backbone_spec_.resolution};
  meta["weights_sha256"] = sha256_hex(blob);
  const std::string text = meta.dump(2) + "\n";
  write_file_bytes((fs::path(dir) / "metadata.json").string(),
                   std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

std::unique_ptr<Classifier> Classifier::load(const std::string& dir) {
  const auto meta_path = (fs::path(dir) / "metadata.json").string();
  const auto weights_path = (fs::path(dir) / "weights.bin").string();
  if (!fs::is_regular_file(meta_path) || !fs::is_regular_file(weights_path)) {
    throw LoadError("model artifact at " + dir + " lacks metadata.json or weights.bin");
  }
  nlohmann::json meta;
  try {
    const auto bytes = read_file_bytes(meta_path);
    meta = nlohmann::json::parse(bytes.begin(), bytes.end());
  } catch (const nlohmann::json::exception& e) {
    throw LoadError(std::string("model metadata unreadable: ") + e.what());
  }
  const auto blob = read_file_bytes(weights_path);
  const std::string digest = sha256_hex(blob);
  if (meta.value("weights_sha256", std::string()) != digest) {
    throw LoadError("weights checksum mismatch: metadata " + meta.value("weights_sha256", std::string()) +
                    ", file " + digest);
  }
  if (blob.size() < 16 || std::memcmp(blob.data(), kMagic, sizeof(kMagic)) != 0) {
    throw LoadError("weights.bin has an unknown format");
  }
  std::uint64_t count = 0;
  for (int i = 0; i < 8; ++i) count |= static_cast<std::uint64_t>(blob[8 + i]) << (8 * i);
  if (blob.size() != 16 + count * sizeof(float)) throw LoadError("weights.bin is truncated");
  std::vector<float> values(count);
  std::memcpy(values.data(), blob.data() + 16, count * sizeof(float));

  HeadSpec head;
  BackboneSpec backbone;
  try {
    head = head_from_json(meta.at("head_spec"));
    const auto& b = meta.at("backbone");
    backbone.name = b.at("name").get<std::string>();
    backbone.width_coefficient = b.at("width_coefficient").get<double>();
    backbone.depth_coefficient = b.at("depth_coefficient").get<double>();
    backbone.resolution = b.at("resolution").get<int>();
    backbone.stages = b.at("stages").get<int>();
    backbone.bn_momentum = b.value("bn_momentum", 0.99);
  } catch (const nlohmann::json::exception& e) {
    throw LoadError(std::string("model metadata incomplete: ") + e.what());
  }
  auto model = build(head, backbone, false);
  model->set_state(values);
  model->model_version_ = meta.value("model_version", model->model_version_);
  return model;
}

}  // namespace skinscreen
