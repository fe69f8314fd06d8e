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

#include <cstdlib>

#include <nlohmann/json.hpp>

#include "skinscreen/errors.hpp"
#include "skinscreen/service.hpp"

namespace skinscreen {
namespace {

const char* env(const char* name) {
  const char* v = std::getenv(name);
  return (v != nullptr && *v != '\0') ? v : nullptr;
}

template <typename T>
void read(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key) && !j.at(key).is_null()) out = j.at(key).get<T>();
}

}  // namespace

ServiceConfig load_service_config(const std::string& path) {
  ServiceConfig c;
  if (!path.empty()) {
    nlohmann::json j;
    try {
      const auto bytes = read_file_bytes(path);
      j = nlohmann::json::parse(bytes.begin(), bytes.end());
    } catch (const nlohmann::json::exception& e) {
      throw InvalidInput("config " + path + " is not valid JSON: " + e.what());
    }
    try {
      read(j, "host", c.host);
      read(j, "port", c.port);
      read(j, "model_dir", c.model_dir);
      read(j, "ui_dir", c.ui_dir);
      read(j, "disclaimer", c.disclaimer);
      read(j, "worker_threads", c.worker_threads);
      if (j.contains("backends")) {
        read(j["backends"], "salient_object", c.salient_object_weights);
        read(j["backends"], "skin_region", c.skin_region_weights);
      }
      if (j.contains("compressor")) {
        const auto& cj = j["compressor"];
        read(cj, "max_side", c.compressor.max_side);
        read(cj, "max_upload_bytes", c.compressor.max_upload_bytes);
        read(cj, "re_encode_quality", c.compressor.re_encode_quality);
      }
      if (j.contains("gate")) {
        double threshold = c.pipeline.background_gate.blackout_threshold;
        read(j["gate"], "blackout_threshold", threshold);
        c.pipeline.background_gate.blackout_threshold = threshold;
        c.pipeline.skin_gate.blackout_threshold = threshold;
        read(j["gate"], "background_threshold", c.pipeline.background_gate.blackout_threshold);
        read(j["gate"], "skin_threshold", c.pipeline.skin_gate.blackout_threshold);
      }
      if (j.contains("restoration")) {
        const auto& rj = j["restoration"];
        read(rj, "min_side_trigger", c.pipeline.restoration_policy.min_side_trigger);
        read(rj, "upscale_factor", c.pipeline.restoration_policy.upscale_factor);
        read(rj, "max_output_side", c.pipeline.restoration_policy.max_output_side);
      }
      if (j.contains("stages")) {
        const auto& sj = j["stages"];
        read(sj, "restoration", c.pipeline.enable_restoration);
        read(sj, "background_removal", c.pipeline.enable_background_removal);
        read(sj, "skin_segmentation", c.pipeline.enable_skin_segmentation);
      }
      if (j.contains("persistence")) {
        read(j["persistence"], "enabled", c.persist_audit);
        read(j["persistence"], "dir", c.audit_dir);
      }
    } catch (const nlohmann::json::exception& e) {
      throw InvalidInput("config " + path + ": " + e.what());
    }
  }
  apply_env_overrides(c);
  c.compressor.validate();
  c.pipeline.background_gate.validate();
  c.pipeline.skin_gate.validate();
  c.pipeline.restoration_policy.validate();
  return c;
}

void apply_env_overrides(ServiceConfig& c) {
  try {
    if (const char* v = env("SKINSCREEN_PORT")) c.port = std::stoi(v);
    if (const char* v = env("SKINSCREEN_MODEL_DIR")) c.model_dir = v;
    if (const char* v = env("SKINSCREEN_SALIENT_WEIGHTS")) c.salient_object_weights = v;
    if (const char* v = env("SKINSCREEN_SKIN_WEIGHTS")) c.skin_region_weights = v;
    if (const char* v = env("SKINSCREEN_MAX_SIDE")) c.compressor.max_side = std::stoi(v);
    if (const char* v = env("SKINSCREEN_MAX_UPLOAD_BYTES")) c.compressor.max_upload_bytes = std::stoull(v);
    if (const char* v = env("SKINSCREEN_JPEG_QUALITY")) c.compressor.re_encode_quality = std::stoi(v);
    if (const char* v = env("SKINSCREEN_GATE_THRESHOLD")) {
      c.pipeline.background_gate.blackout_threshold = std::stod(v);
      c.pipeline.skin_gate.blackout_threshold = std::stod(v);
    }
    if (const char* v = env("SKINSCREEN_AUDIT_DIR")) {
      c.audit_dir = v;
      c.persist_audit = true;
    }
  } catch (const std::logic_error& e) {
    throw InvalidInput(std::string("malformed SKINSCREEN_* environment value: ") + e.what());
  }
}

std::shared_ptr<Pipeline> build_pipeline(const ServiceConfig& config) {
  if (config.model_dir.empty()) throw LoadError("no model directory configured");
  std::shared_ptr<const Classifier> model = Classifier::load(config.model_dir);
  BackendPtr salient, skin;
  if (!config.salient_object_weights.empty()) {
    salient = load_backend(BackendKind::salient_object, config.salient_object_weights);
  }
  if (!config.skin_region_weights.empty()) {
    skin = load_backend(BackendKind::skin_region, config.skin_region_weights);
  }
  return std::make_shared<Pipeline>(std::move(model), std::move(salient), std::move(skin));
}

}  // namespace skinscreen
