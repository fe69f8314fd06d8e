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
#include <atomic>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "skinscreen/pipeline.hpp"

namespace httplib {
class Server;
}

namespace skinscreen {

struct CompressorPolicy {
  int max_side = 1024;
  std::size_t max_upload_bytes = 10u * 1024u * 1024u;
  int re_encode_quality = 85;
  // Throws InvalidInput when max_side < 224 or quality is outside [1, 100].
  void validate() const;
};

// Size after capping the longer side at max_side; never enlarges.
ImageSize compressed_size(int width, int height, int max_side);

// Decodes an upload and shrinks it so neither side exceeds max_side,
// re-encoding shrunk images as JPEG at the policy quality. Throws
// RequestError 413 for oversized payloads and 415 for anything that is not
// a decodable PNG or JPEG.
ScreeningImage compress_ingress(std::span<const std::uint8_t> upload, const CompressorPolicy& policy);

struct ScreenResponse {
  Label label = Label::others;
  std::array<double, 2> probabilities{};
  std::vector<StageDecision> stage_trace;
  std::string model_version;
  std::string request_id;
  double timing_ms = 0.0;

  std::string to_json() const;
};

struct ServiceConfig {
  std::string host = "0.0.0.0";
  int port = 8080;
  std::string model_dir;
  std::string salient_object_weights;  // locator; empty leaves level-1 unavailable
  std::string skin_region_weights;     // locator; empty leaves level-2 unavailable
  CompressorPolicy compressor;
  PipelineConfig pipeline;
  bool persist_audit = false;  // metadata only, never image bytes
  std::string audit_dir;
  std::string ui_dir;  // static assets served at /, when set
  std::string disclaimer = "Screening aid only; not a diagnosis.";
  int worker_threads = 4;
};

// Reads a JSON config file (empty path = defaults), then applies
// SKINSCREEN_* environment overrides.
ServiceConfig load_service_config(const std::string& path);
void apply_env_overrides(ServiceConfig& config);

// Loads the model and configured backends.
std::shared_ptr<Pipeline> build_pipeline(const ServiceConfig& config);

// Caps restoration output at the compressor's max_side.
class ScreeningService {
 public:
  ScreeningService(std::shared_ptr<const Pipeline> pipeline, ServiceConfig config);
  ~ScreeningService();
  ScreeningService(const ScreeningService&) = delete;
  ScreeningService& operator=(const ScreeningService&) = delete;

  // compress_ingress -> screen. Throws RequestError (413/415/500).
  ScreenResponse handle_screen(std::span<const std::uint8_t> upload);

  std::string health_json() const;
  std::string version_json() const;

  // Binds and serves until stop(). Returns false if binding failed.
  bool listen();
  // Binds to an ephemeral port and returns it (or -1); serve with listen_after_bind().
  int bind_ephemeral();
  bool listen_after_bind();
  // Stops accepting connections; in-flight requests complete first.
  void stop();

  std::size_t requests_served() const noexcept { return served_.load(); }
  const ServiceConfig& config() const noexcept { return config_; }

 private:
  ScreenResponse handle_screen(std::span<const std::uint8_t> upload, std::string request_id);
  void install_routes();
  std::string next_request_id();
  void record_audit(const ScreenResponse& response, const std::string& checksum);

  std::shared_ptr<const Pipeline> pipeline_;
  ServiceConfig config_;
  std::unique_ptr<httplib::Server> server_;
  std::atomic<std::uint64_t> counter_{0};
  std::atomic<std::size_t> served_{0};
  std::uint64_t instance_tag_ = 0;
  std::mutex audit_mutex_;
};

}  // namespace skinscreen
