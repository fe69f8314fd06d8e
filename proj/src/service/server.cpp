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
#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <random>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "skinscreen/errors.hpp"
#include "skinscreen/service.hpp"

namespace skinscreen {
namespace {

using ordered_json = nlohmann::ordered_json;

std::string error_body(const std::string& code, const std::string& message, const std::string& request_id) {
  ordered_json j;
  j["code"] = code;
  j["message"] = message;
  j["request_id"] = request_id;
  return j.dump();
}

ordered_json trace_json(const std::vector<StageDecision>& trace) {
  auto out = ordered_json::array();
  for (const auto& d : trace) {
    out.push_back({{"name", d.display_name()},
                   {"applied", d.applied},
                   {"blackout_fraction", d.blackout_fraction},
                   {"reason", to_string(d.reason)}});
  }
  return out;
}

}  // namespace

std::string ScreenResponse::to_json() const {
  ordered_json j;
  j["label"] = to_string(label);
  j["probabilities"] = {probabilities[0], probabilities[1]};
  j["stage_trace"] = trace_json(stage_trace);
  j["model_version"] = model_version;
  j["request_id"] = request_id;
  j["timing_ms"] = timing_ms;
  return j.dump();
}

ScreeningService::ScreeningService(std::shared_ptr<const Pipeline> pipeline, ServiceConfig config)
    : pipeline_(std::move(pipeline)), config_(std::move(config)), server_(std::make_unique<httplib::Server>()) {
  if (!pipeline_) throw InvalidInput("service requires a pipeline");
  config_.compressor.validate();
  auto& restoration = config_.pipeline.restoration_policy;
  restoration.max_output_side = std::min(restoration.max_output_side, config_.compressor.max_side);
  std::random_device rd;
  instance_tag_ = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
  install_routes();
}

ScreeningService::~ScreeningService() { stop(); }

std::string ScreeningService::next_request_id() {
  const std::uint64_t n = counter_.fetch_add(1) + 1;
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%016llx-%08llx", static_cast<unsigned long long>(instance_tag_),
                static_cast<unsigned long long>(n));
  return buf;
}

ScreenResponse ScreeningService::handle_screen(std::span<const std::uint8_t> upload) {
  return handle_screen(upload, next_request_id());
}

ScreenResponse ScreeningService::handle_screen(std::span<const std::uint8_t> upload, std::string request_id) {
  const auto start = std::chrono::steady_clock::now();
  ScreenResponse response;
  response.request_id = std::move(request_id);
  const ScreeningImage image = compress_ingress(upload, config_.compressor);
  ClassificationResult result;
  try {
    result = pipeline_->screen(image, config_.pipeline);
  } catch (const std::exception& e) {
    throw RequestError(500, "pipeline_failure", e.what());
  }
  response.label = result.label;
  response.probabilities = result.probabilities;
  response.stage_trace = std::move(result.stage_trace);
  response.model_version = result.model_version;
  response.timing_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  served_.fetch_add(1);
  if (config_.persist_audit) record_audit(response, sha256_hex(upload));
  return response;
}

void ScreeningService::record_audit(const ScreenResponse& response, const std::string& checksum) {
  if (config_.audit_dir.empty()) return;
  ordered_json j;
  j["request_id"] = response.request_id;
  j["time"] = static_cast<long long>(std::time(nullptr));
  j["checksum"] = checksum;
  j["label"] = to_string(response.label);
  j["probabilities"] = {response.probabilities[0], response.probabilities[1]};
  j["model_version"] = response.model_version;
  std::lock_guard lock(audit_mutex_);
  std::filesystem::create_directories(config_.audit_dir);
  std::ofstream out(std::filesystem::path(config_.audit_dir) / "audit.jsonl", std::ios::app);
  out << j.dump() << '\n';
}

std::string ScreeningService::health_json() const {
  ordered_json j;
  j["status"] = "ok";
  j["model_version"] = pipeline_->model_version();
  return j.dump();
}

std::string ScreeningService::version_json() const {
  ordered_json j;
  j["service"] = "skinscreen";
  j["model_version"] = pipeline_->model_version();
  j["disclaimer"] = config_.disclaimer;
  j["compressor"] = {{"max_side", config_.compressor.max_side},
                     {"max_upload_bytes", config_.compressor.max_upload_bytes},
                     {"re_encode_quality", config_.compressor.re_encode_quality}};
  return j.dump();
}

void ScreeningService::install_routes() {
  auto& srv = *server_;
  srv.set_payload_max_length(config_.compressor.max_upload_bytes * 2 + (1u << 20));
  const int threads = std::max(1, config_.worker_threads);
  srv.new_task_queue = [threads] { return new httplib::ThreadPool(static_cast<std::size_t>(threads)); };

  srv.set_default_headers({{"Access-Control-Allow-Origin", "*"}});
  srv.Options(R"(/v1/.*)", [](const httplib::Request&, httplib::Response& res) {
    res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "Content-Type");
    res.status = 204;
  });
  srv.Get("/v1/health", [this](const httplib::Request&, httplib::Response& res) {
    res.set_content(health_json(), "application/json");
  });
  srv.Get("/v1/version", [this](const httplib::Request&, httplib::Response& res) {
    res.set_content(version_json(), "application/json");
  });
  srv.Post("/v1/screen", [this](const httplib::Request& req, httplib::Response& res) {
    if (!req.has_file("image")) {
      res.status = 400;
      res.set_content(error_body("missing_image", "multipart field 'image' is required", next_request_id()),
                      "application/json");
      return;
    }
    const std::string request_id = next_request_id();
    const auto file = req.get_file_value("image");
    const std::span<const std::uint8_t> bytes(reinterpret_cast<const std::uint8_t*>(file.content.data()),
                                              file.content.size());
    try {
      const ScreenResponse response = handle_screen(bytes, request_id);
      res.status = 200;
      res.set_content(response.to_json(), "application/json");
    } catch (const RequestError& e) {
      res.status = e.status();
      res.set_content(error_body(e.code(), e.what(), request_id), "application/json");
    }
  });
  srv.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
    std::string what = "internal error";
    try {
      std::rethrow_exception(ep);
    } catch (const std::exception& e) {
      what = e.what();
    } catch (...) {
    }
    res.status = 500;
    res.set_content(error_body("internal_error", what, ""), "application/json");
  });
  if (!config_.ui_dir.empty()) srv.set_mount_point("/", config_.ui_dir);
}

bool ScreeningService::listen() { return server_->listen(config_.host, config_.port); }

int ScreeningService::bind_ephemeral() { return server_->bind_to_any_port(config_.host); }

bool ScreeningService::listen_after_bind() { return server_->listen_after_bind(); }

void ScreeningService::stop() {
  if (server_) server_->stop();
}

}  // namespace skinscreen
