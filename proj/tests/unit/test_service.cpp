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

#include <doctest.h>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include <cstdlib>
#include <fstream>
#include <random>
#include <set>
#include <thread>

#include "skinscreen/errors.hpp"
#include "skinscreen/restoration.hpp"
#include "skinscreen/service.hpp"
#include "synthetic.hpp"

using namespace skinscreen;
using nlohmann::json;

namespace {

std::shared_ptr<const Pipeline> tiny_pipeline() {
  BackboneSpec b = BackboneSpec::micro();
  b.resolution = 64;
  std::shared_ptr<const Classifier> model = Classifier::build(HeadSpec{}, b, false, {}, 12);
  return std::make_shared<Pipeline>(model, testing::stub_background_backend(), testing::stub_skin_backend());
}

std::vector<std::uint8_t> jpeg_of(int w, int h, std::uint64_t seed = 1) {
  return encode_image(resize(testing::lesion_texture(Label::monkeypox, seed, 96), w, h), ImageFormat::jpeg, 90);
}

std::vector<std::uint8_t> bytes_of(const std::string& s) { return {s.begin(), s.end()}; }

std::set<std::string> listing(const std::filesystem::path& dir, bool recursive) {
  std::set<std::string> out;
  std::error_code ec;
  if (!std::filesystem::exists(dir, ec)) return out;
  if (recursive) {
    for (const auto& e : std::filesystem::recursive_directory_iterator(dir, ec)) out.insert(e.path().string());
  } else {
    for (const auto& e : std::filesystem::directory_iterator(dir, ec)) out.insert(e.path().string());
  }
  return out;
}

// Serves on an ephemeral port for the lifetime of the object.
struct RunningService {
  explicit RunningService(ServiceConfig cfg) : service(tiny_pipeline(), std::move(cfg)) {
    cfg_host = "127.0.0.1";
    port = service.bind_ephemeral();
    REQUIRE(port > 0);
    thread = std::thread([this] { service.listen_after_bind(); });
    httplib::Client probe(cfg_host, port);
    for (int i = 0; i < 200 && !probe.Get("/v1/health"); ++i) std::this_thread::sleep_for(std::chrono::milliseconds(10));
  }
  ~RunningService() {
    service.stop();
    thread.join();
  }
  httplib::Result upload(const std::vector<std::uint8_t>& bytes, const std::string& field = "image") {
    httplib::Client client(cfg_host, port);
    client.set_read_timeout(60, 0);
    httplib::MultipartFormDataItems items{{field, std::string(bytes.begin(), bytes.end()), "upload.bin",
                                           "application/octet-stream"}};
    return client.Post("/v1/screen", items);
  }

  ScreeningService service;
  std::string cfg_host;
  int port = 0;
  std::thread thread;
};

ServiceConfig local_config() {
  ServiceConfig c;
  c.host = "127.0.0.1";
  c.worker_threads = 4;
  return c;
}

}  // namespace

TEST_SUITE("service") {
  TEST_CASE("compressor examples") {
    const CompressorPolicy policy;
    const auto big = encode_image(ScreeningImage::filled(4000, 3000, 120, 90, 80), ImageFormat::png);
    const auto shrunk = compress_ingress(big, policy);
    CHECK(shrunk.width() == 1024);
    CHECK(shrunk.height() == 768);

    const auto mid_img = resize(testing::lesion_texture(Label::others, 2, 96), 800, 600);
    const auto mid = compress_ingress(encode_image(mid_img, ImageFormat::png), policy);
    CHECK(mid == mid_img);

    try {
      compress_ingress(bytes_of("hello, this is text"), policy);
      FAIL("expected 415");
    } catch (const RequestError& e) {
      CHECK(e.status() == 415);
      CHECK(e.code() == "unsupported_media_type");
    }
    std::vector<std::uint8_t> broken = encode_image(mid_img, ImageFormat::png);
    broken.resize(40);
    CHECK_THROWS_AS(compress_ingress(broken, policy), RequestError);

    CompressorPolicy tight;
    tight.max_upload_bytes = 1000;
    try {
      compress_ingress(encode_image(mid_img, ImageFormat::png), tight);
      FAIL("expected 413");
    } catch (const RequestError& e) {
      CHECK(e.status() == 413);
    }
    tight = {};
    tight.max_side = 200;
    CHECK_THROWS_AS(tight.validate(), InvalidInput);
  }

  TEST_CASE("compressor never enlarges and preserves aspect ratio") {
    std::mt19937 rng(3);
    for (int t = 0; t < 1000; ++t) {
      const int w = 1 + static_cast<int>(rng() % 6000);
      const int h = 1 + static_cast<int>(rng() % 6000);
      const auto s = compressed_size(w, h, 1024);
      CHECK(s.width <= w);
      CHECK(s.height <= h);
      CHECK(std::max(s.width, s.height) <= 1024);
      if (std::max(w, h) > 1024) {
        CHECK(std::max(s.width, s.height) == 1024);
        CHECK(std::fabs(static_cast<double>(s.width) / s.height - static_cast<double>(w) / h) <=
              static_cast<double>(w) / h / std::min(s.width, s.height) + 1.0 / s.height);
      }
    }
  }

  TEST_CASE("compressor and restoration never pull in opposite directions") {
    ScreeningService service(tiny_pipeline(), ServiceConfig{});
    const auto& policy = service.config().pipeline.restoration_policy;
    std::mt19937 rng(8);
    for (int t = 0; t < 2000; ++t) {
      const int w = 1 + static_cast<int>(rng() % 8000);
      const int h = 1 + static_cast<int>(rng() % 8000);
      const auto c = compressed_size(w, h, service.config().compressor.max_side);
      const bool shrunk = c.width < w || c.height < h;
      const bool triggers = std::min(c.width, c.height) < policy.min_side_trigger;
      const auto r = triggers ? restored_size(c.width, c.height, policy) : c;
      const bool enlarged = r.width > c.width || r.height > c.height;
      CHECK_FALSE((shrunk && enlarged));
      CHECK(std::max(r.width, r.height) <= std::max({service.config().compressor.max_side, c.width, c.height}));
    }
  }

  TEST_CASE("handle_screen contract") {
    ScreeningService service(tiny_pipeline(), ServiceConfig{});
    const auto r = service.handle_screen(jpeg_of(320, 240));
    CHECK(r.probabilities[0] + r.probabilities[1] == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(r.stage_trace.size() == 3);
    CHECK_FALSE(r.request_id.empty());
    CHECK(r.model_version == "effnet-micro-d256");
    CHECK(r.timing_ms >= 0.0);
    const auto j = json::parse(r.to_json());
    for (const char* key : {"label", "probabilities", "stage_trace", "model_version", "request_id", "timing_ms"}) {
      CHECK(j.contains(key));
    }
    for (const auto& stage : j["stage_trace"]) {
      CHECK(stage.contains("name"));
      CHECK(stage.contains("applied"));
      CHECK(stage.contains("blackout_fraction"));
      CHECK(stage.contains("reason"));
    }
    CHECK(service.requests_served() == 1);
    CHECK(json::parse(service.health_json())["status"] == "ok");
    CHECK(json::parse(service.health_json())["model_version"] == "effnet-micro-d256");
    CHECK(json::parse(service.version_json()).contains("disclaimer"));
  }

  TEST_CASE("concurrent identical uploads agree and get distinct ids") {
    ScreeningService service(tiny_pipeline(), ServiceConfig{});
    const auto upload = jpeg_of(500, 400, 5);
    std::vector<ScreenResponse> results(6);
    std::vector<std::thread> threads;
    for (std::size_t i = 0; i < results.size(); ++i) {
      threads.emplace_back([&, i] { results[i] = service.handle_screen(upload); });
    }
    for (auto& t : threads) t.join();
    std::set<std::string> ids;
    for (const auto& r : results) {
      ids.insert(r.request_id);
      CHECK(r.probabilities == results[0].probabilities);
      CHECK(r.label == results[0].label);
      CHECK(r.stage_trace == results[0].stage_trace);
    }
    CHECK(ids.size() == results.size());
  }

  TEST_CASE("HTTP round trip and error bodies") {
    ServiceConfig cfg = local_config();
    cfg.compressor.max_upload_bytes = 200000;
    RunningService running(cfg);

    auto ok = running.upload(jpeg_of(640, 480));
    REQUIRE(ok);
    CHECK(ok->status == 200);
    const auto body = json::parse(ok->body);
    CHECK(body["stage_trace"].size() == 3);
    CHECK(body["probabilities"].size() == 2);

    auto text = running.upload(bytes_of("definitely not an image"));
    REQUIRE(text);
    CHECK(text->status == 415);
    const auto err = json::parse(text->body);
    CHECK(err["code"] == "unsupported_media_type");
    CHECK(err.contains("message"));
    CHECK_FALSE(err["request_id"].get<std::string>().empty());

    std::vector<std::uint8_t> huge(250000, 0x42);
    auto big = running.upload(huge);
    REQUIRE(big);
    CHECK(big->status == 413);
    CHECK(json::parse(big->body)["code"] == "payload_too_large");

    auto missing = running.upload(jpeg_of(64, 64), "file");
    REQUIRE(missing);
    CHECK(missing->status == 400);

    httplib::Client client("127.0.0.1", running.port);
    auto health = client.Get("/v1/health");
    REQUIRE(health);
    CHECK(json::parse(health->body)["status"] == "ok");
    auto version = client.Get("/v1/version");
    REQUIRE(version);
    CHECK(json::parse(version->body)["model_version"] == "effnet-micro-d256");
    CHECK(health->get_header_value("Access-Control-Allow-Origin") == "*");
  }

  TEST_CASE("no image is stored when persistence is disabled") {
    testing::TempDir work("nostore");
    ServiceConfig cfg = local_config();
    cfg.audit_dir = (work.path() / "audit").string();
    const auto before_tmp = listing(std::filesystem::temp_directory_path(), false);
    const auto before_cwd = listing(std::filesystem::current_path(), true);
    {
      RunningService running(cfg);
      for (int i = 0; i < 3; ++i) {
        auto r = running.upload(jpeg_of(300 + i, 200));
        REQUIRE(r);
        CHECK(r->status == 200);
      }
    }
    CHECK(testing::count_files(work.path()) == 0);
    CHECK(listing(std::filesystem::current_path(), true) == before_cwd);
    auto after_tmp = listing(std::filesystem::temp_directory_path(), false);
    after_tmp.erase(work.str());
    std::set<std::string> added;
    for (const auto& p : after_tmp) {
      if (before_tmp.count(p) == 0) added.insert(p);
    }
    CHECK(added.empty());
  }

  TEST_CASE("audit store keeps metadata only") {
    testing::TempDir work("audit");
    ServiceConfig cfg;
    cfg.persist_audit = true;
    cfg.audit_dir = work.str();
    ScreeningService service(tiny_pipeline(), cfg);
    const auto upload = jpeg_of(256, 256, 9);
    const auto r = service.handle_screen(upload);
    REQUIRE(testing::count_files(work.path()) == 1);
    const auto log = read_file_bytes((work.path() / "audit.jsonl").string());
    const auto line = json::parse(log.begin(), log.end());
    CHECK(line["request_id"] == r.request_id);
    CHECK(line["checksum"] == sha256_hex(upload));
    CHECK(log.size() < 1024);
    for (const char* key : {"image", "pixels", "bytes"}) CHECK_FALSE(line.contains(key));
  }

  TEST_CASE("configuration file and environment overrides") {
    testing::TempDir dir("config");
    const auto path = (dir.path() / "service.json").string();
    {
      std::ofstream out(path);
      out << R"({"port": 9001, "model_dir": "/models/a",
                 "backends": {"salient_object": "/w/bg.sksw", "skin_region": "/w/skin.sksw"},
                 "compressor": {"max_side": 800, "re_encode_quality": 70},
                 "gate": {"blackout_threshold": 0.8},
                 "stages": {"restoration": false},
                 "persistence": {"enabled": true, "dir": "/var/audit"}})";
    }
    auto cfg = load_service_config(path);
    CHECK(cfg.port == 9001);
    CHECK(cfg.model_dir == "/models/a");
    CHECK(cfg.salient_object_weights == "/w/bg.sksw");
    CHECK(cfg.compressor.max_side == 800);
    CHECK(cfg.compressor.re_encode_quality == 70);
    CHECK(cfg.pipeline.background_gate.blackout_threshold == 0.8);
    CHECK(cfg.pipeline.skin_gate.blackout_threshold == 0.8);
    CHECK_FALSE(cfg.pipeline.enable_restoration);
    CHECK(cfg.persist_audit);

    setenv("SKINSCREEN_PORT", "9100", 1);
    setenv("SKINSCREEN_MAX_SIDE", "512", 1);
    setenv("SKINSCREEN_GATE_THRESHOLD", "0.9", 1);
    cfg = load_service_config(path);
    unsetenv("SKINSCREEN_PORT");
    unsetenv("SKINSCREEN_MAX_SIDE");
    unsetenv("SKINSCREEN_GATE_THRESHOLD");
    CHECK(cfg.port == 9100);
    CHECK(cfg.compressor.max_side == 512);
    CHECK(cfg.pipeline.skin_gate.blackout_threshold == 0.9);

    CHECK(load_service_config("").port == 8080);
    setenv("SKINSCREEN_PORT", "eighty", 1);
    CHECK_THROWS_AS(load_service_config(""), InvalidInput);
    unsetenv("SKINSCREEN_PORT");
    {
      std::ofstream out(path);
      out << "{not json";
    }
    CHECK_THROWS_AS(load_service_config(path), InvalidInput);
  }

  TEST_CASE("pipeline is built from artifacts on disk") {
    testing::TempDir dir("artifacts");
    BackboneSpec b = BackboneSpec::micro();
    b.resolution = 64;
    Classifier::build(HeadSpec{}, b, false, {}, 3)->save((dir.path() / "model").string());
    save_weights(constant_weights(BackendKind::salient_object, true), (dir.path() / "bg.sksw").string());
    save_weights(chroma_skin_weights(), (dir.path() / "skin.sksw").string());
    ServiceConfig cfg;
    cfg.model_dir = (dir.path() / "model").string();
    cfg.salient_object_weights = (dir.path() / "bg.sksw").string();
    cfg.skin_region_weights = (dir.path() / "skin.sksw").string();
    const auto pipeline = build_pipeline(cfg);
    const auto r = pipeline->screen(ScreeningImage::filled(300, 300, 200, 140, 110), cfg.pipeline);
    CHECK(r.stage_trace[1].applied);
    CHECK(r.stage_trace[2].applied);

    cfg.skin_region_weights = (dir.path() / "bg.sksw").string();
    CHECK_THROWS_AS(build_pipeline(cfg), LoadError);
    cfg.model_dir.clear();
    CHECK_THROWS_AS(build_pipeline(cfg), LoadError);
  }
}
