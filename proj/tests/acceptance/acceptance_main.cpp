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

#include <httplib.h>
#include <nlohmann/json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "skinscreen/errors.hpp"
#include "skinscreen/evaluation.hpp"
#include "skinscreen/service.hpp"
#include "skinscreen/simd.hpp"
#include "synthetic.hpp"

using namespace skinscreen;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  enum class Status { pass, fail, skip } status = Status::pass;
  std::string detail;
};

Outcome pass(std::string detail) { return {Outcome::Status::pass, std::move(detail)}; }
Outcome fail(std::string detail) { return {Outcome::Status::fail, std::move(detail)}; }

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

std::shared_ptr<const Classifier> g_toy_model;

std::shared_ptr<const Classifier> small_model(std::uint64_t seed) {
  BackboneSpec b = BackboneSpec::micro();
  b.resolution = 64;
  return Classifier::build(HeadSpec{}, b, false, {}, seed);
}

Outcome dataset_arithmetic() {
  const auto start = Clock::now();
  const auto originals = ingest(testing::synthetic_records(132, 180, Split::val, "orig"), [] {
                           IngestOptions o;
                           o.verify_files = false;
                           return o;
                         }())
                             .manifest;
  const auto balanced = balance(originals, Split::val, 7);
  std::size_t augmented_mp = 0;
  for (const auto& r : balanced.records()) {
    if (r.origin == Origin::augmented && r.label == Label::monkeypox) ++augmented_mp;
  }
  const auto divided = split(balanced, {0.65, 0.35}, 11);
  const std::size_t val = divided.count(Split::val, Label::monkeypox) + divided.count(Split::val, Label::others);
  const std::size_t test = divided.count(Split::test, Label::monkeypox) + divided.count(Split::test, Label::others);
  const double elapsed = seconds_since(start);
  const auto detail = fmt("312 records, +%zu augmented monkeypox, split %zu/%zu, %.2fs", augmented_mp, val, test, elapsed);
  const bool ok = originals.size() == 312 && augmented_mp == 48 && balanced.size() == 360 && val == 234 &&
                  test == 126 && elapsed < 10.0;
  return ok ? pass(detail) : fail(detail);
}

Outcome external_assembly() {
  const auto neg = testing::synthetic_records(0, 200, Split::train, "coco");
  const auto pos = testing::synthetic_records(132, 0, Split::train, "mp");
  const auto ext = assemble_external(neg, pos);
  bool original_only = true;
  for (const auto& r : ext.records()) original_only = original_only && r.origin == Origin::original;

  auto tainted = pos;
  ManifestRecord child = tainted[0];
  child.id = "mp_child";
  child.origin = Origin::augmented;
  child.parent_id = tainted[0].id;
  TransformDescriptor rotation;
  rotation.kind = TransformKind::rotation;
  rotation.rotation_deg = 10.0;
  child.transform = rotation;
  tainted.push_back(child);
  bool rejected = false;
  try {
    assemble_external(neg, tainted);
  } catch (const IngestError&) {
    rejected = true;
  }
  const auto detail = fmt("%zu records (%zu monkeypox / %zu others), augmented input rejected: %s", ext.size(),
                          ext.count(Split::external, Label::monkeypox), ext.count(Split::external, Label::others),
                          rejected ? "yes" : "no");
  const bool ok = ext.size() == 332 && ext.count(Split::external, Label::monkeypox) == 132 &&
                  ext.count(Split::external, Label::others) == 200 && original_only && rejected;
  return ok ? pass(detail) : fail(detail);
}

Outcome gate_semantics() {
  std::mt19937_64 rng(2024);
  const GateConfig gate;
  std::size_t violations = 0, bypassed = 0;
  for (int t = 0; t < 10000; ++t) {
    const int w = 1 + static_cast<int>(rng() % 24), h = 1 + static_cast<int>(rng() % 24);
    const std::size_t cells = static_cast<std::size_t>(w) * h;
    std::size_t black = 0;
    if (t % 2 == 0) {
      black = static_cast<std::size_t>(std::llround(0.87 * cells)) + (rng() % 3) - 1;
      black = std::min(black, cells);
    } else {
      black = rng() % (cells + 1);
    }
    std::vector<std::uint8_t> bits(cells, 1);
    std::fill(bits.begin(), bits.begin() + static_cast<std::ptrdiff_t>(black), 0);
    std::shuffle(bits.begin(), bits.end(), rng);
    const BinaryMask mask(w, h, bits);
    std::vector<std::uint8_t> px(cells * 3);
    for (auto& p : px) p = static_cast<std::uint8_t>(rng());
    const ScreeningImage image(w, h, px);
    const CallbackBackend backend("fixed", BackendKind::skin_region, [&](const ScreeningImage&) { return mask; });
    const auto out = gated_segment(image, &backend, gate, StageName::skin_segmentation);
    const bool should_bypass = static_cast<double>(black) / static_cast<double>(cells) > 0.87;
    bypassed += should_bypass ? 1 : 0;
    if (out.decision.applied == should_bypass) ++violations;
    if (should_bypass && !(out.image == image)) ++violations;
    if (!should_bypass && !(out.image == apply_mask(image, mask))) ++violations;
  }
  const auto detail = fmt("10000 masks, %zu bypassed, %zu violations", bypassed, violations);
  return violations == 0 ? pass(detail) : fail(detail);
}

Outcome weighted_metric_oracle() {
  std::mt19937_64 rng(99);
  double worst = 0.0;
  std::size_t recall_mismatch = 0;
  for (int t = 0; t < 1000; ++t) {
    ConfusionMatrix cm;
    for (auto& row : cm.counts) {
      for (auto& cell : row) cell = rng() % 60;
    }
    if (cm.total() == 0) cm.counts[0][0] = 1;
    const auto report = weighted_metrics(cm);
    const double n = static_cast<double>(cm.total());
    double wp = 0.0, wr = 0.0, wf = 0.0;
    for (int c = 0; c < 2; ++c) {
      const double tp = static_cast<double>(cm.counts[c][c]);
      const double actual = static_cast<double>(cm.counts[c][0] + cm.counts[c][1]);
      const double predicted = static_cast<double>(cm.counts[0][c] + cm.counts[1][c]);
      const double p = predicted > 0 ? tp / predicted : 0.0;
      const double r = actual > 0 ? tp / actual : 0.0;
      const double f = p + r > 0 ? 2 * p * r / (p + r) : 0.0;
      wp += actual / n * p;
      wr += actual / n * r;
      wf += actual / n * f;
    }
    worst = std::max({worst, std::fabs(report.weighted_precision - wp), std::fabs(report.weighted_recall - wr),
                      std::fabs(report.weighted_f1 - wf)});
    const double accuracy = static_cast<double>(cm.correct()) / n;
    if (std::fabs(report.weighted_recall - accuracy) > 1e-12 || std::fabs(report.accuracy - accuracy) > 1e-12) {
      ++recall_mismatch;
    }
  }
  const auto detail = fmt("1000 matrices, max deviation %.3g, recall/accuracy mismatches %zu", worst, recall_mismatch);
  return worst <= 1e-9 && recall_mismatch == 0 ? pass(detail) : fail(detail);
}

Outcome head_spec_conformance() {
  testing::TempDir dir("acceptance-head");
  auto model = Classifier::build(HeadSpec{}, BackboneSpec::preset("b0"), false, {}, 1);
  const auto image = testing::lesion_texture(Label::monkeypox, 1, 224);
  const nn::Tensor input = model->to_input(std::span(&image, 1));
  const auto probs = model->predict_probabilities(input);
  const bool shape_ok = input.shape() == std::vector<int>{1, 3, 224, 224} &&
                        probs.shape() == std::vector<int>{1, 2};
  const double sum = probs[0] + probs[1];

  model->save(dir.str());
  const auto bytes = read_file_bytes((dir.path() / "metadata.json").string());
  const auto meta = nlohmann::json::parse(bytes.begin(), bytes.end());
  const auto& h = meta.at("head_spec");
  const bool meta_ok = h.at("batch_norm").at("momentum").get<double>() == 0.99 &&
                       h.at("batch_norm").at("epsilon").get<double>() == 0.001 &&
                       h.at("dense").at("kernel_l2").get<double>() == 0.016 &&
                       h.at("dense").at("activity_l1").get<double>() == 0.006 &&
                       h.at("dense").at("bias_l1").get<double>() == 0.006 &&
                       h.at("dropout_rate").get<double>() == 0.45 && h.at("output").at("classes").get<int>() == 2 &&
                       meta.at("input_size") == nlohmann::json::array({224, 224});
  const auto detail = fmt("input [1,3,224,224], softmax sum %.9f, metadata %s", sum, meta_ok ? "matches" : "differs");
  return shape_ok && std::fabs(sum - 1.0) <= 1e-6 && meta_ok ? pass(detail) : fail(detail);
}

Outcome gradient_check() {
  const auto start = Clock::now();
  BackboneSpec b = BackboneSpec::micro();
  b.resolution = 64;
  auto model = Classifier::build(HeadSpec{}, b, false, {}, 21);
  std::vector<ScreeningImage> images;
  std::vector<int> targets;
  for (int i = 0; i < 4; ++i) {
    const Label label = i % 2 == 0 ? Label::monkeypox : Label::others;
    images.push_back(testing::lesion_texture(label, 40 + i, 64));
    targets.push_back(i % 2);
  }
  const auto input = model->to_input(images);
  const auto check = testing::head_gradient_check(*model, input, targets, 5);
  const double elapsed = seconds_since(start);
  const auto detail = fmt("weight %zu: analytic %.6g, numeric %.6g, relative error %.3g, %.1fs", check.index,
                          check.analytic, check.numeric, check.relative_error, elapsed);
  return check.relative_error <= 1e-2 && elapsed < 120.0 ? pass(detail) : fail(detail);
}

Outcome toy_training() {
  const auto start = Clock::now();
  BackboneSpec b = BackboneSpec::micro();
  b.resolution = 64;
  std::shared_ptr<Classifier> model = Classifier::build(HeadSpec{}, b, false, {}, 7);
  const Pipeline pipeline(model, testing::stub_background_backend(), testing::stub_skin_backend());
  const PipelineConfig config;

  auto prepare = [&](std::vector<LabeledImage> raw) {
    for (auto& x : raw) x.image = pipeline.preprocess(x.image, config, PipelineMode::training).image;
    return raw;
  };
  const auto train_set = prepare(testing::labeled_textures(100, 1000));
  const auto val_set = prepare(testing::labeled_textures(10, 3000));
  const auto test_set = testing::labeled_textures(30, 5000);

  TrainConfig tc;
  tc.input_size = 64;
  tc.batch_size = 16;
  tc.epochs = 10;
  tc.seed = 3;
  const auto history = train(*model, train_set, val_set, tc);

  std::size_t correct = 0;
  for (const auto& x : test_set) correct += pipeline.screen(x.image, config).label == x.label ? 1 : 0;
  const double accuracy = static_cast<double>(correct) / static_cast<double>(test_set.size());
  const double elapsed = seconds_since(start);
  g_toy_model = model;
  const auto detail = fmt("200 train / 60 test, %zu epochs, test accuracy %.4f, %.1fs", history.epochs.size(),
                          accuracy, elapsed);
  return accuracy >= 0.95 && history.epochs.size() <= 10 && elapsed < 900.0 ? pass(detail) : fail(detail);
}

Outcome ablation_structure() {
  testing::TempDir dir("acceptance-ablation");
  const auto records =
      testing::render_records(testing::synthetic_records(6, 6, Split::external, "abl"), dir.path(), 64);
  const DatasetManifest manifest(records);
  const auto model = g_toy_model ? g_toy_model : small_model(3);
  const auto pipeline =
      std::make_shared<Pipeline>(model, testing::stub_background_backend(), testing::stub_skin_backend());
  const auto alternate = std::make_shared<Pipeline>(small_model(4), nullptr, nullptr);

  AblationRequest request;
  request.primary = {model->model_version(),
                     [pipeline](const ScreeningImage& i, const PipelineConfig& c) { return pipeline->screen(i, c); },
                     {}};
  request.alternate = ModelEntry{
      "alternate-dataset",
      [alternate](const ScreeningImage& i, const PipelineConfig& c) { return alternate->screen(i, c); }, {}};

  const auto first = run_ablation(request, manifest, dir.str());
  const auto second = run_ablation(request, manifest, dir.str());

  const std::vector<std::string> layout = {"classifier_only",
                                           "classifier_only",
                                           "restoration",
                                           "background_removal",
                                           "skin_segmentation",
                                           "restoration+background_removal",
                                           "background_removal+skin_segmentation",
                                           "restoration+skin_segmentation",
                                           "restoration+background_removal+skin_segmentation"};
  bool layout_ok = first.rows.size() == layout.size();
  for (std::size_t i = 0; layout_ok && i < layout.size(); ++i) {
    layout_ok = first.rows[i].config == layout[i] && first.rows[i].accuracy.has_value();
  }
  layout_ok = layout_ok && first.rows[0].model_version == "alternate-dataset";
  const bool deterministic = first.to_json() == second.to_json();
  const auto detail = fmt("%zu rows, layout %s, repeat run %s", first.rows.size(), layout_ok ? "matches" : "differs",
                          deterministic ? "identical" : "differs");
  return layout_ok && deterministic ? pass(detail) : fail(detail);
}

std::set<std::string> listing(const std::filesystem::path& dir) {
  std::set<std::string> out;
  std::error_code ec;
  for (const auto& e : std::filesystem::recursive_directory_iterator(
           dir, std::filesystem::directory_options::skip_permission_denied, ec)) {
    out.insert(e.path().string());
  }
  return out;
}

Outcome service_contract() {
  const auto start = Clock::now();
  testing::TempDir work("acceptance-service");
  ServiceConfig cfg;
  cfg.host = "127.0.0.1";
  cfg.compressor.max_upload_bytes = 300000;
  cfg.audit_dir = (work.path() / "audit").string();
  const auto model = g_toy_model ? g_toy_model : small_model(3);
  const auto pipeline =
      std::make_shared<Pipeline>(model, testing::stub_background_backend(), testing::stub_skin_backend());

  const auto before = listing(std::filesystem::current_path());
  std::vector<std::string> problems;
  {
    ScreeningService service(pipeline, cfg);
    const int port = service.bind_ephemeral();
    if (port <= 0) return fail("could not bind a local port");
    std::thread server([&] { service.listen_after_bind(); });
    httplib::Client client("127.0.0.1", port);
    client.set_read_timeout(60, 0);
    for (int i = 0; i < 200 && !client.Get("/v1/health"); ++i) {
      std::this_thread::sleep_for(std::chrono::milliseconds(10));
    }
    auto post = [&](const std::string& body) {
      httplib::MultipartFormDataItems items{{"image", body, "upload", "application/octet-stream"}};
      return client.Post("/v1/screen", items);
    };

    const auto jpeg = encode_image(resize(testing::lesion_texture(Label::monkeypox, 8, 96), 640, 480),
                                   ImageFormat::jpeg, 90);
    auto ok = post(std::string(jpeg.begin(), jpeg.end()));
    if (!ok || ok->status != 200) {
      problems.push_back("valid upload not accepted");
    } else {
      const auto j = nlohmann::json::parse(ok->body);
      const bool schema = j.contains("label") && j["probabilities"].size() == 2 && j["stage_trace"].size() == 3 &&
                          j.contains("model_version") && j.contains("request_id") && j.contains("timing_ms");
      const double sum = j["probabilities"][0].get<double>() + j["probabilities"][1].get<double>();
      if (!schema || std::fabs(sum - 1.0) > 1e-9) problems.push_back("response schema mismatch");
    }
    auto big = post(std::string(400000, 'x'));
    if (!big || big->status != 413) problems.push_back("oversized payload not rejected with 413");
    auto text = post("this is not an image");
    if (!text || text->status != 415) problems.push_back("non-image payload not rejected with 415");

    service.stop();
    server.join();
  }
  if (testing::count_files(work.path()) != 0) problems.push_back("files written with persistence disabled");
  if (listing(std::filesystem::current_path()) != before) problems.push_back("working directory changed");
  const double elapsed = seconds_since(start);
  if (elapsed >= 60.0) problems.push_back("integration took over a minute");
  std::string detail = fmt("200/413/415 round trip, no stored images, %.1fs", elapsed);
  for (const auto& p : problems) detail += "; " + p;
  return problems.empty() ? pass(detail) : fail(detail);
}

Outcome full_reproduction() {
  return {Outcome::Status::skip, "requires the public image dataset and pretrained backbone weights"};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"dataset-arithmetic", dataset_arithmetic},
      {"external-assembly", external_assembly},
      {"gate-semantics", gate_semantics},
      {"weighted-metric-oracle", weighted_metric_oracle},
      {"head-spec-conformance", head_spec_conformance},
      {"gradient-check", gradient_check},
      {"toy-training", toy_training},
      {"ablation-structure", ablation_structure},
      {"service-contract", service_contract},
      {"full-reproduction", full_reproduction},
  };
  std::printf("kernels: %s\n", std::string(simd::kernels().name).c_str());
  int failures = 0;
  for (const auto& [name, run] : criteria) {
    Outcome outcome;
    try {
      outcome = run();
    } catch (const std::exception& e) {
      outcome = fail(std::string("exception: ") + e.what());
    }
    const char* tag = outcome.status == Outcome::Status::pass   ? "PASS"
                      : outcome.status == Outcome::Status::skip ? "SKIP"
                                                                : "FAIL";
    if (outcome.status == Outcome::Status::fail) ++failures;
    std::printf("%s %-24s %s\n", tag, name.c_str(), outcome.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d failure(s)\n", failures);
  return failures == 0 ? 0 : 1;
}
