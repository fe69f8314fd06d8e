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

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "skinscreen/classifier.hpp"
#include "skinscreen/dataset.hpp"
#include "skinscreen/errors.hpp"
#include "skinscreen/evaluation.hpp"
#include "skinscreen/pipeline.hpp"
#include "skinscreen/segmentation.hpp"
#include "skinscreen/service.hpp"
#include "skinscreen/simd.hpp"

namespace {

using namespace skinscreen;

std::string read_text(const std::string& path) {
  const auto bytes = read_file_bytes(path);
  return std::string(bytes.begin(), bytes.end());
}

std::vector<ManifestRecord> read_records(const std::string& path) { return parse_manifest_records(read_text(path)); }

void write_manifest(const DatasetManifest& manifest, const std::string& out) {
  if (out.empty() || out == "-") {
    std::cout << manifest.to_jsonl();
  } else {
    manifest.save(out);
    std::cerr << "wrote " << manifest.size() << " records to " << out << "\n";
  }
}

DatasetManifest subset(const DatasetManifest& manifest, const std::optional<Split>& split) {
  if (!split) return manifest;
  std::vector<ManifestRecord> kept;
  for (const auto& r : manifest.records()) {
    if (r.split == *split) kept.push_back(r);
  }
  return DatasetManifest(std::move(kept));
}

struct StageFlags {
  bool no_restoration = false;
  bool no_bg_removal = false;
  bool no_skin_seg = false;
  std::string salient_weights;
  std::string skin_weights;

  void attach(CLI::App* cmd) {
    cmd->add_flag("--no-restoration", no_restoration, "Disable the restoration unit");
    cmd->add_flag("--no-bg-removal", no_bg_removal, "Disable background removal");
    cmd->add_flag("--no-skin-seg", no_skin_seg, "Disable skin segmentation");
    cmd->add_option("--salient-weights", salient_weights, "Background-removal weights (path or URL)");
    cmd->add_option("--skin-weights", skin_weights, "Skin-segmentation weights (path or URL)");
  }

  PipelineConfig config() const {
    PipelineConfig c;
    c.enable_restoration = !no_restoration;
    c.enable_background_removal = !no_bg_removal;
    c.enable_skin_segmentation = !no_skin_seg;
    return c;
  }

  std::shared_ptr<Pipeline> pipeline(std::shared_ptr<const Classifier> model) const {
    BackendPtr bg, skin;
    if (!salient_weights.empty()) bg = load_backend(BackendKind::salient_object, salient_weights);
    if (!skin_weights.empty()) skin = load_backend(BackendKind::skin_region, skin_weights);
    return std::make_shared<Pipeline>(std::move(model), std::move(bg), std::move(skin));
  }
};

Screener screener_for(std::shared_ptr<const Pipeline> pipeline) {
  return [pipeline](const ScreeningImage& image, const PipelineConfig& config) {
    return pipeline->screen(image, config);
  };
}

void add_dataset_commands(CLI::App& app) {
  auto* dataset = app.add_subcommand("dataset", "Dataset construction and auditing");
  dataset->require_subcommand(1);

  static std::string manifest, out, root = ".", split_name = "train", negatives, positives;
  static std::uint64_t seed = 0;
  static double ratio = 0.65;
  static bool no_verify = false;

  auto* ingest_cmd = dataset->add_subcommand("ingest", "Validate records, checksum files and detect duplicates");
  ingest_cmd->add_option("--manifest", manifest, "Input manifest (JSONL)")->required();
  ingest_cmd->add_option("--root", root, "Directory record paths are relative to");
  ingest_cmd->add_option("--out", out, "Output manifest (stdout when omitted)");
  ingest_cmd->add_flag("--no-verify", no_verify, "Skip file existence, decoding and checksum checks");
  ingest_cmd->callback([] {
    IngestOptions opts;
    opts.root = root;
    opts.verify_files = !no_verify;
    const IngestResult result = ingest(read_records(manifest), opts);
    for (const auto& group : result.duplicate_checksums) {
      std::cerr << "duplicate content:";
      for (const auto& id : group) std::cerr << ' ' << id;
      std::cerr << "\n";
    }
    write_manifest(result.manifest, out);
  });

  auto* augment_cmd = dataset->add_subcommand("augment", "Render pending augmented records to image files");
  augment_cmd->add_option("--manifest", manifest, "Input manifest")->required();
  augment_cmd->add_option("--root", root, "Dataset root directory");
  augment_cmd->add_option("--out", out, "Output manifest (stdout when omitted)");
  augment_cmd->callback([] { write_manifest(materialize_augmented(DatasetManifest::load(manifest), root), out); });

  auto* balance_cmd = dataset->add_subcommand("balance", "Append augmented minority records until classes are equal");
  balance_cmd->add_option("--manifest", manifest, "Input manifest")->required();
  balance_cmd->add_option("--split", split_name, "Split to balance (train, val, test)");
  balance_cmd->add_option("--seed", seed, "Transform seed");
  balance_cmd->add_option("--out", out, "Output manifest (stdout when omitted)");
  balance_cmd->callback(
      [] { write_manifest(balance(DatasetManifest::load(manifest), parse_split(split_name), seed), out); });

  auto* split_cmd = dataset->add_subcommand("split", "Stratified validation/test partition");
  split_cmd->add_option("--manifest", manifest, "Input manifest")->required();
  split_cmd->add_option("--ratio", ratio, "Validation share, e.g. 0.65")->check(CLI::Range(0.0, 1.0));
  split_cmd->add_option("--seed", seed, "Shuffle seed");
  split_cmd->add_option("--out", out, "Output manifest (stdout when omitted)");
  split_cmd->callback([] { write_manifest(split(DatasetManifest::load(manifest), {ratio, 1.0 - ratio}, seed), out); });

  auto* external_cmd = dataset->add_subcommand("assemble-external", "Build the external test manifest");
  external_cmd->add_option("--negatives", negatives, "Manifest of negative images")->required();
  external_cmd->add_option("--positives", positives, "Manifest of original positive images")->required();
  external_cmd->add_option("--out", out, "Output manifest (stdout when omitted)");
  external_cmd->callback(
      [] { write_manifest(assemble_external(read_records(negatives), read_records(positives)), out); });

  auto* audit_cmd = dataset->add_subcommand("audit", "Per-split class counts and leakage checks");
  audit_cmd->add_option("--manifest", manifest, "Manifest to audit")->required();
  audit_cmd->callback([] {
    const AuditReport report = audit(read_records(manifest));
    std::cout << report.to_text();
    if (!report.lineage_violations.empty()) throw IngestError("lineage violations found");
  });
}

void add_backend_commands(CLI::App& app) {
  auto* backend = app.add_subcommand("backend", "Segmentation weights utilities");
  backend->require_subcommand(1);
  static std::string kind = "skin_region", preset = "chroma", out;
  auto* init = backend->add_subcommand("init", "Write a built-in segmentation weights artifact");
  init->add_option("--kind", kind, "salient_object or skin_region");
  init->add_option("--preset", preset, "chroma, keep-all or drop-all")
      ->check(CLI::IsMember({"chroma", "keep-all", "drop-all"}));
  init->add_option("--out", out, "Output file")->required();
  init->callback([] {
    const BackendKind k = parse_backend_kind(kind);
    SegmentationWeights w;
    if (preset == "chroma") {
      w = chroma_skin_weights();
      w.kind = k;
    } else {
      w = constant_weights(k, preset == "keep-all");
    }
    save_weights(w, out);
    std::cerr << "wrote " << w.name << " (" << to_string(k) << ") to " << out << "\n";
  });
}

void add_train_command(CLI::App& app) {
  static std::string manifest, root = ".", out, backbone = "b0", pretrained, val_split = "val";
  static TrainConfig cfg;
  static int resolution = 0;
  static StageFlags flags;
  auto* cmd = app.add_subcommand("train", "Train a classifier on a manifest");
  cmd->add_option("--manifest", manifest, "Dataset manifest")->required();
  cmd->add_option("--root", root, "Dataset root directory");
  cmd->add_option("--out", out, "Model artifact directory")->required();
  cmd->add_option("--backbone", backbone, "b0..b7 or micro");
  cmd->add_option("--pretrained", pretrained, "Raw float32 backbone weights");
  cmd->add_option("--resolution", resolution, "Override the backbone input resolution");
  cmd->add_option("--epochs", cfg.epochs, "Epochs");
  cmd->add_option("--batch", cfg.batch_size, "Batch size");
  cmd->add_option("--lr", cfg.learning_rate, "Initial learning rate");
  cmd->add_option("--lr-decay", cfg.lr_decay, "Per-epoch learning-rate factor");
  cmd->add_option("--seed", cfg.seed, "Seed for initialisation and shuffling");
  cmd->add_option("--val-split", val_split, "Split used for checkpoint selection");
  flags.attach(cmd);
  cmd->callback([] {
    const DatasetManifest m = DatasetManifest::load(manifest);
    BackboneSpec spec = BackboneSpec::preset(backbone);
    if (resolution > 0) spec.resolution = resolution;
    cfg.input_size = spec.resolution;
    std::shared_ptr<Classifier> model = Classifier::build(HeadSpec{}, spec, !pretrained.empty(), pretrained, cfg.seed);
    const auto pipeline = flags.pipeline(model);
    const PipelineConfig pc = flags.config();
    const auto train_set = prepare_labeled_set(m, Split::train, root, pipeline.get(), pc);
    const auto val_set = prepare_labeled_set(m, parse_split(val_split), root, pipeline.get(), pc);
    std::cerr << "train " << train_set.size() << " / " << val_split << " " << val_set.size() << " images\n";
    const TrainHistory history = train(*model, train_set, val_set, cfg, [](const EpochStats& e) {
      std::cerr << "epoch " << e.epoch + 1 << " lr " << e.learning_rate << " loss " << e.train_loss << " acc "
                << e.train_accuracy << " val_loss " << e.val_loss << " val_acc " << e.val_accuracy << "\n";
    });
    model->save(out, cfg, sha256_file(manifest));
    std::cerr << "best epoch " << history.best_epoch + 1 << "; saved " << model->model_version() << " to " << out
              << "\n";
  });
}

void add_screen_command(CLI::App& app) {
  static std::string image_path, model_dir;
  static StageFlags flags;
  auto* cmd = app.add_subcommand("screen", "Screen a single image");
  cmd->add_option("--image", image_path, "PNG or JPEG image")->required();
  cmd->add_option("--model", model_dir, "Model artifact directory")->required();
  flags.attach(cmd);
  cmd->callback([] {
    const auto pipeline = flags.pipeline(Classifier::load(model_dir));
    const ClassificationResult r = pipeline->screen(load_image(image_path), flags.config());
    ScreenResponse response;
    response.label = r.label;
    response.probabilities = r.probabilities;
    response.stage_trace = r.stage_trace;
    response.model_version = r.model_version;
    response.request_id = "local";
    std::cout << response.to_json() << "\n";
  });
}

void add_evaluation_commands(CLI::App& app) {
  static std::string manifest, root = ".", model_dir, alternate_dir, split_name;
  static bool as_json = false;
  static StageFlags flags;

  auto* eval = app.add_subcommand("evaluate", "Weighted precision, recall and F1 over a manifest");
  eval->add_option("--manifest", manifest, "Dataset manifest")->required();
  eval->add_option("--root", root, "Dataset root directory");
  eval->add_option("--model", model_dir, "Model artifact directory")->required();
  eval->add_option("--split", split_name, "Only evaluate this split");
  eval->add_flag("--json", as_json, "Emit JSON instead of a table");
  flags.attach(eval);
  eval->callback([] {
    std::optional<Split> s;
    if (!split_name.empty()) s = parse_split(split_name);
    const DatasetManifest m = subset(DatasetManifest::load(manifest), s);
    const auto pipeline = flags.pipeline(Classifier::load(model_dir));
    const MetricsReport report = evaluate(screener_for(pipeline), m, root, flags.config());
    std::cout << (as_json ? report.to_json() + "\n" : report.to_text());
  });

  auto* ablate = app.add_subcommand("ablate", "Accuracy for every preprocessing stage combination");
  ablate->add_option("--manifest", manifest, "Dataset manifest")->required();
  ablate->add_option("--root", root, "Dataset root directory");
  ablate->add_option("--model", model_dir, "Model artifact directory")->required();
  ablate->add_option("--alternate", alternate_dir, "Model trained on an alternative dataset");
  ablate->add_option("--split", split_name, "Only evaluate this split");
  ablate->add_flag("--json", as_json, "Emit JSON instead of a table");
  flags.attach(ablate);
  ablate->callback([] {
    std::optional<Split> s;
    if (!split_name.empty()) s = parse_split(split_name);
    const DatasetManifest m = subset(DatasetManifest::load(manifest), s);
    const auto entry = [](const std::string& dir) {
      ModelEntry e;
      try {
        const auto pipeline = flags.pipeline(Classifier::load(dir));
        e.version = pipeline->model_version();
        e.screener = screener_for(pipeline);
      } catch (const Error& err) {
        e.version = dir;
        e.load_error = err.what();
      }
      return e;
    };
    AblationRequest request;
    request.primary = entry(model_dir);
    if (!alternate_dir.empty()) request.alternate = entry(alternate_dir);
    request.base = flags.config();
    const AblationReport report = run_ablation(request, m, root);
    std::cout << (as_json ? report.to_json() + "\n" : report.to_text());
  });
}

void add_serve_command(CLI::App& app) {
  static std::string config_path;
  static int port = 0;
  auto* cmd = app.add_subcommand("serve", "Run the HTTP screening service");
  cmd->add_option("--config", config_path, "Service configuration (JSON)");
  cmd->add_option("--port", port, "Listen port (overrides config and environment)");
  cmd->callback([] {
    ServiceConfig config = load_service_config(config_path);
    if (port > 0) config.port = port;
    ScreeningService service(build_pipeline(config), config);
    std::cerr << "skinscreen listening on " << config.host << ":" << config.port << " (kernels "
              << simd::kernels().name << ")\n";
    if (!service.listen()) throw Error("could not bind " + config.host + ":" + std::to_string(config.port));
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"skinscreen: staged skin-lesion screening"};
  app.require_subcommand(1);
  add_dataset_commands(app);
  add_backend_commands(app);
  add_train_command(app);
  add_screen_command(app);
  add_evaluation_commands(app);
  add_serve_command(app);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const skinscreen::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "fatal: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
