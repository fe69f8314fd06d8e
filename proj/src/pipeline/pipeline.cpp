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

#include <filesystem>

#include "skinscreen/errors.hpp"
#include "skinscreen/pipeline.hpp"

namespace skinscreen {

std::string PipelineConfig::describe() const {
  std::string out;
  auto add = [&out](bool on, const char* name) {
    if (!on) return;
    if (!out.empty()) out += '+';
    out += name;
  };
  add(enable_restoration, "restoration");
  add(enable_background_removal, "background_removal");
  add(enable_skin_segmentation, "skin_segmentation");
  return out.empty() ? "classifier_only" : out;
}

Pipeline::Pipeline(std::shared_ptr<const Classifier> model, BackendPtr background_backend,
                   BackendPtr skin_backend, std::shared_ptr<const RestorationBackend> restoration_backend)
    : model_(std::move(model)),
      background_(std::move(background_backend)),
      skin_(std::move(skin_backend)),
      restorer_(std::move(restoration_backend)) {
  if (!model_) throw InvalidInput("pipeline requires a classifier");
}

PreprocessOutcome Pipeline::preprocess(const ScreeningImage& image, const PipelineConfig& config,
                                       PipelineMode mode) const {
  PreprocessOutcome out{image, {}};
  out.stage_trace.reserve(3);

  if (config.enable_restoration && mode == PipelineMode::inference) {
    auto restored = restore(out.image, config.restoration_policy, restorer_.get());
    out.image = std::move(restored.image);
    out.stage_trace.push_back(std::move(restored.decision));
  } else {
    out.stage_trace.push_back(StageDecision::not_requested(StageName::restoration));
  }

  if (config.enable_background_removal) {
    auto gated = gated_segment(out.image, background_.get(), config.background_gate, StageName::background_removal);
    out.image = std::move(gated.image);
    out.stage_trace.push_back(gated.decision);
  } else {
    out.stage_trace.push_back(StageDecision::not_requested(StageName::background_removal));
  }

  if (config.enable_skin_segmentation) {
    auto gated = gated_segment(out.image, skin_.get(), config.skin_gate, StageName::skin_segmentation);
    out.image = std::move(gated.image);
    out.stage_trace.push_back(gated.decision);
  } else {
    out.stage_trace.push_back(StageDecision::not_requested(StageName::skin_segmentation));
  }
  return out;
}

ClassificationResult Pipeline::screen(const ScreeningImage& image, const PipelineConfig& config) const {
  if (!config.model_version.empty() && config.model_version != model_->model_version()) {
    throw InvalidInput("pipeline serves model " + model_->model_version() + ", not " + config.model_version);
  }
  auto prepared = preprocess(image, config, PipelineMode::inference);
  ClassificationResult result = model_->predict(prepared.image);
  result.stage_trace = std::move(prepared.stage_trace);
  return result;
}

std::vector<PipelineConfig> ablation_configs(const PipelineConfig& base) {
  static constexpr bool rows[8][3] = {
      {false, false, false}, {true, false, false}, {false, true, false}, {false, false, true},
      {true, true, false},   {false, true, true},  {true, false, true},  {true, true, true},
  };
  std::vector<PipelineConfig> out;
  out.reserve(8);
  for (const auto& row : rows) {
    PipelineConfig c = base;
    c.enable_restoration = row[0];
    c.enable_background_removal = row[1];
    c.enable_skin_segmentation = row[2];
    out.push_back(c);
  }
  return out;
}

std::vector<LabeledImage> prepare_labeled_set(const DatasetManifest& manifest, Split split,
                                              const std::string& root, const Pipeline* pipeline,
                                              const PipelineConfig& config) {
  std::vector<LabeledImage> out;
  for (const auto& r : manifest.records()) {
    if (r.split != split) continue;
    const std::filesystem::path p(r.path);
    ScreeningImage image = load_image(p.is_absolute() ? p.string() : (std::filesystem::path(root) / p).string());
    if (pipeline != nullptr) image = pipeline->preprocess(image, config, PipelineMode::training).image;
    out.push_back({std::move(image), r.label});
  }
  return out;
}

}  // namespace skinscreen
