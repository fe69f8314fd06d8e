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
#include <string>
#include <vector>

#include "skinscreen/classifier.hpp"
#include "skinscreen/dataset.hpp"
#include "skinscreen/restoration.hpp"
#include "skinscreen/segmentation.hpp"

namespace skinscreen {

struct PipelineConfig {
  bool enable_restoration = true;
  bool enable_background_removal = true;
  bool enable_skin_segmentation = true;
  // Level-1 and level-2 gates are configured independently.
  GateConfig background_gate;
  GateConfig skin_gate;
  RestorationPolicy restoration_policy;
  // Model to classify with; empty selects the pipeline's default model.
  std::string model_version;

  // e.g. "restoration+background_removal", or "classifier_only".
  std::string describe() const;
};

// Training-mode preprocessing never runs restoration: models are trained on
// images at their original resolution.
enum class PipelineMode { inference, training };

struct PreprocessOutcome {
  ScreeningImage image;
  std::vector<StageDecision> stage_trace;  // always three entries, pipeline order
};

class Pipeline {
 public:
  Pipeline(std::shared_ptr<const Classifier> model, BackendPtr background_backend, BackendPtr skin_backend,
           std::shared_ptr<const RestorationBackend> restoration_backend = nullptr);

  // Restoration -> background removal -> skin segmentation.
  PreprocessOutcome preprocess(const ScreeningImage& image, const PipelineConfig& config,
                               PipelineMode mode = PipelineMode::inference) const;

  // Full chain including classification. Throws when the classifier fails.
  ClassificationResult screen(const ScreeningImage& image, const PipelineConfig& config) const;

  const std::string& model_version() const { return model_->model_version(); }
  const Classifier& model() const { return *model_; }

 private:
  std::shared_ptr<const Classifier> model_;
  BackendPtr background_;
  BackendPtr skin_;
  std::shared_ptr<const RestorationBackend> restorer_;
};

// The eight on/off combinations of the three preprocessing stages, ordered
// classifier-only first and full stack last:
// (-,-,-) (R,-,-) (-,B,-) (-,-,S) (R,B,-) (-,B,S) (R,-,S) (R,B,S).
std::vector<PipelineConfig> ablation_configs(const PipelineConfig& base = {});

// Loads every record of the given split, runs training-mode preprocessing
// and pairs the result with the record label.
std::vector<LabeledImage> prepare_labeled_set(const DatasetManifest& manifest, Split split,
                                              const std::string& root, const Pipeline* pipeline,
                                              const PipelineConfig& config);

}  // namespace skinscreen
