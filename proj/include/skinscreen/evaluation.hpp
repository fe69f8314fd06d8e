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
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "skinscreen/classifier.hpp"
#include "skinscreen/dataset.hpp"
#include "skinscreen/pipeline.hpp"

namespace skinscreen {

// Binary confusion matrix indexed [actual][predicted], class 0 = monkeypox.
struct ConfusionMatrix {
  std::array<std::array<std::size_t, 2>, 2> counts{};

  void add(Label actual, Label predicted);
  std::size_t total() const;
  std::size_t correct() const { return counts[0][0] + counts[1][1]; }
  std::size_t true_positive(Label c) const;
  std::size_t false_positive(Label c) const;
  std::size_t false_negative(Label c) const;
  std::size_t support(Label c) const;
};

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;
};

struct SkippedRecord {
  std::string id;
  std::string reason;
};

struct MetricsReport {
  double weighted_precision = 0.0;
  double weighted_recall = 0.0;
  double weighted_f1 = 0.0;
  double accuracy = 0.0;
  std::map<Label, ClassMetrics> per_class;
  std::size_t n_evaluated = 0;
  ConfusionMatrix confusion;
  std::vector<SkippedRecord> skipped;

  std::string to_json() const;
  std::string to_text() const;
};

// Per-class precision/recall/F1 and their support-weighted averages. A class
// with a zero denominator contributes 0 for that metric. Throws InvalidInput
// on an empty matrix.
MetricsReport weighted_metrics(const ConfusionMatrix& cm);

using Screener = std::function<ClassificationResult(const ScreeningImage&, const PipelineConfig&)>;

// Screens every record once. Records whose image cannot be read are listed
// in skipped and excluded from the counts. Throws InvalidInput when the
// manifest is empty or nothing could be evaluated.
MetricsReport evaluate(const Screener& screener, const DatasetManifest& manifest, const std::string& root,
                       const PipelineConfig& config);

struct ModelEntry {
  std::string version;
  Screener screener;       // empty when the artifact could not be loaded
  std::string load_error;  // reason, when screener is empty
};

struct AblationRow {
  std::string config;  // PipelineConfig::describe()
  bool restoration = false;
  bool background_removal = false;
  bool skin_segmentation = false;
  std::string model_version;
  std::optional<double> accuracy;
  std::string error;
};

struct AblationReport {
  std::string dataset_id;  // SHA-256 of the manifest text
  std::vector<AblationRow> rows;

  std::string to_json() const;
  std::string to_text() const;
};

struct AblationRequest {
  ModelEntry primary;
  // Model trained on an alternative dataset, evaluated classifier-only in
  // the first row. Omitted when not set.
  std::optional<ModelEntry> alternate;
  PipelineConfig base;
  // Indices into ablation_configs() to run; empty runs all eight.
  std::vector<int> subset;
};

AblationReport run_ablation(const AblationRequest& request, const DatasetManifest& manifest,
                            const std::string& root);

}  // namespace skinscreen
