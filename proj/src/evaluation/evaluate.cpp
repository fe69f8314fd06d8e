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

#include <cstdio>
#include <filesystem>
#include <sstream>

#include <nlohmann/json.hpp>

#include "skinscreen/errors.hpp"
#include "skinscreen/evaluation.hpp"

namespace skinscreen {
namespace {

struct LoadedRecord {
  std::string id;
  Label label;
  std::optional<ScreeningImage> image;
  std::string error;
};

std::vector<LoadedRecord> load_records(const DatasetManifest& manifest, const std::string& root) {
  if (manifest.empty()) throw InvalidInput("cannot evaluate an empty manifest");
  std::vector<LoadedRecord> out;
  out.reserve(manifest.size());
  for (const auto& r : manifest.records()) {
    LoadedRecord lr{r.id, r.label, std::nullopt, {}};
    const std::filesystem::path p(r.path);
    try {
      lr.image = load_image(p.is_absolute() ? p.string() : (std::filesystem::path(root) / p).string());
    } catch (const std::exception& e) {
      lr.error = e.what();
    }
    out.push_back(std::move(lr));
  }
  return out;
}

MetricsReport evaluate_loaded(const Screener& screener, const std::vector<LoadedRecord>& records,
                              const PipelineConfig& config) {
  ConfusionMatrix cm;
  std::vector<SkippedRecord> skipped;
  for (const auto& r : records) {
    if (!r.image) {
      skipped.push_back({r.id, r.error});
      continue;
    }
    const ClassificationResult result = screener(*r.image, config);
    cm.add(r.label, result.label);
  }
  if (cm.total() == 0) throw InvalidInput("no record could be evaluated");
  MetricsReport report = weighted_metrics(cm);
  report.skipped = std::move(skipped);
  return report;
}

}  // namespace

MetricsReport evaluate(const Screener& screener, const DatasetManifest& manifest, const std::string& root,
                       const PipelineConfig& config) {
  return evaluate_loaded(screener, load_records(manifest, root), config);
}

AblationReport run_ablation(const AblationRequest& request, const DatasetManifest& manifest,
                            const std::string& root) {
  AblationReport report;
  report.dataset_id = sha256_hex(manifest.to_jsonl());
  const auto records = load_records(manifest, root);
  const auto configs = ablation_configs(request.base);

  auto run_row = [&](const ModelEntry& model, const PipelineConfig& config) {
    AblationRow row;
    row.config = config.describe();
    row.restoration = config.enable_restoration;
    row.background_removal = config.enable_background_removal;
    row.skin_segmentation = config.enable_skin_segmentation;
    row.model_version = model.version;
    if (!model.screener) {
      row.error = model.load_error.empty() ? "model unavailable" : model.load_error;
      return row;
    }
    try {
      row.accuracy = evaluate_loaded(model.screener, records, config).accuracy;
    } catch (const std::exception& e) {
      row.error = e.what();
    }
    return row;
  };

  if (request.alternate) report.rows.push_back(run_row(*request.alternate, configs.front()));
  if (request.subset.empty()) {
    for (const auto& c : configs) report.rows.push_back(run_row(request.primary, c));
  } else {
    for (int i : request.subset) {
      if (i < 0 || i >= static_cast<int>(configs.size())) throw InvalidInput("ablation config index out of range");
      report.rows.push_back(run_row(request.primary, configs[static_cast<std::size_t>(i)]));
    }
  }
  return report;
}

std::string AblationReport::to_json() const {
  nlohmann::ordered_json j;
  j["dataset_id"] = dataset_id;
  auto& rows_json = j["rows"] = nlohmann::ordered_json::array();
  for (const auto& r : rows) {
    nlohmann::ordered_json row;
    row["config"] = r.config;
    row["restoration"] = r.restoration;
    row["background_removal"] = r.background_removal;
    row["skin_segmentation"] = r.skin_segmentation;
    row["model_version"] = r.model_version;
    row["accuracy"] = r.accuracy ? nlohmann::ordered_json(*r.accuracy) : nlohmann::ordered_json(nullptr);
    if (!r.error.empty()) row["error"] = r.error;
    rows_json.push_back(std::move(row));
  }
  return j.dump();
}

std::string AblationReport::to_text() const {
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof(line), "%-28s %-4s %-4s %-4s %10s\n", "model", "rest", "bg", "skin", "accuracy");
  out << line;
  for (const auto& r : rows) {
    const char* mark[2] = {"", "x"};
    std::string acc = r.accuracy ? std::to_string(*r.accuracy * 100.0).substr(0, 6) + "%" : "error";
    std::snprintf(line, sizeof(line), "%-28s %-4s %-4s %-4s %10s\n", r.model_version.c_str(),
                  mark[r.restoration], mark[r.background_removal], mark[r.skin_segmentation], acc.c_str());
    out << line;
    if (!r.error.empty()) out << "    error: " << r.error << '\n';
  }
  out << "dataset " << dataset_id << '\n';
  return out.str();
}

}  // namespace skinscreen
