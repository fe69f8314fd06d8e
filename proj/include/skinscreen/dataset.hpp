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
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "skinscreen/imaging.hpp"

namespace skinscreen {

enum class Label { monkeypox, others };
enum class Split { train, val, test, external };
enum class Origin { original, augmented };

std::string_view to_string(Label label);
std::string_view to_string(Split split);
std::string_view to_string(Origin origin);
Label parse_label(std::string_view text);
Split parse_split(std::string_view text);
Origin parse_origin(std::string_view text);

enum class TransformKind { rotation, translation, noise_injection, color_space_shift };
std::string_view to_string(TransformKind kind);
TransformKind parse_transform_kind(std::string_view text);

// Augmentation parameter bounds.
struct TransformBounds {
  static constexpr double max_rotation_deg = 40.0;
  static constexpr double max_translation = 0.2;
  static constexpr double max_noise_variance = 0.05;
  static constexpr double max_channel_shift = 20.0 / 255.0;
};

// One geometric, noise or colour-shift transform. Only the fields of the
// selected kind are meaningful; the rest stay zero.
struct TransformDescriptor {
  TransformKind kind = TransformKind::rotation;
  double rotation_deg = 0.0;
  double dx = 0.0;  // fraction of width
  double dy = 0.0;  // fraction of height
  double noise_variance = 0.0;  // on the [0,1] intensity scale
  std::array<double, 3> channel_shift{};  // per RGB channel, [0,1] scale
  std::uint64_t seed = 0;

  // Throws InvalidTransform when a parameter is outside TransformBounds.
  void validate() const;

  friend bool operator==(const TransformDescriptor&, const TransformDescriptor&) = default;
};

struct ManifestRecord {
  std::string id;
  std::string path;
  Label label = Label::others;
  Split split = Split::train;
  Origin origin = Origin::original;
  std::optional<std::string> parent_id;
  std::optional<TransformDescriptor> transform;
  std::string source_tag;
  // SHA-256 of the file bytes. Empty for augmented records not yet rendered.
  std::string checksum;

  friend bool operator==(const ManifestRecord&, const ManifestRecord&) = default;
};

using ClassCounts = std::map<Split, std::map<Label, std::size_t>>;

class DatasetManifest {
 public:
  DatasetManifest() = default;
  // Validates ids, parent links and lineage; throws IngestError listing offenders.
  explicit DatasetManifest(std::vector<ManifestRecord> records);

  const std::vector<ManifestRecord>& records() const noexcept { return records_; }
  std::size_t size() const noexcept { return records_.size(); }
  bool empty() const noexcept { return records_.empty(); }
  const ManifestRecord* find(std::string_view id) const;

  ClassCounts class_counts() const;
  std::size_t count(Split split, Label label) const;
  std::size_t count(Split split) const;

  // One JSON object per line, UTF-8.
  std::string to_jsonl() const;
  static DatasetManifest from_jsonl(std::string_view text);
  void save(const std::string& path) const;
  static DatasetManifest load(const std::string& path);

  friend bool operator==(const DatasetManifest& a, const DatasetManifest& b) {
    return a.records_ == b.records_;
  }

 private:
  std::vector<ManifestRecord> records_;
  std::map<std::string, std::size_t, std::less<>> index_;
};

// Parses manifest lines without validating them as a whole.
std::vector<ManifestRecord> parse_manifest_records(std::string_view text);

// Lineage violations (child split or label differing from its parent,
// unresolved parents, inconsistent origin/parent/transform). Empty when clean.
std::vector<std::string> lineage_violations(const std::vector<ManifestRecord>& records);

struct IngestOptions {
  // Directory relative record paths resolve against.
  std::string root = ".";
  // Check each file exists and decodes, and fill in or verify checksums.
  bool verify_files = true;
};

struct IngestResult {
  DatasetManifest manifest;
  // Groups of record ids that share identical file content.
  std::vector<std::vector<std::string>> duplicate_checksums;
};

// Throws IngestError listing every offending record.
IngestResult ingest(std::vector<ManifestRecord> records, const IngestOptions& options = {});

// Deterministic for a given (image, transform). Output dimensions equal input.
ScreeningImage augment(const ScreeningImage& image, const TransformDescriptor& transform);

// Draws one in-bounds transform of a uniformly chosen kind.
TransformDescriptor draw_transform(std::uint64_t seed);

// Appends augmented minority-class children to the given split until both
// classes have the same count. Parents are the minority originals of that
// split, cycled round-robin in manifest order.
DatasetManifest balance(const DatasetManifest& manifest, Split split, std::uint64_t seed);

// Stratified partition of every val/test-tagged record into val and test.
// Augmented children follow their parents. ratio.first + ratio.second must be 1.
DatasetManifest split(const DatasetManifest& manifest, std::pair<double, double> ratio,
                      std::uint64_t seed);

// Per-class validation targets for a class of n images: total validation
// count is round(N * ratio) with ties to validation; largest remainder across
// classes.
std::map<Label, std::size_t> stratified_targets(const std::map<Label, std::size_t>& class_sizes,
                                                double val_ratio);

// Combines original-only negatives and positives into one external-split manifest.
DatasetManifest assemble_external(const std::vector<ManifestRecord>& negatives,
                                  const std::vector<ManifestRecord>& positives);

// Writes the image of every augmented record that has no checksum yet by
// applying its transform to the parent's image, and fills in the checksum.
DatasetManifest materialize_augmented(const DatasetManifest& manifest, const std::string& root);

struct AuditReport {
  ClassCounts counts;
  std::vector<std::string> lineage_violations;
  std::vector<std::string> notes;
  std::string to_text() const;
};

AuditReport audit(const std::vector<ManifestRecord>& records);
AuditReport audit(const DatasetManifest& manifest);

}  // namespace skinscreen
