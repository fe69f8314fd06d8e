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

#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "skinscreen/dataset.hpp"
#include "skinscreen/errors.hpp"

namespace skinscreen {

using ordered_json = nlohmann::ordered_json;

std::string_view to_string(Label label) {
  return label == Label::monkeypox ? "monkeypox" : "others";
}

std::string_view to_string(Split split) {
  switch (split) {
    case Split::train: return "train";
    case Split::val: return "val";
    case Split::test: return "test";
    case Split::external: return "external";
  }
  return "unknown";
}

std::string_view to_string(Origin origin) {
  return origin == Origin::original ? "original" : "augmented";
}

std::string_view to_string(TransformKind kind) {
  switch (kind) {
    case TransformKind::rotation: return "rotation";
    case TransformKind::translation: return "translation";
    case TransformKind::noise_injection: return "noise_injection";
    case TransformKind::color_space_shift: return "color_space_shift";
  }
  return "unknown";
}

Label parse_label(std::string_view text) {
  if (text == "monkeypox") return Label::monkeypox;
  if (text == "others") return Label::others;
  throw InvalidInput("unknown label: " + std::string(text));
}

Split parse_split(std::string_view text) {
  if (text == "train") return Split::train;
  if (text == "val") return Split::val;
  if (text == "test") return Split::test;
  if (text == "external") return Split::external;
  throw InvalidInput("unknown split: " + std::string(text));
}

Origin parse_origin(std::string_view text) {
  if (text == "original") return Origin::original;
  if (text == "augmented") return Origin::augmented;
  throw InvalidInput("unknown origin: " + std::string(text));
}

TransformKind parse_transform_kind(std::string_view text) {
  if (text == "rotation") return TransformKind::rotation;
  if (text == "translation") return TransformKind::translation;
  if (text == "noise_injection") return TransformKind::noise_injection;
  if (text == "color_space_shift") return TransformKind::color_space_shift;
  throw InvalidTransform("unknown transform kind: " + std::string(text));
}

namespace {

ordered_json transform_to_json(const TransformDescriptor& t) {
  ordered_json j;
  j["kind"] = to_string(t.kind);
  switch (t.kind) {
    case TransformKind::rotation: j["degrees"] = t.rotation_deg; break;
    case TransformKind::translation:
      j["dx"] = t.dx;
      j["dy"] = t.dy;
      break;
    case TransformKind::noise_injection: j["variance"] = t.noise_variance; break;
    case TransformKind::color_space_shift:
      j["shift"] = {t.channel_shift[0], t.channel_shift[1], t.channel_shift[2]};
      break;
  }
  j["seed"] = t.seed;
  return j;
}

TransformDescriptor transform_from_json(const ordered_json& j) {
  TransformDescriptor t;
  t.kind = parse_transform_kind(j.at("kind").get<std::string>());
  t.rotation_deg = j.value("degrees", 0.0);
  t.dx = j.value("dx", 0.0);
  t.dy = j.value("dy", 0.0);
  t.noise_variance = j.value("variance", 0.0);
  if (j.contains("shift")) {
    const auto& s = j.at("shift");
    if (!s.is_array() || s.size() != 3) throw InvalidTransform("shift must have 3 entries");
    for (std::size_t c = 0; c < 3; ++c) t.channel_shift[c] = s.at(c).get<double>();
  }
  t.seed = j.value("seed", std::uint64_t{0});
  return t;
}

ordered_json record_to_json(const ManifestRecord& r) {
  ordered_json j;
  j["id"] = r.id;
  j["path"] = r.path;
  j["label"] = to_string(r.label);
  j["split"] = to_string(r.split);
  j["origin"] = to_string(r.origin);
  j["parent_id"] = r.parent_id ? ordered_json(*r.parent_id) : ordered_json(nullptr);
  j["transform"] = r.transform ? transform_to_json(*r.transform) : ordered_json(nullptr);
  j["source_tag"] = r.source_tag;
  j["checksum"] = r.checksum;
  return j;
}

ManifestRecord record_from_json(const ordered_json& j) {
  ManifestRecord r;
  r.id = j.at("id").get<std::string>();
  r.path = j.at("path").get<std::string>();
  r.label = parse_label(j.at("label").get<std::string>());
  r.split = parse_split(j.at("split").get<std::string>());
  r.origin = parse_origin(j.value("origin", std::string("original")));
  if (j.contains("parent_id") && !j.at("parent_id").is_null()) {
    r.parent_id = j.at("parent_id").get<std::string>();
  }
  if (j.contains("transform") && !j.at("transform").is_null()) {
    r.transform = transform_from_json(j.at("transform"));
  }
  r.source_tag = j.value("source_tag", std::string());
  r.checksum = j.value("checksum", std::string());
  return r;
}

}  // namespace

std::vector<std::string> lineage_violations(const std::vector<ManifestRecord>& records) {
  std::map<std::string_view, const ManifestRecord*> by_id;
  for (const auto& r : records) by_id.emplace(r.id, &r);
  std::vector<std::string> out;
  for (const auto& r : records) {
    const bool augmented = r.origin == Origin::augmented;
    if (augmented != r.parent_id.has_value() || augmented != r.transform.has_value()) {
      out.push_back(r.id + ": origin, parent_id and transform disagree");
    }
    if (!r.parent_id) continue;
    const auto it = by_id.find(*r.parent_id);
    if (it == by_id.end()) {
      out.push_back(r.id + ": parent " + *r.parent_id + " not found");
      continue;
    }
    if (it->second->split != r.split) {
      out.push_back(r.id + ": split " + std::string(to_string(r.split)) + " differs from parent split " +
                    std::string(to_string(it->second->split)));
    }
    if (it->second->label != r.label) {
      out.push_back(r.id + ": label differs from parent label");
    }
  }
  return out;
}

DatasetManifest::DatasetManifest(std::vector<ManifestRecord> records) : records_(std::move(records)) {
  std::vector<std::string> problems;
  for (std::size_t i = 0; i < records_.size(); ++i) {
    const auto& r = records_[i];
    if (r.id.empty()) problems.push_back("record #" + std::to_string(i) + ": empty id");
    if (!index_.emplace(r.id, i).second) problems.push_back(r.id + ": duplicate id");
    if (r.transform) {
      try {
        r.transform->validate();
      } catch (const InvalidTransform& e) {
        problems.push_back(r.id + ": " + e.what());
      }
    }
  }
  for (auto& v : lineage_violations(records_)) problems.push_back(std::move(v));
  if (!problems.empty()) {
    std::ostringstream msg;
    msg << "manifest rejected (" << problems.size() << " problem(s)):";
    for (const auto& p : problems) msg << "\n  " << p;
    throw IngestError(msg.str());
  }
}

const ManifestRecord* DatasetManifest::find(std::string_view id) const {
  const auto it = index_.find(id);
  return it == index_.end() ? nullptr : &records_[it->second];
}

ClassCounts DatasetManifest::class_counts() const {
  ClassCounts counts;
  for (const auto& r : records_) ++counts[r.split][r.label];
  return counts;
}

std::size_t DatasetManifest::count(Split split, Label label) const {
  std::size_t n = 0;
  for (const auto& r : records_) n += (r.split == split && r.label == label) ? 1 : 0;
  return n;
}

std::size_t DatasetManifest::count(Split split) const {
  std::size_t n = 0;
  for (const auto& r : records_) n += r.split == split ? 1 : 0;
  return n;
}

std::string DatasetManifest::to_jsonl() const {
  std::string out;
  for (const auto& r : records_) {
    out += record_to_json(r).dump();
    out += '\n';
  }
  return out;
}

std::vector<ManifestRecord> parse_manifest_records(std::string_view text) {
  std::vector<ManifestRecord> records;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    const auto line = text.substr(start, end - start);
    ++line_no;
    if (line.find_first_not_of(" \t\r") != std::string_view::npos) {
      try {
        records.push_back(record_from_json(ordered_json::parse(line)));
      } catch (const nlohmann::json::exception& e) {
        throw IngestError("manifest line " + std::to_string(line_no) + ": " + e.what());
      } catch (const Error& e) {
        throw IngestError("manifest line " + std::to_string(line_no) + ": " + e.what());
      }
    }
    start = end + 1;
  }
  return records;
}

DatasetManifest DatasetManifest::from_jsonl(std::string_view text) {
  return DatasetManifest(parse_manifest_records(text));
}

void DatasetManifest::save(const std::string& path) const {
  const auto text = to_jsonl();
  write_file_bytes(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

DatasetManifest DatasetManifest::load(const std::string& path) {
  const auto bytes = read_file_bytes(path);
  return from_jsonl(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

std::string AuditReport::to_text() const {
  std::ostringstream out;
  out << "split      monkeypox  others  total\n";
  for (const auto& [split, labels] : counts) {
    std::size_t mp = 0, other = 0;
    if (auto it = labels.find(Label::monkeypox); it != labels.end()) mp = it->second;
    if (auto it = labels.find(Label::others); it != labels.end()) other = it->second;
    char line[96];
    std::snprintf(line, sizeof(line), "%-10s %9zu %7zu %6zu\n", std::string(to_string(split)).c_str(),
                  mp, other, mp + other);
    out << line;
  }
  if (lineage_violations.empty()) {
    out << "leakage check: ok\n";
  } else {
    out << "leakage check: " << lineage_violations.size() << " violation(s)\n";
    for (const auto& v : lineage_violations) out << "  " << v << '\n';
  }
  for (const auto& n : notes) out << "note: " << n << '\n';
  return out.str();
}

}  // namespace skinscreen
