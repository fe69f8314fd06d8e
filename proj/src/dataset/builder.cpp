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
#include <cmath>
#include <filesystem>
#include <random>
#include <set>
#include <sstream>

#include "skinscreen/dataset.hpp"
#include "skinscreen/errors.hpp"

namespace skinscreen {
namespace {

namespace fs = std::filesystem;

std::string resolve(const std::string& root, const std::string& path) {
  const fs::path p(path);
  return p.is_absolute() ? p.string() : (fs::path(root) / p).string();
}

[[noreturn]] void throw_offenders(const std::string& what, const std::vector<std::string>& offenders) {
  std::ostringstream msg;
  msg << what << " (" << offenders.size() << " offender(s)):";
  for (const auto& o : offenders) msg << "\n  " << o;
  throw IngestError(msg.str());
}

// Root original of every record; records whose chain does not resolve map to themselves.
std::map<std::string, std::string> family_roots(const std::vector<ManifestRecord>& records) {
  std::map<std::string, const ManifestRecord*> by_id;
  for (const auto& r : records) by_id.emplace(r.id, &r);
  std::map<std::string, std::string> roots;
  for (const auto& r : records) {
    const ManifestRecord* cur = &r;
    std::set<std::string> seen;
    while (cur->parent_id && seen.insert(cur->id).second) {
      const auto it = by_id.find(*cur->parent_id);
      if (it == by_id.end()) break;
      cur = it->second;
    }
    roots[r.id] = cur->id;
  }
  return roots;
}

}  // namespace

IngestResult ingest(std::vector<ManifestRecord> records, const IngestOptions& options) {
  std::vector<std::string> offenders;
  if (options.verify_files) {
    for (auto& r : records) {
      const auto full = resolve(options.root, r.path);
      if (!fs::is_regular_file(full)) {
        offenders.push_back(r.id + ": missing file " + full);
        continue;
      }
      std::vector<std::uint8_t> bytes;
      try {
        bytes = read_file_bytes(full);
        (void)decode_image(bytes);
      } catch (const Error& e) {
        offenders.push_back(r.id + ": " + e.what());
        continue;
      }
      const auto digest = sha256_hex(bytes);
      if (!r.checksum.empty() && r.checksum != digest) {
        offenders.push_back(r.id + ": checksum mismatch (manifest " + r.checksum + ", file " + digest + ")");
        continue;
      }
      r.checksum = digest;
    }
  }
  if (!offenders.empty()) throw_offenders("ingest failed", offenders);

  IngestResult result{DatasetManifest(std::move(records)), {}};
  std::map<std::string, std::vector<std::string>> by_checksum;
  for (const auto& r : result.manifest.records()) {
    if (!r.checksum.empty()) by_checksum[r.checksum].push_back(r.id);
  }
  for (auto& [digest, ids] : by_checksum) {
    if (ids.size() > 1) result.duplicate_checksums.push_back(std::move(ids));
  }
  return result;
}

DatasetManifest balance(const DatasetManifest& manifest, Split target, std::uint64_t seed) {
  const std::size_t mp = manifest.count(target, Label::monkeypox);
  const std::size_t others = manifest.count(target, Label::others);
  if (mp == others) return manifest;
  const Label minority = mp < others ? Label::monkeypox : Label::others;
  const std::size_t deficit = mp < others ? others - mp : mp - others;

  std::vector<const ManifestRecord*> parents;
  for (const auto& r : manifest.records()) {
    if (r.split == target && r.label == minority && r.origin == Origin::original) parents.push_back(&r);
  }
  if (parents.empty()) {
    throw CannotBalance("no original " + std::string(to_string(minority)) + " records in split " +
                        std::string(to_string(target)));
  }

  std::vector<ManifestRecord> records = manifest.records();
  std::set<std::string> ids;
  for (const auto& r : records) ids.insert(r.id);
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < deficit; ++i) {
    const ManifestRecord& parent = *parents[i % parents.size()];
    std::size_t serial = i / parents.size();
    std::string id;
    do {
      id = parent.id + "_aug" + std::to_string(serial++);
    } while (ids.count(id) != 0);
    ids.insert(id);

    ManifestRecord child;
    child.id = id;
    child.path = "augmented/" + id + ".png";
    child.label = parent.label;
    child.split = parent.split;
    child.origin = Origin::augmented;
    child.parent_id = parent.id;
    child.transform = draw_transform(rng());
    child.source_tag = parent.source_tag;
    records.push_back(std::move(child));
  }
  return DatasetManifest(std::move(records));
}

std::map<Label, std::size_t> stratified_targets(const std::map<Label, std::size_t>& class_sizes,
                                                double val_ratio) {
  std::size_t total = 0;
  for (const auto& [label, n] : class_sizes) total += n;
  const auto want = static_cast<std::size_t>(std::floor(static_cast<double>(total) * val_ratio + 0.5 + 1e-9));

  std::map<Label, std::size_t> targets;
  std::vector<std::pair<double, Label>> remainders;
  std::size_t assigned = 0;
  for (const auto& [label, n] : class_sizes) {
    const double exact = static_cast<double>(n) * val_ratio;
    const auto base = static_cast<std::size_t>(std::floor(exact + 1e-9));
    targets[label] = std::min(base, n);
    assigned += targets[label];
    remainders.emplace_back(exact - static_cast<double>(base), label);
  }
  // Largest fractional part first; ties keep label order.
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t i = 0; assigned < want && i < remainders.size(); ++i) {
    const Label label = remainders[i].second;
    if (targets[label] < class_sizes.at(label)) {
      ++targets[label];
      ++assigned;
    }
  }
  return targets;
}

DatasetManifest split(const DatasetManifest& manifest, std::pair<double, double> ratio,
                      std::uint64_t seed) {
  if (ratio.first < 0.0 || ratio.second < 0.0 || std::fabs(ratio.first + ratio.second - 1.0) > 1e-9) {
    throw InvalidInput("split ratio must be non-negative and sum to 1");
  }
  const auto roots = family_roots(manifest.records());

  // Families per class, in manifest order of their root.
  std::map<Label, std::vector<std::string>> family_order;
  std::map<std::string, std::size_t> family_size;
  std::map<Label, std::size_t> class_sizes;
  for (const auto& r : manifest.records()) {
    if (r.split != Split::val && r.split != Split::test) continue;
    const auto& root = roots.at(r.id);
    if (family_size[root]++ == 0) family_order[r.label].push_back(root);
    ++class_sizes[r.label];
  }
  if (class_sizes.empty()) throw InvalidInput("validation/test pool is empty");

  const auto targets = stratified_targets(class_sizes, ratio.first);
  std::mt19937_64 rng(seed);
  std::set<std::string> val_roots;
  for (auto& [label, families] : family_order) {
    std::shuffle(families.begin(), families.end(), rng);
    std::stable_sort(families.begin(), families.end(), [&](const std::string& x, const std::string& y) {
      return family_size.at(x) > family_size.at(y);
    });
    std::size_t remaining = targets.at(label);
    for (const auto& root : families) {
      const std::size_t n = family_size.at(root);
      if (n <= remaining) {
        val_roots.insert(root);
        remaining -= n;
      }
    }
  }

  std::vector<ManifestRecord> records = manifest.records();
  for (auto& r : records) {
    if (r.split != Split::val && r.split != Split::test) continue;
    r.split = val_roots.count(roots.at(r.id)) != 0 ? Split::val : Split::test;
  }
  return DatasetManifest(std::move(records));
}

DatasetManifest assemble_external(const std::vector<ManifestRecord>& negatives,
                                  const std::vector<ManifestRecord>& positives) {
  std::vector<std::string> offenders;
  std::vector<ManifestRecord> records;
  records.reserve(negatives.size() + positives.size());
  auto take = [&](const std::vector<ManifestRecord>& group, Label expected) {
    for (const auto& r : group) {
      if (r.origin != Origin::original || r.parent_id || r.transform) {
        offenders.push_back(r.id + ": external set accepts original images only");
      }
      if (r.label != expected) {
        offenders.push_back(r.id + ": expected label " + std::string(to_string(expected)));
      }
      ManifestRecord copy = r;
      copy.split = Split::external;
      records.push_back(std::move(copy));
    }
  };
  take(negatives, Label::others);
  take(positives, Label::monkeypox);
  if (!offenders.empty()) throw_offenders("external set rejected", offenders);
  return DatasetManifest(std::move(records));
}

DatasetManifest materialize_augmented(const DatasetManifest& manifest, const std::string& root) {
  std::vector<ManifestRecord> records = manifest.records();
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < records.size(); ++i) index[records[i].id] = i;

  std::map<std::string, ScreeningImage> rendered;
  // Children are rendered after their parents; repeat passes cover any order.
  bool progress = true;
  while (progress) {
    progress = false;
    for (auto& r : records) {
      if (r.origin != Origin::augmented || !r.checksum.empty()) continue;
      const auto& parent = records[index.at(*r.parent_id)];
      if (parent.origin == Origin::augmented && parent.checksum.empty()) continue;
      const ScreeningImage source = load_image(resolve(root, parent.path));
      const ScreeningImage out = augment(source, *r.transform);
      const auto full = resolve(root, r.path);
      save_image(out, full);
      r.checksum = sha256_file(full);
      progress = true;
    }
  }
  return DatasetManifest(std::move(records));
}

AuditReport audit(const std::vector<ManifestRecord>& records) {
  AuditReport report;
  for (const auto& r : records) ++report.counts[r.split][r.label];
  report.lineage_violations = lineage_violations(records);
  std::set<std::string> ids;
  for (const auto& r : records) {
    if (!ids.insert(r.id).second) report.lineage_violations.push_back(r.id + ": duplicate id");
  }
  for (const auto& [split, labels] : report.counts) {
    std::size_t mp = 0, others = 0;
    if (auto it = labels.find(Label::monkeypox); it != labels.end()) mp = it->second;
    if (auto it = labels.find(Label::others); it != labels.end()) others = it->second;
    if (split != Split::external && mp != others) {
      report.notes.push_back(std::string(to_string(split)) + " split is unbalanced (" +
                             std::to_string(mp) + " monkeypox vs " + std::to_string(others) + " others)");
    }
  }
  std::size_t pending = 0;
  for (const auto& r : records) pending += (r.origin == Origin::augmented && r.checksum.empty()) ? 1 : 0;
  if (pending > 0) {
    report.notes.push_back(std::to_string(pending) + " augmented record(s) not yet rendered");
  }
  report.notes.push_back(
      "reference figures (published dataset, not ground truth): 312 originals = 132 monkeypox + "
      "180 others; val/test pool balanced with 48 augmented monkeypox to 360, split 234/126; "
      "training reported both as 4932 images and as 1818 + 2466 = 4284");
  return report;
}

AuditReport audit(const DatasetManifest& manifest) { return audit(manifest.records()); }

}  // namespace skinscreen
