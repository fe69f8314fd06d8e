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

#include <filesystem>
#include <random>
#include <set>

#include "skinscreen/dataset.hpp"
#include "skinscreen/errors.hpp"
#include "synthetic.hpp"

using namespace skinscreen;
using skinscreen::testing::synthetic_records;

namespace {

IngestOptions no_files() {
  IngestOptions o;
  o.verify_files = false;
  return o;
}

std::size_t augmented_count(const DatasetManifest& m, Split s, Label l) {
  std::size_t n = 0;
  for (const auto& r : m.records()) n += (r.split == s && r.label == l && r.origin == Origin::augmented) ? 1 : 0;
  return n;
}

// Every child in the same split and with the same label as its parent.
bool leakage_free(const DatasetManifest& m) {
  for (const auto& r : m.records()) {
    if (!r.parent_id) continue;
    const auto* p = m.find(*r.parent_id);
    if (p == nullptr || p->split != r.split || p->label != r.label) return false;
  }
  return true;
}

TransformDescriptor rotation(double deg) {
  TransformDescriptor t;
  t.kind = TransformKind::rotation;
  t.rotation_deg = deg;
  return t;
}

}  // namespace

TEST_SUITE("dataset") {
  TEST_CASE("ingest examples") {
    const auto m = ingest(synthetic_records(132, 180, Split::train, "orig"), no_files()).manifest;
    CHECK(m.size() == 312);
    CHECK(m.count(Split::train, Label::monkeypox) == 132);
    CHECK(m.count(Split::train, Label::others) == 180);

    CHECK(ingest({}, no_files()).manifest.empty());

    auto records = synthetic_records(1, 1, Split::train, "x");
    ManifestRecord orphan = records[0];
    orphan.id = "orphan";
    orphan.origin = Origin::augmented;
    orphan.parent_id = "does-not-exist";
    orphan.transform = rotation(10);
    records.push_back(orphan);
    CHECK_THROWS_AS(ingest(records, no_files()), IngestError);

    auto dup = synthetic_records(1, 0, Split::train, "d");
    dup.push_back(dup[0]);
    CHECK_THROWS_AS(ingest(dup, no_files()), IngestError);
  }

  TEST_CASE("ingest verifies files and reports duplicates") {
    testing::TempDir dir("ingest");
    auto records = testing::render_records(synthetic_records(2, 2, Split::train, "f"), dir.path(), 16);
    std::filesystem::copy_file(dir.path() / records[0].path, dir.path() / "copy.png");
    ManifestRecord copy = records[0];
    copy.id = "copy";
    copy.path = "copy.png";
    copy.checksum.clear();
    records.push_back(copy);

    IngestOptions opts;
    opts.root = dir.str();
    const auto result = ingest(records, opts);
    CHECK(result.manifest.find("copy")->checksum == records[0].checksum);
    REQUIRE(result.duplicate_checksums.size() == 1);
    CHECK(result.duplicate_checksums[0].size() == 2);

    auto missing = records;
    missing[1].path = "gone.png";
    CHECK_THROWS_AS(ingest(missing, opts), IngestError);

    auto tampered = records;
    tampered[2].checksum = std::string(64, '0');
    CHECK_THROWS_AS(ingest(tampered, opts), IngestError);
  }

  TEST_CASE("augment identity and determinism") {
    const auto img = testing::lesion_texture(Label::others, 4, 40);
    TransformDescriptor id;
    CHECK(augment(img, id) == img);
    TransformDescriptor shift;
    shift.kind = TransformKind::translation;
    CHECK(augment(img, shift) == img);
    TransformDescriptor noise;
    noise.kind = TransformKind::noise_injection;
    CHECK(augment(img, noise) == img);

    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const auto t = draw_transform(seed);
      CHECK_NOTHROW(t.validate());
      const auto a = augment(img, t);
      CHECK(a == augment(img, t));
      CHECK(a.width() == img.width());
      CHECK(a.height() == img.height());
    }
  }

  TEST_CASE("quarter-turn rotation permutes a 2x2 pattern") {
    // a b      b d
    // c d  ->  a c   (counter-clockwise)
    const ScreeningImage img(2, 2, {1, 1, 1, 2, 2, 2, 3, 3, 3, 4, 4, 4});
    const ScreeningImage ccw(2, 2, {2, 2, 2, 4, 4, 4, 1, 1, 1, 3, 3, 3});
    CHECK(augment(img, rotation(90)) == ccw);
    const ScreeningImage half(2, 2, {4, 4, 4, 3, 3, 3, 2, 2, 2, 1, 1, 1});
    CHECK(augment(img, rotation(180)) == half);
    CHECK(augment(augment(img, rotation(90)), rotation(-90)) == img);
  }

  TEST_CASE("out-of-bounds transforms are rejected") {
    const auto img = ScreeningImage::filled(8, 8, 1, 2, 3);
    CHECK_THROWS_AS(augment(img, rotation(41)), InvalidTransform);
    TransformDescriptor t;
    t.kind = TransformKind::translation;
    t.dx = 0.25;
    CHECK_THROWS_AS(augment(img, t), InvalidTransform);
    t = {};
    t.kind = TransformKind::noise_injection;
    t.noise_variance = 0.06;
    CHECK_THROWS_AS(augment(img, t), InvalidTransform);
    t = {};
    t.kind = TransformKind::color_space_shift;
    t.channel_shift = {0.0, 21.0 / 255.0, 0.0};
    CHECK_THROWS_AS(augment(img, t), InvalidTransform);
    t.channel_shift = {0.0, -20.0 / 255.0, 0.0};
    CHECK_NOTHROW(augment(img, t));
  }

  TEST_CASE("color shift moves channels by the declared amount") {
    TransformDescriptor t;
    t.kind = TransformKind::color_space_shift;
    t.channel_shift = {10.0 / 255.0, -10.0 / 255.0, 0.0};
    const auto out = augment(ScreeningImage::filled(3, 3, 100, 100, 100), t);
    CHECK(out.at(1, 1, 0) == 110);
    CHECK(out.at(1, 1, 1) == 90);
    CHECK(out.at(1, 1, 2) == 100);
  }

  TEST_CASE("balance examples") {
    const DatasetManifest pool(synthetic_records(132, 180, Split::val, "pool"));
    const auto balanced = balance(pool, Split::val, 7);
    CHECK(balanced.size() == 360);
    CHECK(augmented_count(balanced, Split::val, Label::monkeypox) == 48);
    CHECK(balanced.count(Split::val, Label::monkeypox) == 180);
    CHECK(balanced.count(Split::val, Label::others) == 180);
    CHECK(leakage_free(balanced));
    CHECK(balance(pool, Split::val, 7) == balanced);

    const DatasetManifest even(synthetic_records(5, 5, Split::train, "even"));
    CHECK(balance(even, Split::train, 1) == even);

    const DatasetManifest small(synthetic_records(3, 10, Split::train, "s"));
    const auto b = balance(small, Split::train, 3);
    CHECK(augmented_count(b, Split::train, Label::monkeypox) == 7);
    std::map<std::string, int> per_parent;
    std::vector<std::string> order;
    for (const auto& r : b.records()) {
      if (r.parent_id) {
        ++per_parent[*r.parent_id];
        order.push_back(*r.parent_id);
      }
    }
    CHECK(per_parent["s_monkeypox_0"] == 3);
    CHECK(per_parent["s_monkeypox_1"] == 2);
    CHECK(per_parent["s_monkeypox_2"] == 2);
    CHECK(order[0] == "s_monkeypox_0");
    CHECK(order[1] == "s_monkeypox_1");
    CHECK(order[2] == "s_monkeypox_2");
    CHECK(order[3] == "s_monkeypox_0");

    const DatasetManifest lonely(synthetic_records(0, 4, Split::train, "l"));
    CHECK_THROWS_AS(balance(lonely, Split::train, 0), CannotBalance);
  }

  TEST_CASE("split examples") {
    const auto pool = balance(DatasetManifest(synthetic_records(132, 180, Split::val, "pool")), Split::val, 7);
    const auto s = split(pool, {0.65, 0.35}, 11);
    CHECK(s.count(Split::val) == 234);
    CHECK(s.count(Split::test) == 126);
    CHECK(s.count(Split::val, Label::monkeypox) == 117);
    CHECK(s.count(Split::val, Label::others) == 117);
    CHECK(leakage_free(s));
    CHECK(split(pool, {0.65, 0.35}, 11) == s);

    const auto all_val = split(pool, {1.0, 0.0}, 3);
    CHECK(all_val.count(Split::val) == 360);
    CHECK(all_val.count(Split::test) == 0);

    const DatasetManifest eleven(synthetic_records(6, 5, Split::test, "e"));
    const auto e = split(eleven, {0.65, 0.35}, 5);
    CHECK(e.count(Split::val) == 7);
    CHECK(e.count(Split::val, Label::monkeypox) == 4);
    CHECK(e.count(Split::val, Label::others) == 3);
    CHECK(e.count(Split::test) == 4);

    CHECK_THROWS_AS(split(DatasetManifest(synthetic_records(2, 2, Split::train, "t")), {0.65, 0.35}, 1),
                    InvalidInput);
    CHECK_THROWS_AS(split(eleven, {0.6, 0.3}, 1), InvalidInput);
  }

  TEST_CASE("split is stratified within one image per class") {
    std::mt19937 rng(17);
    for (int t = 0; t < 50; ++t) {
      const std::size_t mp = 1 + rng() % 60;
      const std::size_t ot = 1 + rng() % 60;
      const double ratio = 0.05 + (rng() % 90) / 100.0;
      const auto s = split(DatasetManifest(synthetic_records(mp, ot, Split::val, "r")), {ratio, 1.0 - ratio}, t);
      const double want_mp = static_cast<double>(mp) * ratio;
      const double want_ot = static_cast<double>(ot) * ratio;
      CHECK(std::fabs(static_cast<double>(s.count(Split::val, Label::monkeypox)) - want_mp) <= 1.0);
      CHECK(std::fabs(static_cast<double>(s.count(Split::val, Label::others)) - want_ot) <= 1.0);
      CHECK(s.count(Split::val) == static_cast<std::size_t>(std::floor((mp + ot) * ratio + 0.5 + 1e-9)));
    }
  }

  TEST_CASE("augmented children follow their parents through split") {
    const auto pool = balance(DatasetManifest(synthetic_records(10, 30, Split::val, "c")), Split::val, 2);
    for (std::uint64_t seed = 0; seed < 10; ++seed) CHECK(leakage_free(split(pool, {0.65, 0.35}, seed)));
  }

  TEST_CASE("assemble_external examples") {
    const auto neg = synthetic_records(0, 200, Split::train, "coco");
    const auto pos = synthetic_records(132, 0, Split::train, "mp");
    const auto ext = assemble_external(neg, pos);
    CHECK(ext.size() == 332);
    CHECK(ext.count(Split::external) == 332);
    CHECK(ext.count(Split::external, Label::monkeypox) == 132);
    CHECK(assemble_external({}, {}).empty());

    auto bad = pos;
    bad[0].origin = Origin::augmented;
    bad[0].parent_id = bad[1].id;
    bad[0].transform = rotation(5);
    CHECK_THROWS_AS(assemble_external(neg, bad), IngestError);
    CHECK_THROWS_AS(assemble_external(pos, neg), IngestError);
  }

  TEST_CASE("manifest JSONL round trip keeps field names") {
    const auto m = balance(DatasetManifest(synthetic_records(2, 4, Split::train, "j")), Split::train, 9);
    const std::string text = m.to_jsonl();
    CHECK(DatasetManifest::from_jsonl(text) == m);
    for (const char* field :
         {"\"id\"", "\"path\"", "\"label\"", "\"split\"", "\"origin\"", "\"parent_id\"", "\"transform\"",
          "\"source_tag\"", "\"checksum\""}) {
      CHECK(text.find(field) != std::string::npos);
    }
    testing::TempDir dir("jsonl");
    const auto file = (dir.path() / "m.jsonl").string();
    m.save(file);
    CHECK(DatasetManifest::load(file) == m);
  }

  TEST_CASE("lineage violations are detected") {
    auto records = synthetic_records(2, 2, Split::val, "v");
    ManifestRecord child = records[0];
    child.id = "child";
    child.origin = Origin::augmented;
    child.parent_id = records[0].id;
    child.transform = rotation(3);
    child.split = Split::test;
    records.push_back(child);
    CHECK_FALSE(lineage_violations(records).empty());
    CHECK_THROWS_AS(DatasetManifest{records}, IngestError);
    const auto report = audit(records);
    CHECK_FALSE(report.lineage_violations.empty());

    records.back().split = Split::val;
    records.back().label = Label::others;
    CHECK_FALSE(lineage_violations(records).empty());
    records.back().label = records[0].label;
    records.back().transform.reset();
    CHECK_FALSE(lineage_violations(records).empty());
  }

  TEST_CASE("operation sequences never leak across splits") {
    for (std::uint64_t seed = 0; seed < 8; ++seed) {
      DatasetManifest m(synthetic_records(13 + seed, 20, Split::val, "q"));
      m = balance(m, Split::val, seed);
      m = split(m, {0.65, 0.35}, seed);
      CHECK(leakage_free(m));
      CHECK(audit(m).lineage_violations.empty());
    }
  }

  TEST_CASE("audit reports counts and reference notes") {
    const auto m = split(balance(DatasetManifest(synthetic_records(132, 180, Split::val, "a")), Split::val, 1),
                         {0.65, 0.35}, 1);
    const auto report = audit(m);
    CHECK(report.counts.at(Split::val).at(Label::monkeypox) == 117);
    const std::string text = report.to_text();
    CHECK(text.find("val") != std::string::npos);
    CHECK(text.find("reference") != std::string::npos);
    CHECK(report.lineage_violations.empty());
  }

  TEST_CASE("materialize renders augmented images") {
    testing::TempDir dir("mat");
    const auto records = testing::render_records(synthetic_records(2, 4, Split::train, "m"), dir.path(), 24);
    const auto balanced = balance(DatasetManifest(records), Split::train, 4);
    const auto done = materialize_augmented(balanced, dir.str());
    for (const auto& r : done.records()) {
      CHECK_FALSE(r.checksum.empty());
      CHECK(std::filesystem::exists(dir.path() / r.path));
    }
    IngestOptions opts;
    opts.root = dir.str();
    CHECK_NOTHROW(ingest(done.records(), opts));
  }
}
