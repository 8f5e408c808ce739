// Copyright 2026 The pfmg Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>

#include "pfmg/features.hpp"
#include "test_util.hpp"

using namespace pfmg;
using pfmg::test::TempDir;

namespace {

FeatureDims small_dims() {
  FeatureDims d;
  d.T = 4;
  d.d_a = 3;
  d.d_v = 2;
  d.h = 2;
  d.w = 2;
  d.classes = 2;
  return d;
}

FeatureBundle random_bundle(Rng& rng, const FeatureDims& d, std::string id = "clip") {
  return {test::random(rng, {d.T, d.d_a}), test::random(rng, {d.T, d.h, d.w, d.d_v}),
          std::move(id)};
}

DatasetManifest manifest_for(const FeatureDims& d, const fs::path& root) {
  DatasetManifest m;
  m.dims = d;
  m.root = root;
  return m;
}

void write_bytes(const fs::path& p, const std::vector<std::uint8_t>& bytes) {
  write_file(p, bytes);
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

}  // namespace

TEST_CASE("block layout is little-endian with a magic per block") {
  std::vector<std::uint8_t> bytes;
  append_block(bytes, test::make({2}, {1.0f, -2.0f}));
  const std::vector<std::uint8_t> expected{'A', 'V', 'F', '1', 1, 0, 0, 0, 2, 0, 0, 0,
                                           0x00, 0x00, 0x80, 0x3f, 0x00, 0x00, 0x00, 0xc0};
  CHECK(bytes == expected);
}

TEST_CASE("bundle round trip is bit exact") {
  TempDir dir("roundtrip");
  Rng rng(1);
  const auto d = small_dims();
  const auto b = random_bundle(rng, d);
  save_bundle(b, dir.path() / "clip.avf");
  const auto back = load_bundle(dir.path() / "clip.avf", manifest_for(d, dir.path()));
  CHECK(test::bit_equal(back.audio, b.audio));
  CHECK(test::bit_equal(back.visual, b.visual));
  CHECK(back.video_id == "clip");
}

TEST_CASE("two saves give identical bytes") {
  TempDir dir("twice");
  Rng rng(2);
  const auto b = random_bundle(rng, small_dims());
  save_bundle(b, dir.path() / "a.avf");
  save_bundle(b, dir.path() / "b.avf");
  CHECK(read_file(dir.path() / "a.avf") == read_file(dir.path() / "b.avf"));
}

TEST_CASE("corrupt files raise typed errors") {
  TempDir dir("corrupt");
  Rng rng(3);
  const auto d = small_dims();
  const auto m = manifest_for(d, dir.path());
  const auto bytes = encode_bundle(random_bundle(rng, d));

  SUBCASE("every truncation is a format error") {
    for (std::size_t cut = 0; cut < bytes.size(); ++cut) {
      write_bytes(dir.path() / "t.avf",
                  std::vector<std::uint8_t>(bytes.begin(), bytes.begin() + cut));
      CHECK_THROWS_AS(load_bundle(dir.path() / "t.avf", m), FormatError);
    }
  }
  SUBCASE("bad magic") {
    auto bad = bytes;
    bad[0] = 'X';
    write_bytes(dir.path() / "m.avf", bad);
    CHECK_THROWS_AS(load_bundle(dir.path() / "m.avf", m), FormatError);
  }
  SUBCASE("bad rank") {
    auto bad = bytes;
    bad[4] = 9;
    write_bytes(dir.path() / "r.avf", bad);
    CHECK_THROWS_AS(load_bundle(dir.path() / "r.avf", m), FormatError);
  }
  SUBCASE("trailing bytes") {
    auto bad = bytes;
    bad.push_back(0);
    write_bytes(dir.path() / "x.avf", bad);
    CHECK_THROWS_AS(load_bundle(dir.path() / "x.avf", m), FormatError);
  }
  SUBCASE("non-finite payload") {
    FeatureBundle b = random_bundle(rng, d);
    std::vector<float> a(b.audio.data().begin(), b.audio.data().end());
    a[1] = std::numeric_limits<float>::quiet_NaN();
    std::vector<std::uint8_t> raw;
    append_block(raw, Tensor<float>(b.audio.shape(), a));
    append_block(raw, b.visual);
    write_bytes(dir.path() / "n.avf", raw);
    CHECK_THROWS_AS(load_bundle(dir.path() / "n.avf", m), DataError);
  }
  SUBCASE("missing file") {
    CHECK_THROWS_AS(load_bundle(dir.path() / "absent.avf", m), IoError);
  }
}

TEST_CASE("declared 10x128 audio against a 10x64 manifest is a consistency error") {
  TempDir dir("mismatch");
  FeatureDims d;
  d.T = 10;
  d.d_a = 64;
  d.d_v = 2;
  d.h = 1;
  d.w = 1;
  // Header claims 10x128 but only 10x64 floats follow.
  std::vector<std::uint8_t> raw{'A', 'V', 'F', '1'};
  put_u32(raw, 2);
  put_u32(raw, 10);
  put_u32(raw, 128);
  raw.resize(raw.size() + 10 * 64 * 4, 0);
  write_bytes(dir.path() / "h.avf", raw);
  CHECK_THROWS_AS(load_bundle(dir.path() / "h.avf", manifest_for(d, dir.path())),
                  ConsistencyError);
}

TEST_CASE("bundle validation") {
  Rng rng(4);
  FeatureDims d = small_dims();
  d.T = 1;
  CHECK_THROWS_AS(random_bundle(rng, d).validate(), ContractError);
  CHECK_THROWS_AS(FeatureBundle{}.validate(), ContractError);
  TempDir dir("empty");
  CHECK_THROWS_AS(save_bundle(FeatureBundle{}, dir.path() / "e.avf"), ContractError);
  CHECK_THROWS_AS(save_bundle(random_bundle(rng, small_dims()), "/proc/nope/x.avf"), IoError);
}

TEST_CASE("label records") {
  const auto full = LabelRecord::from_span(2, 5, 0, 5, 4);
  for (std::size_t t = 0; t < 5; ++t) {
    CHECK(full.segment_relevance[t] == 1);
    CHECK(full.segment_class[t] == 2);
  }
  const auto part = LabelRecord::from_span(1, 4, 1, 3, 3);
  CHECK(part.segment_class == std::vector<int>{3, 1, 1, 3});
  CHECK(part.segment_relevance == std::vector<int>{0, 1, 1, 0});

  LabelRecord bad = part;
  bad.segment_class[0] = 1;
  CHECK_THROWS_AS(bad.validate(3, 4), LabelError);
  bad = part;
  bad.video_class = 3;
  CHECK_THROWS_AS(bad.validate(3, 4), LabelError);
  const auto none = LabelRecord{0, {0, 0}, {2, 2}};
  CHECK_THROWS_AS(none.validate(2, 2), LabelError);
  CHECK_NOTHROW(none.validate(2, 2, true));
  CHECK_THROWS_AS(part.validate(3, 5), LabelError);
}

TEST_CASE("manifest round trip and checks") {
  TempDir dir("manifest");
  SynthOptions o;
  o.videos = 5;
  o.dims = small_dims();
  const auto m = synth_dataset(o, dir.path());
  const auto back = DatasetManifest::load(dir.path() / "manifest.json");
  CHECK(back.dims == m.dims);
  REQUIRE(back.entries.size() == 5);
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(back.entries[i].video_id == m.entries[i].video_id);
    CHECK(back.entries[i].labels.segment_class == m.entries[i].labels.segment_class);
  }
  CHECK(load_dataset(back).size() == 5);

  DatasetManifest dup = back;
  dup.entries[1].video_id = dup.entries[0].video_id;
  CHECK_THROWS_AS(dup.validate(), ConsistencyError);

  // A dataset header that disagrees with the files.
  DatasetManifest wrong = back;
  wrong.dims.d_v = 5;
  CHECK_THROWS_AS(load_dataset(wrong), ConsistencyError);

  std::ofstream(dir.path() / "broken.json") << "{ not json";
  CHECK_THROWS_AS(DatasetManifest::load(dir.path() / "broken.json"), FormatError);
}

TEST_CASE("synthetic data is deterministic") {
  TempDir a("synth_a"), b("synth_b");
  SynthOptions o;
  o.videos = 6;
  o.seed = 17;
  synth_dataset(o, a.path());
  synth_dataset(o, b.path());
  for (const auto& e : fs::directory_iterator(a.path())) {
    CHECK(read_file(e.path()) == read_file(b.path() / e.path().filename()));
  }
  o.seed = 18;
  const auto other = synth_videos(o);
  CHECK_FALSE(test::bit_equal(other[0].sample.features.audio,
                              synth_videos({17, 6, o.dims, 3.0, 0.5})[0].sample.features.audio));
}

TEST_CASE("synthetic labels and distractors") {
  SynthOptions o;
  o.videos = 200;
  o.seed = 5;
  const auto videos = synth_videos(o);
  const auto protos = synth_prototypes(o.seed, o.dims);
  std::size_t distractors = 0, full_span = 0;
  for (const auto& v : videos) {
    const auto& l = v.sample.labels;
    CHECK_NOTHROW(l.validate(o.dims.classes, o.dims.T));
    CHECK(v.span_end > v.span_begin);
    CHECK(v.span_end <= o.dims.T);
    if (v.span_end - v.span_begin == o.dims.T) ++full_span;
    if (!v.distractor) continue;
    ++distractors;
    for (std::size_t t = 0; t < o.dims.T; ++t) {
      if (t >= v.span_begin && t < v.span_end) continue;
      CHECK(l.segment_relevance[t] == 0);
      // The audio still points at the class prototype.
      double dot = 0.0;
      const auto& pa = protos.audio[static_cast<std::size_t>(l.video_class)];
      for (std::size_t j = 0; j < o.dims.d_a; ++j) dot += v.sample.features.audio.at({t, j}) * pa[j];
      CHECK(dot > 0.3);
    }
  }
  CHECK(distractors > 60);
  CHECK(distractors < 140);
  CHECK(full_span > 0);
}

TEST_CASE("noise-free audio is separated by the nearest prototype") {
  SynthOptions o;
  o.videos = 40;
  o.snr = std::numeric_limits<double>::infinity();
  const auto protos = synth_prototypes(o.seed, o.dims);
  std::size_t hit = 0, total = 0;
  for (const auto& v : synth_videos(o)) {
    for (std::size_t t = v.span_begin; t < v.span_end; ++t) {
      std::size_t best = 0;
      double best_d = 1e300;
      for (std::size_t c = 0; c < o.dims.classes; ++c) {
        double dist = 0.0;
        for (std::size_t j = 0; j < o.dims.d_a; ++j) {
          const double e = v.sample.features.audio.at({t, j}) - protos.audio[c][j];
          dist += e * e;
        }
        if (dist < best_d) {
          best_d = dist;
          best = c;
        }
      }
      hit += best == static_cast<std::size_t>(v.sample.labels.video_class);
      ++total;
    }
  }
  CHECK(hit == total);
}

TEST_CASE("visual pattern moves one cell per segment inside the span") {
  SynthOptions o;
  o.videos = 30;
  o.snr = std::numeric_limits<double>::infinity();
  o.distractor_probability = 0.0;
  const auto protos = synth_prototypes(o.seed, o.dims);
  const std::size_t cells = o.dims.h * o.dims.w;
  for (const auto& v : synth_videos(o)) {
    const auto& pv = protos.visual[static_cast<std::size_t>(v.sample.labels.video_class)];
    std::size_t prev = cells;
    for (std::size_t t = v.span_begin; t < v.span_end; ++t) {
      std::size_t hot = cells;
      for (std::size_t c = 0; c < cells; ++c) {
        const float x = v.sample.features.visual.at({t, c / o.dims.w, c % o.dims.w, 0});
        if (x == pv[0]) hot = c;
      }
      REQUIRE(hot < cells);
      if (prev < cells) CHECK(hot == (prev + 1) % cells);
      prev = hot;
    }
  }
}

TEST_CASE("seed-0 bundle matches the frozen golden file") {
  SynthOptions o;
  o.videos = 1;
  o.dims = small_dims();
  const auto bytes = encode_bundle(synth_videos(o)[0].sample.features);
  const fs::path golden = fs::path(PFMG_GOLDEN_DIR) / "synth_seed0.avf";
  if (std::getenv("PFMG_WRITE_GOLDEN")) write_file(golden, bytes);
  REQUIRE(fs::exists(golden));
  CHECK(read_file(golden) == bytes);
}

TEST_CASE("synthetic option checks") {
  SynthOptions o;
  o.dims.classes = 1;
  CHECK_THROWS(synth_videos(o));
  o = {};
  o.snr = 0.0;
  CHECK_THROWS_AS(synth_videos(o), ConfigError);
}
