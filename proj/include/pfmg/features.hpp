// Copyright 2026 The pfmg Authors
// SPDX-License-Identifier: Apache-2.0
//
// Feature bundles, labels, dataset manifests and their on-disk formats.
//
// Tensor block (little-endian):
//   "AVF1" | u32 rank | u32 extents[rank] | f32 payload[prod(extents)]
// A feature file holds two blocks, audio (T x d_a) then visual
// (T x h x w x d_v). Checkpoints store one block per parameter.

#ifndef PFMG_FEATURES_HPP
#define PFMG_FEATURES_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "pfmg/tensor.hpp"

namespace pfmg {

namespace fs = std::filesystem;

struct FeatureBundle {
  Tensor<float> audio;   // T x d_a
  Tensor<float> visual;  // T x h x w x d_v
  std::string video_id;

  std::size_t segments() const { return audio.empty() ? 0 : audio.extent(0); }

  /// Throws ContractError on wrong ranks, mismatched T or T < 2, and
  /// DataError on non-finite values.
  void validate() const;
};

struct LabelRecord {
  int video_class = 0;
  std::vector<int> segment_relevance;  // 0 or 1 per segment
  std::vector<int> segment_class;      // video_class where relevant, else `classes` (background)

  /// Labels for an event occupying segments [begin, end).
  static LabelRecord from_span(int video_class, std::size_t segments, std::size_t begin,
                               std::size_t end, std::size_t classes);

  std::size_t segments() const { return segment_class.size(); }

  /// Throws LabelError when the record is out of range or self-inconsistent.
  void validate(std::size_t classes, std::size_t segments, bool allow_background_only = false) const;
};

/// Dataset-wide extents.
struct FeatureDims {
  std::size_t T = 10;
  std::size_t d_a = 32;
  std::size_t d_v = 64;
  std::size_t h = 3;
  std::size_t w = 3;
  std::size_t classes = 4;

  bool operator==(const FeatureDims&) const = default;
  void validate() const;
};

struct ManifestEntry {
  std::string video_id;
  std::string path;  // relative to the manifest's directory
  LabelRecord labels;
};

struct DatasetManifest {
  static constexpr const char* kVersion = "pfmg-manifest/1";

  std::string version = kVersion;
  FeatureDims dims;
  std::vector<ManifestEntry> entries;
  bool allow_background_only = false;
  fs::path root;  // directory containing the manifest; not serialized

  /// Header and label checks; unique ids. Throws ConsistencyError / LabelError.
  void validate() const;

  fs::path resolve(const ManifestEntry& entry) const { return root / entry.path; }

  static DatasetManifest load(const fs::path& file);
  void save(const fs::path& file) const;
};

// Tensor blocks.

void append_block(std::vector<std::uint8_t>& out, const Tensor<float>& tensor);

/// Parses one block at `offset` and advances it. Throws FormatError on a bad
/// magic, rank or a truncated block. When `expected` is non-empty the
/// declared extents are compared before the payload is read and a mismatch
/// raises ConsistencyError.
Tensor<float> parse_block(std::span<const std::uint8_t> bytes, std::size_t& offset,
                          const Shape& expected = {});

std::vector<std::uint8_t> read_file(const fs::path& path);

/// Writes and fsyncs. Throws IoError.
void write_file(const fs::path& path, std::span<const std::uint8_t> bytes);

/// Single-block file, used for checkpoint tensors.
void save_tensor(const Tensor<float>& tensor, const fs::path& path);
Tensor<float> load_tensor(const fs::path& path, const Shape& expected = {});

// Feature files.

std::vector<std::uint8_t> encode_bundle(const FeatureBundle& bundle);
void save_bundle(const FeatureBundle& bundle, const fs::path& path);

/// Loads a feature file and checks it against the manifest header.
FeatureBundle load_bundle(const fs::path& path, const DatasetManifest& manifest);

struct Sample {
  FeatureBundle features;
  LabelRecord labels;
};

/// Loads every entry of a manifest.
std::vector<Sample> load_dataset(const DatasetManifest& manifest);

// Synthetic planted-event data.

struct SynthOptions {
  std::uint64_t seed = 0;
  std::size_t videos = 64;
  FeatureDims dims;
  /// Prototype norm over noise RMS norm; infinity means noise-free.
  double snr = 3.0;
  /// Chance that a video's background segments carry audio-only leakage of
  /// its class prototype over a static visual field.
  double distractor_probability = 0.5;
};

struct SynthPrototypes {
  std::vector<std::vector<float>> audio;   // classes x d_a, unit norm
  std::vector<std::vector<float>> visual;  // classes x d_v, unit norm
};

SynthPrototypes synth_prototypes(std::uint64_t seed, const FeatureDims& dims);

struct SynthVideo {
  Sample sample;
  std::size_t span_begin = 0;
  std::size_t span_end = 0;
  bool distractor = false;
};

/// In-memory generation; deterministic in the options.
std::vector<SynthVideo> synth_videos(const SynthOptions& options);

/// Generates the videos, writes one feature file each plus manifest.json
/// into `out_dir`, and returns the manifest.
DatasetManifest synth_dataset(const SynthOptions& options, const fs::path& out_dir);

}  // namespace pfmg

#endif  // PFMG_FEATURES_HPP
