// Copyright 2026 The pfmg Authors
// SPDX-License-Identifier: Apache-2.0

#include "pfmg/features.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <bit>
#include <cerrno>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <set>

#include <json.hpp>

namespace pfmg {
namespace {

constexpr char kMagic[4] = {'A', 'V', 'F', '1'};

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(std::span<const std::uint8_t> bytes, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes[at + i]) << (8 * i);
  return v;
}

void need(std::span<const std::uint8_t> bytes, std::size_t offset, std::size_t count,
          const char* what) {
  if (bytes.size() < offset || bytes.size() - offset < count) {
    throw FormatError(std::string("truncated feature block: missing ") + what);
  }
}

}  // namespace

void FeatureBundle::validate() const {
  if (audio.empty() || visual.empty()) throw ContractError("feature bundle has an empty tensor");
  if (audio.rank() != 2) {
    throw ContractError("audio must be T x d_a, got " + to_string(audio.shape()));
  }
  if (visual.rank() != 4) {
    throw ContractError("visual must be T x h x w x d_v, got " + to_string(visual.shape()));
  }
  if (audio.extent(0) != visual.extent(0)) {
    throw ContractError("audio and visual disagree on T: " + to_string(audio.shape()) + " vs " +
                        to_string(visual.shape()));
  }
  if (audio.extent(0) < 2) throw ContractError("a video needs at least 2 segments");
  for (const auto* t : {&audio, &visual}) {
    for (float v : t->data()) {
      if (!std::isfinite(v)) throw DataError("non-finite feature value in video '" + video_id + "'");
    }
  }
}

LabelRecord LabelRecord::from_span(int video_class, std::size_t segments, std::size_t begin,
                                   std::size_t end, std::size_t classes) {
  LabelRecord r;
  r.video_class = video_class;
  r.segment_relevance.assign(segments, 0);
  r.segment_class.assign(segments, static_cast<int>(classes));
  for (std::size_t t = begin; t < end && t < segments; ++t) {
    r.segment_relevance[t] = 1;
    r.segment_class[t] = video_class;
  }
  return r;
}

void LabelRecord::validate(std::size_t classes, std::size_t segments,
                           bool allow_background_only) const {
  const int background = static_cast<int>(classes);
  if (video_class < 0 || video_class >= background) {
    throw LabelError("video class " + std::to_string(video_class) + " outside [0, " +
                     std::to_string(classes) + ")");
  }
  if (segment_relevance.size() != segments || segment_class.size() != segments) {
    throw LabelError("label record length does not match " + std::to_string(segments) +
                     " segments");
  }
  bool any = false;
  for (std::size_t t = 0; t < segments; ++t) {
    const int rel = segment_relevance[t];
    if (rel != 0 && rel != 1) throw LabelError("segment relevance must be 0 or 1");
    const int expected = rel ? video_class : background;
    if (segment_class[t] != expected) {
      throw LabelError("segment " + std::to_string(t) + " class " +
                       std::to_string(segment_class[t]) + " inconsistent with relevance");
    }
    any |= rel == 1;
  }
  if (!any && !allow_background_only) throw LabelError("event video has no relevant segment");
}

void FeatureDims::validate() const {
  if (T < 2) throw ConfigError("T must be at least 2");
  if (d_a == 0 || d_v == 0 || h == 0 || w == 0) throw ConfigError("feature extents must be positive");
  if (classes < 2) throw ConfigError("need at least 2 classes");
}

void DatasetManifest::validate() const {
  if (version != kVersion) throw ConsistencyError("unsupported manifest version '" + version + "'");
  try {
    dims.validate();
  } catch (const ConfigError& e) {
    throw ConsistencyError(std::string("manifest header: ") + e.what());
  }
  std::set<std::string> ids;
  for (const auto& e : entries) {
    if (!ids.insert(e.video_id).second) {
      throw ConsistencyError("duplicate video id '" + e.video_id + "'");
    }
    e.labels.validate(dims.classes, dims.T, allow_background_only);
  }
}

DatasetManifest DatasetManifest::load(const fs::path& file) {
  const auto bytes = read_file(file);
  DatasetManifest m;
  try {
    const auto j = nlohmann::json::parse(bytes.begin(), bytes.end());
    m.version = j.at("version").get<std::string>();
    m.dims.classes = j.at("C").get<std::size_t>();
    m.dims.T = j.at("T").get<std::size_t>();
    m.dims.d_a = j.at("d_a").get<std::size_t>();
    m.dims.d_v = j.at("d_v").get<std::size_t>();
    m.dims.h = j.at("h").get<std::size_t>();
    m.dims.w = j.at("w").get<std::size_t>();
    m.allow_background_only = j.value("allow_background_only", false);
    for (const auto& je : j.at("entries")) {
      ManifestEntry e;
      e.video_id = je.at("video_id").get<std::string>();
      e.path = je.at("path").get<std::string>();
      e.labels.video_class = je.at("video_class").get<int>();
      e.labels.segment_relevance = je.at("segment_relevance").get<std::vector<int>>();
      e.labels.segment_class = je.at("segment_class").get<std::vector<int>>();
      m.entries.push_back(std::move(e));
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("manifest " + file.string() + ": " + e.what());
  }
  m.root = file.parent_path();
  m.validate();
  return m;
}

void DatasetManifest::save(const fs::path& file) const {
  nlohmann::json j;
  j["version"] = version;
  j["C"] = dims.classes;
  j["T"] = dims.T;
  j["d_a"] = dims.d_a;
  j["d_v"] = dims.d_v;
  j["h"] = dims.h;
  j["w"] = dims.w;
  if (allow_background_only) j["allow_background_only"] = true;
  j["entries"] = nlohmann::json::array();
  for (const auto& e : entries) {
    j["entries"].push_back({{"video_id", e.video_id},
                            {"path", e.path},
                            {"video_class", e.labels.video_class},
                            {"segment_relevance", e.labels.segment_relevance},
                            {"segment_class", e.labels.segment_class}});
  }
  const std::string text = j.dump(1) + "\n";
  write_file(file, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

void append_block(std::vector<std::uint8_t>& out, const Tensor<float>& tensor) {
  out.insert(out.end(), std::begin(kMagic), std::end(kMagic));
  put_u32(out, static_cast<std::uint32_t>(tensor.rank()));
  for (std::size_t e : tensor.shape()) put_u32(out, static_cast<std::uint32_t>(e));
  for (float v : tensor.data()) put_u32(out, std::bit_cast<std::uint32_t>(v));
}

Tensor<float> parse_block(std::span<const std::uint8_t> bytes, std::size_t& offset,
                          const Shape& expected) {
  need(bytes, offset, 8, "header");
  if (std::memcmp(bytes.data() + offset, kMagic, 4) != 0) {
    throw FormatError("bad magic: expected AVF1");
  }
  const std::uint32_t rank = get_u32(bytes, offset + 4);
  if (rank == 0 || rank > kMaxRank) throw FormatError("bad block rank " + std::to_string(rank));
  offset += 8;
  need(bytes, offset, 4 * std::size_t{rank}, "extents");
  Shape shape(rank);
  std::size_t count = 1;
  for (std::size_t i = 0; i < rank; ++i) {
    shape[i] = get_u32(bytes, offset + 4 * i);
    if (shape[i] == 0) throw FormatError("zero extent in block header");
    count *= shape[i];
  }
  offset += 4 * std::size_t{rank};
  if (!expected.empty() && shape != expected) {
    throw ConsistencyError("block declares " + to_string(shape) + " but " + to_string(expected) +
                           " was expected");
  }
  need(bytes, offset, 4 * count, "payload");
  std::vector<float> data(count);
  for (std::size_t i = 0; i < count; ++i) {
    data[i] = std::bit_cast<float>(get_u32(bytes, offset + 4 * i));
  }
  offset += 4 * count;
  return Tensor<float>(std::move(shape), std::move(data));
}

std::vector<std::uint8_t> read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), {});
}

void write_file(const fs::path& path, std::span<const std::uint8_t> bytes) {
  const int fd = ::open(path.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
  if (fd < 0) throw IoError("cannot open " + path.string() + ": " + std::strerror(errno));
  std::size_t done = 0;
  while (done < bytes.size()) {
    const ssize_t n = ::write(fd, bytes.data() + done, bytes.size() - done);
    if (n < 0) {
      if (errno == EINTR) continue;
      const int err = errno;
      ::close(fd);
      throw IoError("write to " + path.string() + " failed: " + std::strerror(err));
    }
    done += static_cast<std::size_t>(n);
  }
  if (::fsync(fd) != 0) {
    const int err = errno;
    ::close(fd);
    throw IoError("fsync of " + path.string() + " failed: " + std::strerror(err));
  }
  if (::close(fd) != 0) throw IoError("close of " + path.string() + " failed");
}

void save_tensor(const Tensor<float>& tensor, const fs::path& path) {
  std::vector<std::uint8_t> bytes;
  append_block(bytes, tensor);
  write_file(path, bytes);
}

Tensor<float> load_tensor(const fs::path& path, const Shape& expected) {
  const auto bytes = read_file(path);
  std::size_t offset = 0;
  Tensor<float> t = parse_block(bytes, offset, expected);
  if (offset != bytes.size()) throw FormatError("trailing bytes after block in " + path.string());
  return t;
}

std::vector<std::uint8_t> encode_bundle(const FeatureBundle& bundle) {
  bundle.validate();
  std::vector<std::uint8_t> bytes;
  append_block(bytes, bundle.audio);
  append_block(bytes, bundle.visual);
  return bytes;
}

void save_bundle(const FeatureBundle& bundle, const fs::path& path) {
  write_file(path, encode_bundle(bundle));
}

FeatureBundle load_bundle(const fs::path& path, const DatasetManifest& manifest) {
  const auto bytes = read_file(path);
  const FeatureDims& d = manifest.dims;
  std::size_t offset = 0;
  FeatureBundle b;
  b.audio = parse_block(bytes, offset, {d.T, d.d_a});
  b.visual = parse_block(bytes, offset, {d.T, d.h, d.w, d.d_v});
  if (offset != bytes.size()) throw FormatError("trailing bytes in " + path.string());
  b.video_id = path.stem().string();
  b.validate();
  return b;
}

std::vector<Sample> load_dataset(const DatasetManifest& manifest) {
  std::vector<Sample> out;
  out.reserve(manifest.entries.size());
  for (const auto& e : manifest.entries) {
    Sample s{load_bundle(manifest.resolve(e), manifest), e.labels};
    s.features.video_id = e.video_id;
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace pfmg
