// Copyright 2026 The pfmg Authors
// SPDX-License-Identifier: Apache-2.0

#include "pfmg/checkpoint.hpp"

#include <map>

#include <json.hpp>

namespace pfmg {
namespace {

std::string past_form_name(PastMotionForm f) {
  return f == PastMotionForm::printed ? "printed" : "neighbor";
}

PastMotionForm parse_past_form(const std::string& s) {
  if (s == "printed") return PastMotionForm::printed;
  if (s == "neighbor") return PastMotionForm::neighbor;
  throw FormatError("unknown past motion form '" + s + "'");
}

}  // namespace

std::string to_string(TrainMode mode) {
  return mode == TrainMode::weak ? "weak" : "supervised";
}

TrainMode parse_train_mode(std::string_view text) {
  if (text == "supervised") return TrainMode::supervised;
  if (text == "weak") return TrainMode::weak;
  throw ConfigError("unknown training mode '" + std::string(text) + "'");
}

void save_checkpoint(const Checkpoint& ck, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());

  nlohmann::json index;
  index["format"] = Checkpoint::kFormat;
  index["seed"] = ck.params.seed;
  index["epoch"] = ck.epoch;
  index["mode"] = to_string(ck.mode);
  index["dims"] = {{"d_a", ck.dims.d_a},         {"d_v", ck.dims.d_v}, {"classes", ck.dims.classes},
                   {"d_h", ck.dims.d_h},         {"d_m", ck.dims.d_m}};
  index["options"] = {{"motion", to_string(ck.options.motion)},
                      {"temporal_attention", ck.options.temporal_attention},
                      {"scale_mode", to_string(ck.options.scale_mode)},
                      {"past_form", past_form_name(ck.options.past_form)}};
  index["tensors"] = nlohmann::json::array();
  ck.params.for_each([&](const std::string& name, const Tensor<float>& t) {
    const std::string file = name + ".avf";
    save_tensor(t, dir / file);
    index["tensors"].push_back({{"name", name}, {"file", file}, {"shape", t.shape()}});
  });
  const std::string text = index.dump(1) + "\n";
  write_file(dir / "index.json",
             std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

Checkpoint load_checkpoint(const fs::path& dir) {
  const auto bytes = read_file(dir / "index.json");
  Checkpoint ck;
  std::map<std::string, std::pair<std::string, Shape>> files;
  try {
    const auto j = nlohmann::json::parse(bytes.begin(), bytes.end());
    if (j.at("format").get<std::string>() != Checkpoint::kFormat) {
      throw FormatError("unsupported checkpoint format in " + dir.string());
    }
    ck.params.seed = j.at("seed").get<std::uint64_t>();
    ck.epoch = j.at("epoch").get<std::size_t>();
    ck.mode = parse_train_mode(j.at("mode").get<std::string>());
    const auto& d = j.at("dims");
    ck.dims.d_a = d.at("d_a").get<std::size_t>();
    ck.dims.d_v = d.at("d_v").get<std::size_t>();
    ck.dims.classes = d.at("classes").get<std::size_t>();
    ck.dims.d_h = d.at("d_h").get<std::size_t>();
    ck.dims.d_m = d.at("d_m").get<std::size_t>();
    const auto& o = j.at("options");
    ck.options.motion = parse_motion_mode(o.at("motion").get<std::string>());
    ck.options.temporal_attention = o.at("temporal_attention").get<bool>();
    ck.options.scale_mode = parse_scale_mode(o.at("scale_mode").get<std::string>());
    ck.options.past_form = parse_past_form(o.at("past_form").get<std::string>());
    for (const auto& t : j.at("tensors")) {
      files[t.at("name").get<std::string>()] = {t.at("file").get<std::string>(),
                                                t.at("shape").get<Shape>()};
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("checkpoint index " + dir.string() + ": " + e.what());
  } catch (const ConfigError& e) {
    throw FormatError("checkpoint index " + dir.string() + ": " + e.what());
  }

  ck.params.for_each([&](const std::string& name, Tensor<float>& t) {
    const auto it = files.find(name);
    if (it == files.end()) throw ConsistencyError("checkpoint lacks tensor " + name);
    t = load_tensor(dir / it->second.first, it->second.second);
  });
  ck.params.set_scale_mode(ck.options.scale_mode);
  try {
    check_param_shapes(ck.params, ck.dims);
  } catch (const DimensionError& e) {
    throw ConsistencyError(std::string("checkpoint ") + dir.string() + ": " + e.what());
  }
  return ck;
}

}  // namespace pfmg
