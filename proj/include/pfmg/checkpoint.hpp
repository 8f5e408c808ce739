// Copyright 2026 The pfmg Authors
// SPDX-License-Identifier: Apache-2.0
//
// Checkpoint directory layout:
//   index.json        format tag, dims, options, mode, epoch, tensor list
//   <name>.avf        one tensor block per parameter

#ifndef PFMG_CHECKPOINT_HPP
#define PFMG_CHECKPOINT_HPP

#include <cstddef>
#include <string>
#include <string_view>

#include "pfmg/features.hpp"
#include "pfmg/model.hpp"

namespace pfmg {

enum class TrainMode { supervised, weak };

std::string to_string(TrainMode mode);
TrainMode parse_train_mode(std::string_view text);

struct Checkpoint {
  static constexpr const char* kFormat = "pfmg-checkpoint/1";

  ModelParams<float> params;
  ModelDims dims;
  ModelOptions options;
  TrainMode mode = TrainMode::supervised;
  std::size_t epoch = 0;
};

void save_checkpoint(const Checkpoint& checkpoint, const fs::path& dir);

/// Throws FormatError for a malformed index or tensor file, ConsistencyError
/// when a tensor is missing or has the wrong shape.
Checkpoint load_checkpoint(const fs::path& dir);

}  // namespace pfmg

#endif  // PFMG_CHECKPOINT_HPP
