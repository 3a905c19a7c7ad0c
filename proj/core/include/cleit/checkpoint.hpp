// Copyright 2026 The CLEIT Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef CLEIT_CHECKPOINT_HPP
#define CLEIT_CHECKPOINT_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cleit/tensor.hpp"

namespace cleit {

// On-disk layout:
//   <dir>/manifest.json          {format, version, topology, parameters: [...]}
//   <dir>/params/<name>.f32      raw little-endian float32, row-major
// Each parameter entry holds name, shape, file (relative to <dir>), byte
// offset, a CRC-32 of the blob bytes and the freeze flag.
struct CheckpointEntry {
  std::string name;
  std::vector<Index> shape;
  std::string file;
  std::uint64_t offset = 0;
  std::uint32_t checksum = 0;
  bool trainable = true;
};

void save_checkpoint(const std::filesystem::path& dir, const std::vector<const Parameter*>& params,
                     const nlohmann::json& topology = nlohmann::json::object());

/// Fills every listed parameter (value and freeze flag) by name. Throws DataError
/// on a missing name, shape mismatch or checksum failure.
void load_checkpoint(const std::filesystem::path& dir, const std::vector<Parameter*>& params);

nlohmann::json read_checkpoint_topology(const std::filesystem::path& dir);
std::vector<CheckpointEntry> read_checkpoint_manifest(const std::filesystem::path& dir);

bool checkpoint_exists(const std::filesystem::path& dir);

}  // namespace cleit

#endif  // CLEIT_CHECKPOINT_HPP
