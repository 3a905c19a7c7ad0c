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

#include "cleit/checkpoint.hpp"

#include <zlib.h>

#include <bit>
#include <cstring>
#include <fstream>
#include <map>

#include "cleit/error.hpp"

namespace cleit {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kFormat = "cleit-checkpoint";
constexpr int kVersion = 1;

std::string file_stem(const std::string& name) {
  std::string out = name;
  for (char& c : out) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                    c == '.' || c == '_' || c == '-';
    if (!ok) c = '_';
  }
  return out;
}

std::vector<unsigned char> encode_f32le(const Matrix& m) {
  std::vector<unsigned char> bytes(static_cast<std::size_t>(m.size()) * 4);
  for (Index i = 0; i < m.size(); ++i) {
    const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(m.data()[i]));
    for (int b = 0; b < 4; ++b) {
      bytes[static_cast<std::size_t>(i) * 4 + b] = static_cast<unsigned char>(bits >> (8 * b));
    }
  }
  return bytes;
}

std::uint32_t crc_of(const std::vector<unsigned char>& bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  return static_cast<std::uint32_t>(crc32(crc, bytes.data(), static_cast<uInt>(bytes.size())));
}

json read_manifest_json(const fs::path& dir) {
  std::ifstream in(dir / "manifest.json");
  if (!in) throw DataError("checkpoint manifest not found in " + dir.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw DataError("checkpoint manifest unreadable: " + std::string(e.what()));
  }
  if (j.value("format", "") != kFormat) throw DataError("not a checkpoint manifest: " + dir.string());
  return j;
}

}  // namespace

void save_checkpoint(const fs::path& dir, const std::vector<const Parameter*>& params,
                     const json& topology) {
  fs::create_directories(dir / "params");
  json entries = json::array();
  for (const Parameter* p : params) {
    const std::string rel = "params/" + file_stem(p->name) + ".f32";
    const auto bytes = encode_f32le(p->value());
    std::ofstream out(dir / rel, std::ios::binary | std::ios::trunc);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw DataError("failed writing " + (dir / rel).string());
    entries.push_back({{"name", p->name},
                       {"shape", {p->value().rows(), p->value().cols()}},
                       {"file", rel},
                       {"offset", 0},
                       {"checksum", crc_of(bytes)},
                       {"trainable", p->trainable}});
  }
  json manifest = {{"format", kFormat}, {"version", kVersion}, {"topology", topology},
                   {"parameters", entries}};
  // Manifest last: its presence marks a complete checkpoint.
  const fs::path tmp = dir / "manifest.json.tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    out << manifest.dump(2) << '\n';
    if (!out) throw DataError("failed writing checkpoint manifest in " + dir.string());
  }
  fs::rename(tmp, dir / "manifest.json");
}

std::vector<CheckpointEntry> read_checkpoint_manifest(const fs::path& dir) {
  const json j = read_manifest_json(dir);
  std::vector<CheckpointEntry> out;
  for (const auto& e : j.at("parameters")) {
    CheckpointEntry c;
    c.name = e.at("name").get<std::string>();
    c.shape = e.at("shape").get<std::vector<Index>>();
    c.file = e.at("file").get<std::string>();
    c.offset = e.at("offset").get<std::uint64_t>();
    c.checksum = e.at("checksum").get<std::uint32_t>();
    c.trainable = e.value("trainable", true);
    out.push_back(std::move(c));
  }
  return out;
}

json read_checkpoint_topology(const fs::path& dir) {
  return read_manifest_json(dir).value("topology", json::object());
}

bool checkpoint_exists(const fs::path& dir) { return fs::exists(dir / "manifest.json"); }

void load_checkpoint(const fs::path& dir, const std::vector<Parameter*>& params) {
  const auto entries = read_checkpoint_manifest(dir);
  std::map<std::string, const CheckpointEntry*> by_name;
  for (const auto& e : entries) by_name[e.name] = &e;

  for (Parameter* p : params) {
    auto it = by_name.find(p->name);
    if (it == by_name.end()) throw DataError("checkpoint " + dir.string() + " lacks " + p->name);
    const CheckpointEntry& e = *it->second;
    if (e.shape.size() != 2 || e.shape[0] != p->value().rows() || e.shape[1] != p->value().cols()) {
      throw DataError("checkpoint shape mismatch for " + p->name);
    }
    const std::size_t count = static_cast<std::size_t>(e.shape[0] * e.shape[1]);
    std::vector<unsigned char> bytes(count * 4);
    std::ifstream in(dir / e.file, std::ios::binary);
    in.seekg(static_cast<std::streamoff>(e.offset));
    in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!in) throw DataError("truncated checkpoint blob " + e.file);
    if (crc_of(bytes) != e.checksum) throw DataError("checksum mismatch for " + e.file);
    Matrix& m = p->value();
    for (std::size_t i = 0; i < count; ++i) {
      std::uint32_t bits = 0;
      for (int b = 0; b < 4; ++b) bits |= static_cast<std::uint32_t>(bytes[i * 4 + b]) << (8 * b);
      m.data()[i] = static_cast<Real>(std::bit_cast<float>(bits));
    }
    p->trainable = e.trainable;
  }
}

}  // namespace cleit
