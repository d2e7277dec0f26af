// Copyright (c) 2026 OrthoSpot Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "orthospot/model/checkpoint.h"

#include <bit>
#include <cstring>
#include <fstream>
#include <map>
#include <set>

#include "orthospot/base/error.h"

namespace orthospot {

namespace {

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

template <typename T>
void Put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T Get(std::istream& in, const std::string& path) {
  T v;
  if (!in.read(reinterpret_cast<char*>(&v), sizeof(T))) {
    throw CheckpointError(path + ": truncated checkpoint");
  }
  return v;
}

}  // namespace

void SaveCheckpoint(const ModelParams& params, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw CheckpointError("cannot write checkpoint " + path);
  auto named = params.Named();
  os.write(kCheckpointMagic, 4);
  Put<uint32_t>(os, kCheckpointVersion);
  Put<uint32_t>(os, static_cast<uint32_t>(named.size()));
  for (const auto& [name, t] : named) {
    Put<uint32_t>(os, static_cast<uint32_t>(name.size()));
    os.write(name.data(), static_cast<std::streamsize>(name.size()));
    Put<uint32_t>(os, static_cast<uint32_t>(t.rank()));
    for (std::size_t d : t.shape()) Put<uint64_t>(os, d);
    os.write(reinterpret_cast<const char*>(t.data().data()),
             static_cast<std::streamsize>(t.size() * sizeof(double)));
  }
  if (!os) throw CheckpointError("write failed for checkpoint " + path);
}

void LoadCheckpoint(const std::string& path, ModelParams* params) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open checkpoint " + path);
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kCheckpointMagic, 4) != 0) {
    throw CheckpointError(path + ": bad magic, not a checkpoint");
  }
  uint32_t version = Get<uint32_t>(in, path);
  if (version != kCheckpointVersion) {
    throw CheckpointError(path + ": unsupported version " + std::to_string(version));
  }
  std::map<std::string, Tensor> targets;
  for (auto& [name, t] : params->Named()) targets.emplace(name, t);

  std::set<std::string> seen;
  uint32_t count = Get<uint32_t>(in, path);
  if (count != targets.size()) {
    throw CheckpointError(path + ": holds " + std::to_string(count) +
                          " tensors, model has " + std::to_string(targets.size()));
  }
  for (uint32_t r = 0; r < count; ++r) {
    uint32_t len = Get<uint32_t>(in, path);
    if (len > 4096) throw CheckpointError(path + ": corrupt tensor name length");
    std::string name(len, '\0');
    if (!in.read(name.data(), len)) throw CheckpointError(path + ": truncated checkpoint");
    uint32_t rank = Get<uint32_t>(in, path);
    if (rank > 8) throw CheckpointError(path + ": corrupt rank for " + name);
    Shape shape(rank);
    for (auto& d : shape) d = Get<uint64_t>(in, path);
    auto it = targets.find(name);
    if (it == targets.end()) throw CheckpointError(path + ": unexpected tensor " + name);
    if (!seen.insert(name).second) throw CheckpointError(path + ": duplicate tensor " + name);
    if (it->second.shape() != shape) {
      throw CheckpointError(path + ": " + name + " has shape " + ShapeString(shape) +
                            ", config expects " + ShapeString(it->second.shape()));
    }
    auto dst = it->second.data();
    if (!in.read(reinterpret_cast<char*>(dst.data()),
                 static_cast<std::streamsize>(dst.size() * sizeof(double)))) {
      throw CheckpointError(path + ": truncated payload for " + name);
    }
  }
}

}  // namespace orthospot
