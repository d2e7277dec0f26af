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

#ifndef ORTHOSPOT_MODEL_CHECKPOINT_H_
#define ORTHOSPOT_MODEL_CHECKPOINT_H_

#include <cstdint>
#include <string>

#include "orthospot/model/model.h"

namespace orthospot {

// Layout (little-endian):
//   "OSPT" | u32 version | u32 record count |
//   per record: u32 name length, name bytes, u32 rank, u64 dims[rank],
//               f64 values[prod(dims)]
inline constexpr char kCheckpointMagic[4] = {'O', 'S', 'P', 'T'};
inline constexpr uint32_t kCheckpointVersion = 1;

void SaveCheckpoint(const ModelParams& params, const std::string& path);

// Fills `params` (already shaped from the config) from the file. Throws
// CheckpointError on bad magic, unknown version, truncation, missing or
// extra tensors, or any shape mismatch.
void LoadCheckpoint(const std::string& path, ModelParams* params);

}  // namespace orthospot

#endif  // ORTHOSPOT_MODEL_CHECKPOINT_H_
