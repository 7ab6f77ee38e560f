// Copyright 2026 The hemscast Authors
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

#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "hems/model.hpp"

namespace hems {

inline constexpr std::uint32_t kWeightFormatVersion = 1;

// Binary weight file, all integers and floats little-endian:
//   "HEMSWGT\0" | u32 version | config block | u64 rng_seed
//   | u32 components, then per component: u16 name length, name, u64 count
//   | u64 parameter count | f64 parameters in layout order | u32 CRC-32
// The CRC covers every preceding byte.
std::vector<std::uint8_t> encode_weights(const ModelWeights& weights);
ModelWeights decode_weights(const std::vector<std::uint8_t>& bytes);

void save_weights(const ModelWeights& weights, const std::filesystem::path& path);
// Throws DataError on bad magic, unsupported version or checksum mismatch.
ModelWeights load_weights(const std::filesystem::path& path);

}  // namespace hems
