// Copyright 2026 The Curate Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef CURATE_DIGEST_H_
#define CURATE_DIGEST_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>

namespace curate {

// Lowercase hex SHA-256.
std::string Sha256Hex(std::span<const std::uint8_t> bytes);
std::string Sha256Hex(std::string_view text);
std::string FileSha256(const std::filesystem::path& path);

// Seed for one named stage: the first eight bytes of
// SHA-256("<seed>:<stage>"), big-endian.
std::uint64_t StageSeed(std::uint64_t global_seed, std::string_view stage);

}  // namespace curate

#endif  // CURATE_DIGEST_H_
