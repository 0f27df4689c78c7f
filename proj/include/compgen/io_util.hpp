// Copyright 2026 The compgen Authors.
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
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace compgen {

std::uint32_t crc32_of(std::span<const std::uint8_t> bytes);
std::string crc32_hex(std::span<const std::uint8_t> bytes);

/// FNV-1a 64-bit, rendered as 16 hex digits.
std::string fnv1a_hex(std::string_view text);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

nlohmann::json read_json(const std::filesystem::path& path);
/// Writes through a temporary file and renames, so readers never see a
/// partial document.
void write_json(const std::filesystem::path& path, const nlohmann::json& j);

/// Little-endian serialization of arithmetic arrays.
template <typename T>
std::vector<std::uint8_t> to_le_bytes(std::span<const T> values);
template <typename T>
std::vector<T> from_le_bytes(std::span<const std::uint8_t> bytes);

/// Shortest round-trip decimal for a double ("%.17g").
std::string format_double(double v);

}  // namespace compgen
