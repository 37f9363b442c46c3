/* Copyright (c) 2026 The Ananke Authors. All rights reserved.
 *
 * This source code is licensed under Apache 2.0 License.
 */

#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace ananke {

// Lowercase hex SHA-256 digest.
std::string sha256_hex(std::string_view data);

std::string base64_encode(std::string_view bytes);
// Throws Error(kIo) on malformed input.
std::string base64_decode(std::string_view text);

// Little-endian float32 packing used for persisted vectors.
std::string pack_f32_le(const std::vector<float>& values);
std::vector<float> unpack_f32_le(std::string_view bytes);

}  // namespace ananke
