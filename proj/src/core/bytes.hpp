#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "core/mat.hpp"

namespace deterra {

// Base64 of the little-endian float64 payload; the storage format for all
// parameter and GMM blocks.
std::string encode_f64_base64(const Vec& values);
Vec decode_f64_base64(const std::string& text);

// FNV-1a over a byte string; used for config hashes.
std::uint64_t fnv1a64(const std::string& bytes);

std::string hex_u64(std::uint64_t v);

}  // namespace deterra
