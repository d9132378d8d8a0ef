#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

namespace inspecta {

/// CRC-32 (IEEE polynomial, reflected). `seed` allows incremental updates.
std::uint32_t crc32(const void* data, std::size_t size, std::uint32_t seed = 0);

/// FNV-1a 64-bit of a byte string.
std::uint64_t fnv1a64(std::string_view data);

/// 16-hex-digit digest of arbitrary text; used for config hashes.
std::string hash_hex(std::string_view data);

}  // namespace inspecta
