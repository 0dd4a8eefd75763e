#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace didlkit {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

inline Bytes to_bytes(std::string_view text) { return Bytes(text.begin(), text.end()); }

inline std::string to_string(ByteView bytes) {
  return std::string(bytes.begin(), bytes.end());
}

inline ByteView as_bytes(std::string_view text) {
  return {reinterpret_cast<const std::uint8_t*>(text.data()), text.size()};
}

std::string hex_encode(ByteView bytes);
// Accepts upper or lower case; throws Error(decode_error) on odd length or non-hex.
Bytes hex_decode(std::string_view hex);

// Lowercase hex SHA-256 of `bytes`.
std::string sha256_hex(ByteView bytes);
Bytes sha256(ByteView bytes);

}  // namespace didlkit
