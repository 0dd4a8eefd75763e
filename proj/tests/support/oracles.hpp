#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "didlkit/bytes.hpp"

// Independent implementations the library is checked against.
namespace oracle {

// libsodium crypto_hash_sha256, lowercase hex.
std::string sha256_hex(didlkit::ByteView bytes);
// OpenSSL EVP_EncodeBlock / EVP_DecodeBlock.
std::string base64_encode(didlkit::ByteView bytes);
std::optional<didlkit::Bytes> base64_decode(std::string_view text);
// libdeflate; `token` is "gzip" or "deflate" (zlib wrapper).
didlkit::Bytes compress(didlkit::ByteView bytes, std::string_view token);
std::optional<didlkit::Bytes> decompress(didlkit::ByteView bytes, std::string_view token, std::size_t expected_size);

}  // namespace oracle
