#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "didlkit/bytes.hpp"

// RFC 3548 base64 with the standard alphabet and mandatory padding.
namespace didlkit::base64 {

inline constexpr std::size_t kLineWidth = 76;

std::string encode(ByteView bytes);
// Lines of at most `width` characters joined with '\n'; no trailing newline.
std::string encode_wrapped(ByteView bytes, std::size_t width = kLineWidth);
// Whitespace anywhere is ignored. Returns nullopt on any other non-alphabet
// character, misplaced padding, or a length that is not a multiple of four.
std::optional<Bytes> decode(std::string_view text);

// Unpadded URL-safe alphabet (RFC 4648 section 5), for opaque tokens.
std::string encode_url(ByteView bytes);
std::optional<Bytes> decode_url(std::string_view text);

}  // namespace didlkit::base64
