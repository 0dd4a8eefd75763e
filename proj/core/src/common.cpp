#include "didlkit/bytes.hpp"
#include "didlkit/error.hpp"

#include <openssl/evp.h>

namespace didlkit {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::invalid_argument: return "invalid-argument";
    case Errc::invalid_uri: return "invalid-uri";
    case Errc::not_found: return "not-found";
    case Errc::bad_target: return "bad-target";
    case Errc::malformed_identifier: return "malformed-identifier";
    case Errc::fetch_error: return "fetch-error";
    case Errc::decode_error: return "decode-error";
    case Errc::unsupported_encoding: return "unsupported-encoding";
    case Errc::non_digital: return "non-digital";
    case Errc::equivalence_violation: return "equivalence-violation";
    case Errc::validation_failed: return "validation-failed";
    case Errc::id_collision: return "id-collision";
    case Errc::bad_cursor: return "bad-cursor";
    case Errc::io_error: return "io-error";
    case Errc::codec_error: return "codec-error";
    case Errc::key_error: return "key-error";
  }
  return "unknown";
}

std::string hex_encode(ByteView bytes) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (auto b : bytes) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0x0f]);
  }
  return out;
}

namespace {

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

}  // namespace

Bytes hex_decode(std::string_view hex) {
  if (hex.size() % 2 != 0) throw Error(Errc::decode_error, "hex string has odd length");
  Bytes out;
  out.reserve(hex.size() / 2);
  for (std::size_t i = 0; i < hex.size(); i += 2) {
    int hi = hex_value(hex[i]);
    int lo = hex_value(hex[i + 1]);
    if (hi < 0 || lo < 0) throw Error(Errc::decode_error, "invalid hex digit");
    out.push_back(static_cast<std::uint8_t>((hi << 4) | lo));
  }
  return out;
}

Bytes sha256(ByteView bytes) {
  Bytes out(EVP_MAX_MD_SIZE);
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), out.data(), &len, EVP_sha256(), nullptr) != 1) {
    throw Error(Errc::io_error, "SHA-256 computation failed");
  }
  out.resize(len);
  return out;
}

std::string sha256_hex(ByteView bytes) { return hex_encode(sha256(bytes)); }

}  // namespace didlkit
