#include "didlkit/base64.hpp"

#include <array>

namespace didlkit::base64 {

namespace {

constexpr char kAlphabet[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

constexpr std::array<std::int8_t, 256> make_reverse() {
  std::array<std::int8_t, 256> table{};
  for (auto& v : table) v = -1;
  for (int i = 0; i < 64; ++i) table[static_cast<unsigned char>(kAlphabet[i])] = static_cast<std::int8_t>(i);
  return table;
}

constexpr auto kReverse = make_reverse();

}  // namespace

std::string encode(ByteView bytes) {
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 3 <= bytes.size(); i += 3) {
    std::uint32_t v = (bytes[i] << 16) | (bytes[i + 1] << 8) | bytes[i + 2];
    out.push_back(kAlphabet[(v >> 18) & 63]);
    out.push_back(kAlphabet[(v >> 12) & 63]);
    out.push_back(kAlphabet[(v >> 6) & 63]);
    out.push_back(kAlphabet[v & 63]);
  }
  auto rest = bytes.size() - i;
  if (rest == 1) {
    std::uint32_t v = bytes[i] << 16;
    out.push_back(kAlphabet[(v >> 18) & 63]);
    out.push_back(kAlphabet[(v >> 12) & 63]);
    out += "==";
  } else if (rest == 2) {
    std::uint32_t v = (bytes[i] << 16) | (bytes[i + 1] << 8);
    out.push_back(kAlphabet[(v >> 18) & 63]);
    out.push_back(kAlphabet[(v >> 12) & 63]);
    out.push_back(kAlphabet[(v >> 6) & 63]);
    out.push_back('=');
  }
  return out;
}

std::string encode_wrapped(ByteView bytes, std::size_t width) {
  auto flat = encode(bytes);
  if (width == 0 || flat.size() <= width) return flat;
  std::string out;
  out.reserve(flat.size() + flat.size() / width);
  for (std::size_t pos = 0; pos < flat.size(); pos += width) {
    if (pos != 0) out.push_back('\n');
    out.append(flat, pos, width);
  }
  return out;
}

std::optional<Bytes> decode(std::string_view text) {
  Bytes out;
  out.reserve(text.size() / 4 * 3);
  std::uint32_t quad = 0;
  int filled = 0;
  int padding = 0;
  for (char c : text) {
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r') continue;
    if (c == '=') {
      // Padding may only occupy the last one or two slots of the final quad.
      if (filled < 2) return std::nullopt;
      ++padding;
      ++filled;
      quad <<= 6;
    } else {
      if (padding != 0) return std::nullopt;
      auto v = kReverse[static_cast<unsigned char>(c)];
      if (v < 0) return std::nullopt;
      quad = (quad << 6) | static_cast<std::uint32_t>(v);
      ++filled;
    }
    if (filled == 4) {
      out.push_back(static_cast<std::uint8_t>(quad >> 16));
      if (padding < 2) out.push_back(static_cast<std::uint8_t>(quad >> 8));
      if (padding < 1) out.push_back(static_cast<std::uint8_t>(quad));
      quad = 0;
      filled = 0;
      if (padding != 0) padding = 3;  // nothing may follow a padded quad
    }
  }
  if (filled != 0) return std::nullopt;
  return out;
}

std::string encode_url(ByteView bytes) {
  auto text = encode(bytes);
  for (auto& c : text) {
    if (c == '+') c = '-';
    if (c == '/') c = '_';
  }
  while (!text.empty() && text.back() == '=') text.pop_back();
  return text;
}

std::optional<Bytes> decode_url(std::string_view text) {
  if (text.size() % 4 == 1) return std::nullopt;
  std::string standard(text);
  for (auto& c : standard) {
    if (c == '-') {
      c = '+';
    } else if (c == '_') {
      c = '/';
    } else if (kReverse[static_cast<unsigned char>(c)] < 0 || c == '+' || c == '/') {
      return std::nullopt;
    }
  }
  while (standard.size() % 4 != 0) standard.push_back('=');
  return decode(standard);
}

}  // namespace didlkit::base64
