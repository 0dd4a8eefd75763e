#include "didlkit/uri.hpp"

#include <algorithm>
#include <cctype>

namespace didlkit::uri {

namespace {

bool is_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }
bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_hex(char c) { return is_digit(c) || (c >= 'a' && c <= 'f') || (c >= 'A' && c <= 'F'); }

bool is_uri_char(char c) {
  if (is_alpha(c) || is_digit(c)) return true;
  switch (c) {
    // unreserved
    case '-': case '.': case '_': case '~':
    // gen-delims
    case ':': case '/': case '?': case '#': case '[': case ']': case '@':
    // sub-delims
    case '!': case '$': case '&': case '\'': case '(': case ')':
    case '*': case '+': case ',': case ';': case '=':
    case '%':
      return true;
    default:
      return false;
  }
}

std::size_t scheme_end(std::string_view text) {
  if (text.empty() || !is_alpha(text[0])) return std::string_view::npos;
  std::size_t i = 1;
  while (i < text.size() &&
         (is_alpha(text[i]) || is_digit(text[i]) || text[i] == '+' || text[i] == '-' ||
          text[i] == '.')) {
    ++i;
  }
  if (i >= text.size() || text[i] != ':') return std::string_view::npos;
  return i;
}

}  // namespace

bool is_absolute(std::string_view text) {
  auto colon = scheme_end(text);
  if (colon == std::string_view::npos) return false;
  auto rest = text.substr(colon + 1);
  if (rest.empty()) return false;
  for (std::size_t i = 0; i < rest.size(); ++i) {
    char c = rest[i];
    if (!is_uri_char(c)) return false;
    if (c == '%') {
      if (i + 2 >= rest.size()) return false;
      if (!is_hex(rest[i + 1]) || !is_hex(rest[i + 2])) return false;
      i += 2;
    }
  }
  // "#" may appear at most once (fragment delimiter).
  return std::count(rest.begin(), rest.end(), '#') <= 1;
}

std::optional<std::string> scheme(std::string_view text) {
  auto colon = scheme_end(text);
  if (colon == std::string_view::npos) return std::nullopt;
  std::string out(text.substr(0, colon));
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::optional<Hierarchical> split_hierarchical(std::string_view text) {
  auto s = scheme(text);
  if (!s) return std::nullopt;
  auto rest = text.substr(s->size() + 1);
  if (rest.substr(0, 2) != "//") return std::nullopt;
  rest.remove_prefix(2);
  auto cut = rest.find_first_of("?#");
  if (cut != std::string_view::npos) rest = rest.substr(0, cut);
  auto slash = rest.find('/');
  Hierarchical out;
  out.scheme = *s;
  out.host = std::string(rest.substr(0, slash));
  if (slash != std::string_view::npos) out.path = std::string(rest.substr(slash + 1));
  if (out.host.empty()) return std::nullopt;
  return out;
}

std::string percent_encode(std::string_view text) {
  static constexpr char kDigits[] = "0123456789ABCDEF";
  std::string out;
  for (unsigned char c : text) {
    if (is_alpha(static_cast<char>(c)) || is_digit(static_cast<char>(c)) || c == '-' ||
        c == '.' || c == '_' || c == '~') {
      out.push_back(static_cast<char>(c));
    } else {
      out.push_back('%');
      out.push_back(kDigits[c >> 4]);
      out.push_back(kDigits[c & 0x0f]);
    }
  }
  return out;
}

std::string percent_decode(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (c == '%' && i + 2 < text.size() && is_hex(text[i + 1]) && is_hex(text[i + 2])) {
      out.push_back(static_cast<char>(std::stoi(std::string(text.substr(i + 1, 2)), nullptr, 16)));
      i += 2;
    } else if (c == '+') {
      out.push_back(' ');
    } else {
      out.push_back(c);
    }
  }
  return out;
}

}  // namespace didlkit::uri
