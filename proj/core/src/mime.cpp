#include "didlkit/mime.hpp"

#include <algorithm>
#include <cctype>

namespace didlkit::mime {

namespace {

// RFC 2045 token characters.
bool is_tchar(char c) {
  auto u = static_cast<unsigned char>(c);
  if (u <= 0x20 || u >= 0x7f) return false;
  switch (c) {
    case '(': case ')': case '<': case '>': case '@': case ',': case ';': case ':':
    case '\\': case '"': case '/': case '[': case ']': case '?': case '=':
      return false;
    default:
      return true;
  }
}

class Cursor {
 public:
  explicit Cursor(std::string_view text) : text_(text) {}

  bool done() const { return pos_ >= text_.size(); }
  char peek() const { return text_[pos_]; }
  void skip_ows() {
    while (!done() && (peek() == ' ' || peek() == '\t')) ++pos_;
  }
  bool eat(char c) {
    if (done() || peek() != c) return false;
    ++pos_;
    return true;
  }
  std::string_view token() {
    auto start = pos_;
    while (!done() && is_tchar(peek())) ++pos_;
    return text_.substr(start, pos_ - start);
  }
  bool quoted_string() {
    if (!eat('"')) return false;
    while (!done()) {
      char c = peek();
      ++pos_;
      if (c == '"') return true;
      if (c == '\\') {
        if (done()) return false;
        ++pos_;
      } else if (static_cast<unsigned char>(c) < 0x20 && c != '\t') {
        return false;
      }
    }
    return false;
  }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

bool is_well_formed(std::string_view media_type) {
  Cursor cur(media_type);
  if (cur.token().empty()) return false;
  if (!cur.eat('/')) return false;
  if (cur.token().empty()) return false;
  cur.skip_ows();
  while (!cur.done()) {
    if (!cur.eat(';')) return false;
    cur.skip_ows();
    if (cur.token().empty()) return false;
    if (!cur.eat('=')) return false;
    if (!cur.done() && cur.peek() == '"') {
      if (!cur.quoted_string()) return false;
    } else if (cur.token().empty()) {
      return false;
    }
    cur.skip_ows();
  }
  return true;
}

std::string essence(std::string_view media_type) {
  if (!is_well_formed(media_type)) return {};
  auto end = media_type.find_first_of("; \t");
  std::string out(media_type.substr(0, end));
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

}  // namespace didlkit::mime
