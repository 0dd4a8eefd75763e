#pragma once

#include <compare>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace didlkit::xml {

inline constexpr std::string_view kXmlNamespace = "http://www.w3.org/XML/1998/namespace";

struct QName {
  std::string ns;  // empty for no namespace
  std::string local;

  friend auto operator<=>(const QName&, const QName&) = default;
  friend bool operator==(const QName&, const QName&) = default;
};

struct Attribute {
  QName name;
  std::string value;

  friend bool operator==(const Attribute&, const Attribute&) = default;
};

struct Node;

struct Element {
  QName name;
  std::vector<Attribute> attributes;
  std::vector<Node> children;
  // Prefix seen in the source document; informational only, writers normalize.
  std::string prefix_hint;

  const std::string* attribute(const QName& name) const;
  void set_attribute(QName name, std::string value);
  bool has_element_children() const;
  // Concatenation of the direct text children.
  std::string text() const;
  std::vector<const Element*> elements() const;
};

struct Node {
  std::variant<std::string, Element> value;

  Node(std::string text) : value(std::move(text)) {}  // NOLINT(google-explicit-constructor)
  Node(Element element) : value(std::move(element)) {}  // NOLINT(google-explicit-constructor)

  bool is_text() const { return std::holds_alternative<std::string>(value); }
  bool is_element() const { return std::holds_alternative<Element>(value); }
  const std::string& text() const { return std::get<std::string>(value); }
  std::string& text() { return std::get<std::string>(value); }
  const Element& element() const { return std::get<Element>(value); }
  Element& element() { return std::get<Element>(value); }
};

bool is_whitespace(std::string_view text);

// Tree equality that ignores prefix spelling, attribute order, comments,
// adjacent-text splits and whitespace-only text next to element siblings.
bool equivalent(const Element& a, const Element& b);
bool equivalent(const std::vector<Node>& a, const std::vector<Node>& b);

// Copy with adjacent text merged and insignificant whitespace removed.
std::vector<Node> normalized(const std::vector<Node>& nodes);

// ---------------------------------------------------------------------------
// Parsing

inline constexpr std::size_t kMaxDepth = 256;

struct ParseError {
  std::string code;  // E-XML, E-DTD, E-ENCODING, E-DEPTH
  std::string message;
  std::size_t line = 0;
};

struct ParseOutcome {
  std::optional<Element> root;
  std::optional<ParseError> error;
};

// Namespace-aware, UTF-8 only. DTDs and entity declarations are refused.
// Comments and processing instructions are dropped.
ParseOutcome parse(std::string_view bytes);

// ---------------------------------------------------------------------------
// Writing

enum class Style {
  // Indents element-only content; text-bearing elements are written verbatim.
  pretty,
  // No inter-element whitespace, attributes of foreign elements sorted,
  // whitespace-only text between elements dropped.
  canonical,
};

// Maps namespace URIs to prefixes: a fixed table for the well-known
// vocabularies, then ns1, ns2, ... in order of first use within one write.
class PrefixTable {
 public:
  PrefixTable();
  void bind(std::string ns, std::string prefix);
  std::string prefix_for(const std::string& ns);

 private:
  std::map<std::string, std::string> fixed_;
  std::map<std::string, std::string> generated_;
  int next_ = 1;
};

struct WriteOptions {
  Style style = Style::pretty;
  bool xml_declaration = true;
  // Namespaces declared on the root element even if only used deeper.
  std::vector<std::string> root_namespaces;
  // Elements of this namespace keep their attribute order as stored.
  std::string ordered_namespace;
};

std::string write(const Element& root, PrefixTable prefixes, const WriteOptions& options);

std::string escape_text(std::string_view text);
std::string escape_attribute(std::string_view text);

}  // namespace didlkit::xml
