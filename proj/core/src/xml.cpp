#include "didlkit/xml.hpp"

#include <expat.h>

#include <algorithm>
#include <climits>
#include <set>

namespace didlkit::xml {

// ---------------------------------------------------------------------------
// Element helpers

const std::string* Element::attribute(const QName& qname) const {
  for (const auto& attr : attributes) {
    if (attr.name == qname) return &attr.value;
  }
  return nullptr;
}

void Element::set_attribute(QName qname, std::string value) {
  for (auto& attr : attributes) {
    if (attr.name == qname) {
      attr.value = std::move(value);
      return;
    }
  }
  attributes.push_back({std::move(qname), std::move(value)});
}

bool Element::has_element_children() const {
  return std::any_of(children.begin(), children.end(), [](const Node& n) { return n.is_element(); });
}

std::string Element::text() const {
  std::string out;
  for (const auto& child : children) {
    if (child.is_text()) out += child.text();
  }
  return out;
}

std::vector<const Element*> Element::elements() const {
  std::vector<const Element*> out;
  for (const auto& child : children) {
    if (child.is_element()) out.push_back(&child.element());
  }
  return out;
}

bool is_whitespace(std::string_view text) {
  return std::all_of(text.begin(), text.end(),
                     [](char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; });
}

std::vector<Node> normalized(const std::vector<Node>& nodes) {
  std::vector<Node> merged;
  for (const auto& node : nodes) {
    if (node.is_text()) {
      if (node.text().empty()) continue;
      if (!merged.empty() && merged.back().is_text()) {
        merged.back().text() += node.text();
      } else {
        merged.push_back(node);
      }
    } else {
      merged.push_back(node);
    }
  }
  bool any_element =
      std::any_of(merged.begin(), merged.end(), [](const Node& n) { return n.is_element(); });
  if (!any_element) return merged;
  std::vector<Node> out;
  for (auto& node : merged) {
    if (node.is_text() && is_whitespace(node.text())) continue;
    out.push_back(std::move(node));
  }
  return out;
}

namespace {

std::vector<Attribute> sorted_attributes(const Element& e) {
  auto attrs = e.attributes;
  std::sort(attrs.begin(), attrs.end(),
            [](const Attribute& a, const Attribute& b) { return a.name < b.name; });
  return attrs;
}

}  // namespace

bool equivalent(const std::vector<Node>& a, const std::vector<Node>& b) {
  auto na = normalized(a);
  auto nb = normalized(b);
  if (na.size() != nb.size()) return false;
  for (std::size_t i = 0; i < na.size(); ++i) {
    if (na[i].is_text() != nb[i].is_text()) return false;
    if (na[i].is_text()) {
      if (na[i].text() != nb[i].text()) return false;
    } else if (!equivalent(na[i].element(), nb[i].element())) {
      return false;
    }
  }
  return true;
}

bool equivalent(const Element& a, const Element& b) {
  if (a.name != b.name) return false;
  if (sorted_attributes(a) != sorted_attributes(b)) return false;
  return equivalent(a.children, b.children);
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

constexpr char kSeparator = '\x01';

struct ParserState {
  XML_Parser parser = nullptr;
  std::vector<Element> stack;
  std::optional<Element> root;
  std::optional<ParseError> error;
};

QName split_name(const XML_Char* raw, std::string* prefix) {
  std::string_view name(raw);
  auto first = name.find(kSeparator);
  if (first == std::string_view::npos) return {"", std::string(name)};
  auto rest = name.substr(first + 1);
  auto second = rest.find(kSeparator);
  QName out{std::string(name.substr(0, first)), std::string(rest.substr(0, second))};
  if (prefix != nullptr && second != std::string_view::npos) {
    *prefix = std::string(rest.substr(second + 1));
  }
  return out;
}

void fail(ParserState& state, std::string code, std::string message) {
  if (!state.error) {
    state.error = ParseError{std::move(code), std::move(message),
                             static_cast<std::size_t>(XML_GetCurrentLineNumber(state.parser))};
  }
  XML_StopParser(state.parser, XML_FALSE);
}

void XMLCALL on_start(void* data, const XML_Char* name, const XML_Char** attrs) {
  auto& state = *static_cast<ParserState*>(data);
  if (state.error) return;
  if (state.stack.size() >= kMaxDepth) {
    fail(state, "E-DEPTH", "element nesting exceeds " + std::to_string(kMaxDepth));
    return;
  }
  Element element;
  element.name = split_name(name, &element.prefix_hint);
  for (auto p = attrs; *p != nullptr; p += 2) {
    element.attributes.push_back({split_name(p[0], nullptr), std::string(p[1])});
  }
  state.stack.push_back(std::move(element));
}

void XMLCALL on_end(void* data, const XML_Char* /*name*/) {
  auto& state = *static_cast<ParserState*>(data);
  if (state.error || state.stack.empty()) return;
  Element done = std::move(state.stack.back());
  state.stack.pop_back();
  if (state.stack.empty()) {
    state.root = std::move(done);
  } else {
    state.stack.back().children.emplace_back(std::move(done));
  }
}

void XMLCALL on_text(void* data, const XML_Char* text, int len) {
  auto& state = *static_cast<ParserState*>(data);
  if (state.error || state.stack.empty()) return;
  auto& children = state.stack.back().children;
  if (!children.empty() && children.back().is_text()) {
    children.back().text().append(text, static_cast<std::size_t>(len));
  } else {
    children.emplace_back(std::string(text, static_cast<std::size_t>(len)));
  }
}

void XMLCALL on_xml_decl(void* data, const XML_Char* /*version*/, const XML_Char* encoding,
                         int /*standalone*/) {
  auto& state = *static_cast<ParserState*>(data);
  if (encoding == nullptr) return;
  std::string enc(encoding);
  std::transform(enc.begin(), enc.end(), enc.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  if (enc != "UTF-8" && enc != "UTF8") {
    fail(state, "E-ENCODING", "document declares encoding '" + std::string(encoding) +
                                  "'; only UTF-8 is accepted");
  }
}

void XMLCALL on_doctype(void* data, const XML_Char* /*name*/, const XML_Char* /*sysid*/,
                        const XML_Char* /*pubid*/, int /*has_internal_subset*/) {
  fail(*static_cast<ParserState*>(data), "E-DTD", "document type declarations are not accepted");
}

void XMLCALL on_entity_decl(void* data, const XML_Char* /*name*/, int /*parameter*/,
                            const XML_Char* /*value*/, int /*value_length*/,
                            const XML_Char* /*base*/, const XML_Char* /*system_id*/,
                            const XML_Char* /*public_id*/, const XML_Char* /*notation*/) {
  fail(*static_cast<ParserState*>(data), "E-DTD", "entity declarations are not accepted");
}

}  // namespace

ParseOutcome parse(std::string_view bytes) {
  ParseOutcome outcome;
  if (bytes.size() >= 2 && ((static_cast<unsigned char>(bytes[0]) == 0xFE &&
                             static_cast<unsigned char>(bytes[1]) == 0xFF) ||
                            (static_cast<unsigned char>(bytes[0]) == 0xFF &&
                             static_cast<unsigned char>(bytes[1]) == 0xFE))) {
    outcome.error = ParseError{"E-ENCODING", "UTF-16 input is not accepted", 1};
    return outcome;
  }

  ParserState state;
  state.parser = XML_ParserCreateNS("UTF-8", kSeparator);
  if (state.parser == nullptr) {
    outcome.error = ParseError{"E-XML", "cannot allocate XML parser", 0};
    return outcome;
  }
  XML_SetUserData(state.parser, &state);
  XML_SetReturnNSTriplet(state.parser, 1);
  XML_SetElementHandler(state.parser, on_start, on_end);
  XML_SetCharacterDataHandler(state.parser, on_text);
  XML_SetXmlDeclHandler(state.parser, on_xml_decl);
  XML_SetStartDoctypeDeclHandler(state.parser, on_doctype);
  XML_SetEntityDeclHandler(state.parser, on_entity_decl);
  XML_SetParamEntityParsing(state.parser, XML_PARAM_ENTITY_PARSING_NEVER);

  constexpr std::size_t kChunk = 1 << 20;
  std::size_t offset = 0;
  bool ok = true;
  do {
    auto len = std::min(kChunk, bytes.size() - offset);
    bool last = offset + len == bytes.size();
    if (XML_Parse(state.parser, bytes.data() + offset, static_cast<int>(len), last ? 1 : 0) ==
        XML_STATUS_ERROR) {
      ok = false;
      break;
    }
    offset += len;
  } while (offset < bytes.size());

  if (!ok && !state.error) {
    state.error = ParseError{"E-XML", XML_ErrorString(XML_GetErrorCode(state.parser)),
                             static_cast<std::size_t>(XML_GetCurrentLineNumber(state.parser))};
  }
  XML_ParserFree(state.parser);

  if (state.error) {
    outcome.error = std::move(state.error);
  } else if (!state.root) {
    outcome.error = ParseError{"E-XML", "no root element", 0};
  } else {
    outcome.root = std::move(state.root);
  }
  return outcome;
}

// ---------------------------------------------------------------------------
// Writing

PrefixTable::PrefixTable() {
  fixed_ = {
      {"urn:mpeg:mpeg21:2002:02-DIDL-NS", "didl"},
      {"urn:mpeg:mpeg21:2002:01-DII-NS", "dii"},
      {"urn:mpeg:mpeg21:2003:01-REL-R-NS", "r"},
      {"http://library.lanl.gov/2005-08/aDORe/DIDLextension/", "diext"},
      {"http://www.w3.org/2000/09/xmldsig#", "dsig"},
      {"http://www.openarchives.org/OAI/2.0/oai_dc/", "oai_dc"},
      {"http://www.openarchives.org/OAI/2.0/", "oai"},
      {"http://purl.org/dc/elements/1.1/", "dc"},
      {"http://purl.org/dc/terms/", "dcterms"},
      {"http://library.lanl.gov/2004-01/STB-RL/DIADM", "diadm"},
      {"urn:x-didlkit:integrity:1", "dik"},
      {"http://www.w3.org/2001/XMLSchema-instance", "xsi"},
      {"http://www.w3.org/1999/02/22-rdf-syntax-ns#", "rdf"},
      {std::string(kXmlNamespace), "xml"},
  };
}

void PrefixTable::bind(std::string ns, std::string prefix) {
  for (auto it = fixed_.begin(); it != fixed_.end();) {
    if (it->second == prefix) {
      it = fixed_.erase(it);
    } else {
      ++it;
    }
  }
  fixed_[std::move(ns)] = std::move(prefix);
}

std::string PrefixTable::prefix_for(const std::string& ns) {
  if (auto it = fixed_.find(ns); it != fixed_.end()) return it->second;
  if (auto it = generated_.find(ns); it != generated_.end()) return it->second;
  auto prefix = "ns" + std::to_string(next_++);
  generated_[ns] = prefix;
  return prefix;
}

std::string escape_text(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '\r': out += "&#xD;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::string escape_attribute(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '"': out += "&quot;"; break;
      case '\t': out += "&#x9;"; break;
      case '\n': out += "&#xA;"; break;
      case '\r': out += "&#xD;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

namespace {

class Writer {
 public:
  Writer(PrefixTable prefixes, const WriteOptions& options)
      : prefixes_(std::move(prefixes)), options_(options) {}

  std::string run(const Element& root) {
    if (options_.xml_declaration) {
      out_ += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    }
    std::set<std::string> scope;
    element(root, 0, false, scope, true);
    if (options_.style == Style::pretty) out_ += '\n';
    return std::move(out_);
  }

 private:
  std::string qualified(const QName& name) {
    if (name.ns.empty()) return name.local;
    return prefixes_.prefix_for(name.ns) + ":" + name.local;
  }

  void indent(int depth) {
    out_ += '\n';
    out_.append(static_cast<std::size_t>(depth) * 2, ' ');
  }

  void element(const Element& e, int depth, bool inline_mode, const std::set<std::string>& scope,
               bool is_root) {
    const bool canonical = options_.style == Style::canonical;

    std::vector<std::string> needed;
    auto need = [&](const std::string& ns) {
      if (ns.empty() || ns == kXmlNamespace) return;
      if (scope.count(ns) != 0) return;
      if (std::find(needed.begin(), needed.end(), ns) == needed.end()) needed.push_back(ns);
    };
    if (is_root) {
      for (const auto& ns : options_.root_namespaces) need(ns);
    }
    need(e.name.ns);
    for (const auto& attr : e.attributes) need(attr.name.ns);

    std::vector<std::pair<std::string, std::string>> declarations;
    for (const auto& ns : needed) declarations.emplace_back(prefixes_.prefix_for(ns), ns);
    std::sort(declarations.begin(), declarations.end());

    const std::set<std::string>* child_scope = &scope;
    std::set<std::string> extended;
    if (!declarations.empty()) {
      extended = scope;
      for (const auto& d : declarations) extended.insert(d.second);
      child_scope = &extended;
    }

    out_ += '<';
    out_ += qualified(e.name);
    for (const auto& [prefix, ns] : declarations) {
      out_ += " xmlns:" + prefix + "=\"" + escape_attribute(ns) + "\"";
    }

    std::vector<std::pair<std::string, const Attribute*>> attrs;
    for (const auto& attr : e.attributes) attrs.emplace_back(qualified(attr.name), &attr);
    if (canonical && e.name.ns != options_.ordered_namespace) {
      std::stable_sort(attrs.begin(), attrs.end(),
                       [](const auto& a, const auto& b) { return a.first < b.first; });
    }
    for (const auto& [qname, attr] : attrs) {
      out_ += ' ' + qname + "=\"" + escape_attribute(attr->value) + "\"";
    }

    std::vector<Node> normalized_children;
    const std::vector<Node>* children = &e.children;
    if (canonical) {
      normalized_children = normalized(e.children);
      children = &normalized_children;
    }
    if (children->empty()) {
      out_ += "/>";
      return;
    }
    out_ += '>';

    bool has_text = std::any_of(children->begin(), children->end(),
                                [](const Node& n) { return n.is_text(); });
    bool pretty_block = !canonical && !inline_mode && !has_text;
    for (const auto& child : *children) {
      if (child.is_text()) {
        out_ += escape_text(child.text());
      } else {
        if (pretty_block) indent(depth + 1);
        element(child.element(), depth + 1, !pretty_block, *child_scope, false);
      }
    }
    if (pretty_block) indent(depth);
    out_ += "</";
    out_ += qualified(e.name);
    out_ += '>';
  }

  PrefixTable prefixes_;
  const WriteOptions& options_;
  std::string out_;
};

}  // namespace

std::string write(const Element& root, PrefixTable prefixes, const WriteOptions& options) {
  return Writer(std::move(prefixes), options).run(root);
}

}  // namespace didlkit::xml
