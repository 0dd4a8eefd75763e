#include "didlkit/codec.hpp"

#include <algorithm>
#include <sstream>

#include "didlkit/base64.hpp"
#include "didlkit/error.hpp"

namespace didlkit::codec {

using model::Kind;
using model::Node;
using model::NodePath;

std::string_view severity_name(Severity severity) {
  switch (severity) {
    case Severity::fatal: return "fatal";
    case Severity::error: return "error";
    case Severity::warning: return "warning";
  }
  return {};
}

bool ParseResult::has_fatal() const {
  return std::any_of(diagnostics.begin(), diagnostics.end(),
                     [](const ParseDiagnostic& d) { return d.severity == Severity::fatal; });
}

bool ParseResult::has_errors() const {
  return std::any_of(diagnostics.begin(), diagnostics.end(),
                     [](const ParseDiagnostic& d) { return d.severity != Severity::warning; });
}

namespace {

std::vector<std::string> split_tokens(std::string_view text) {
  std::vector<std::string> out;
  std::istringstream in{std::string(text)};
  std::string token;
  while (in >> token) out.push_back(token);
  return out;
}

bool takes_id(Kind kind) {
  switch (kind) {
    case Kind::container:
    case Kind::item:
    case Kind::component:
    case Kind::descriptor:
    case Kind::anchor:
    case Kind::annotation:
      return true;
    default:
      return false;
  }
}

class Mapper {
 public:
  Mapper(const NamespaceTable& namespaces, std::vector<ParseDiagnostic>& diagnostics)
      : namespaces_(namespaces), diagnostics_(diagnostics) {}

  bool failed() const { return fatal_; }

  void report(std::string code, const NodePath& path, std::string message, Severity severity) {
    if (severity == Severity::fatal) fatal_ = true;
    diagnostics_.push_back({std::move(code), path.to_string(), std::move(message), severity});
  }

  std::optional<Node> entity(const xml::Element& e, const NodePath& path) {
    if (e.name.ns != NamespaceTable::didl) {
      report("E-FOREIGN-CONTENT", path,
             "element {" + e.name.ns + "}" + e.name.local + " is not allowed in DIDL structure",
             Severity::fatal);
      return std::nullopt;
    }
    if (e.name.local == "Reference" || e.name.local == "Declarations") {
      report("E-REFERENCE-REMOVED", path,
             e.name.local + " was removed from the second edition of DIDL", Severity::fatal);
      return std::nullopt;
    }
    auto kind = model::kind_from_element(e.name.local);
    if (!kind) {
      report("E-UNKNOWN-ELEMENT", path, "unknown DIDL element " + e.name.local, Severity::fatal);
      return std::nullopt;
    }

    Node node;
    node.kind = *kind;
    if (node.kind == Kind::choice) {
      node.opaque = e;
      return node;
    }

    bool payload_kind = node.kind == Kind::statement || node.kind == Kind::resource;
    for (const auto& attr : e.attributes) {
      const auto& local = attr.name.local;
      if (!attr.name.ns.empty()) {
        node.foreign_attributes[attr.name] = attr.value;
      } else if (local == "id" && takes_id(node.kind)) {
        node.xml_id = attr.value;
      } else if (payload_kind && local == "mimeType") {
        node.payload.mime_type = attr.value;
      } else if (payload_kind && local == "ref") {
        node.payload.ref = attr.value;
      } else if (payload_kind && local == "encoding") {
        node.payload.encoding = attr.value;
      } else if (payload_kind && local == "contentEncoding") {
        node.payload.content_encoding = split_tokens(attr.value);
      } else if (node.kind == Kind::fragment && local == "fragmentId") {
        node.fragment_id = attr.value;
      } else if (node.kind == Kind::annotation && local == "target") {
        node.target = attr.value;
      } else {
        node.foreign_attributes[attr.name] = attr.value;
      }
    }

    if (payload_kind) {
      if (!node.payload.mime_type) {
        report("E-MIMETYPE", path, e.name.local + " lacks the mandatory mimeType attribute",
               Severity::error);
      }
      if (e.has_element_children()) {
        node.payload.content = model::ByValueXml{e.children};
      } else {
        auto text = e.text();
        if (!text.empty() && !(node.payload.ref && xml::is_whitespace(text))) {
          node.payload.content = std::move(text);
        }
      }
      return node;
    }

    for (const auto& child : e.children) {
      if (child.is_text()) {
        if (!xml::is_whitespace(child.text())) {
          report("E-MIXED-CONTENT", path, "character data inside " + e.name.local,
                 Severity::fatal);
        }
        continue;
      }
      auto mapped = entity(child.element(), path.child(node.children.size()));
      if (mapped) node.children.push_back(std::move(*mapped));
    }
    return node;
  }

  void structural(const std::vector<model::StructuralIssue>& issues) {
    for (const auto& issue : issues) {
      fatal_ = true;
      diagnostics_.push_back({issue.code, issue.path, issue.message, Severity::fatal});
    }
  }

 private:
  const NamespaceTable& namespaces_;
  std::vector<ParseDiagnostic>& diagnostics_;
  bool fatal_ = false;
};

std::optional<xml::Element> parse_xml(std::string_view bytes,
                                      std::vector<ParseDiagnostic>& diagnostics) {
  auto outcome = xml::parse(bytes);
  if (outcome.error) {
    diagnostics.push_back({outcome.error->code, "/",
                           outcome.error->message + " (line " +
                               std::to_string(outcome.error->line) + ")",
                           Severity::fatal});
    return std::nullopt;
  }
  return std::move(outcome.root);
}

}  // namespace

ParseResult parse_didl(std::string_view bytes, const NamespaceTable& namespaces) {
  ParseResult result;
  auto root = parse_xml(bytes, result.diagnostics);
  if (!root) return result;

  Mapper mapper(namespaces, result.diagnostics);
  NodePath top;
  if (root->name.local != "DIDL") {
    mapper.report("E-ROOT", top, "root element is " + root->name.local + ", expected DIDL",
                  Severity::fatal);
    return result;
  }
  if (root->name.ns != NamespaceTable::didl) {
    mapper.report("E-ROOT-NAMESPACE", top,
                  "root element namespace is '" + root->name.ns + "', expected " +
                      std::string(NamespaceTable::didl),
                  Severity::fatal);
    return result;
  }

  model::DidlDocument doc;
  const xml::QName created_name{namespaces.ext, "DIDLDocumentCreated"};
  for (const auto& attr : root->attributes) {
    if (attr.name.ns.empty() && attr.name.local == "DIDLDocumentId") {
      doc.document_id = attr.value;
    } else if (attr.name == created_name) {
      if (auto ts = Timestamp::parse(attr.value)) {
        doc.document_created = *ts;
      } else {
        mapper.report("E-CREATED", top, "DIDLDocumentCreated is not an RFC 3339 date-time",
                      Severity::error);
        doc.foreign_attributes[attr.name] = attr.value;
      }
    } else {
      doc.foreign_attributes[attr.name] = attr.value;
    }
  }

  for (const auto& child : root->children) {
    if (child.is_text()) {
      if (!xml::is_whitespace(child.text())) {
        mapper.report("E-MIXED-CONTENT", top, "character data inside DIDL", Severity::fatal);
      }
      continue;
    }
    const auto& e = child.element();
    if (e.name.ns == NamespaceTable::didl && e.name.local == "DIDLInfo") {
      for (const auto& info : e.children) {
        if (info.is_element()) {
          doc.didl_info.push_back(info.element());
        } else if (!xml::is_whitespace(info.text())) {
          mapper.report("E-MIXED-CONTENT", top, "character data inside DIDLInfo", Severity::fatal);
        }
      }
      continue;
    }
    auto mapped = mapper.entity(e, top.child(doc.root_entities.size()));
    if (mapped) doc.root_entities.push_back(std::move(*mapped));
  }
  if (mapper.failed()) return result;

  mapper.structural(model::check_structure(doc));
  if (mapper.failed()) return result;
  result.document = std::move(doc);
  return result;
}

EntityParseResult parse_entity(std::string_view bytes, const NamespaceTable& namespaces) {
  EntityParseResult result;
  auto root = parse_xml(bytes, result.diagnostics);
  if (!root) return result;
  Mapper mapper(namespaces, result.diagnostics);
  NodePath top;
  auto node = mapper.entity(*root, top);
  if (mapper.failed() || !node) return result;
  mapper.structural(model::check_structure(*node, top));
  if (mapper.failed()) return result;
  result.node = std::move(node);
  return result;
}

// ---------------------------------------------------------------------------

namespace {

std::string join(const std::vector<std::string>& tokens) {
  std::string out;
  for (const auto& t : tokens) {
    if (!out.empty()) out += ' ';
    out += t;
  }
  return out;
}

xml::Element node_element(const Node& node, const SerializeOptions& options, bool canonical) {
  if (node.kind == Kind::choice) return node.opaque;

  xml::Element e;
  e.name = {std::string(NamespaceTable::didl), std::string(model::element_name(node))};
  auto add = [&](std::string_view local, const std::string& value) {
    e.attributes.push_back({{"", std::string(local)}, value});
  };
  if (node.xml_id) add("id", *node.xml_id);

  const auto& payload = node.payload;
  if (node.kind == Kind::statement || node.kind == Kind::resource) {
    if (payload.mime_type) add("mimeType", *payload.mime_type);
    if (payload.ref) add("ref", *payload.ref);
    if (payload.encoding) add("encoding", *payload.encoding);
    if (!payload.content_encoding.empty()) add("contentEncoding", join(payload.content_encoding));
  }
  if (node.kind == Kind::fragment) add("fragmentId", node.fragment_id);
  if (node.kind == Kind::annotation) add("target", node.target);
  for (const auto& [name, value] : node.foreign_attributes) e.attributes.push_back({name, value});

  if (node.kind == Kind::statement || node.kind == Kind::resource) {
    if (const auto* text = std::get_if<std::string>(&payload.content)) {
      if (payload.encoding && *payload.encoding == "base64") {
        auto decoded = base64::decode(*text);
        if (decoded) {
          if (!decoded->empty()) {
            auto wrapped = base64::encode_wrapped(*decoded);
            e.children.emplace_back(canonical ? wrapped : "\n" + wrapped + "\n");
          }
        } else if (options.reject_invalid_payloads) {
          throw Error(Errc::codec_error, "refusing to serialize an invalid base64 payload");
        } else {
          e.children.emplace_back(*text);
        }
      } else {
        e.children.emplace_back(*text);
      }
    } else if (const auto* inline_xml = std::get_if<model::ByValueXml>(&payload.content)) {
      e.children = inline_xml->nodes;
    }
    return e;
  }

  for (const auto& child : node.children) {
    e.children.emplace_back(node_element(child, options, canonical));
  }
  return e;
}

xml::Element document_element(const model::DidlDocument& doc, const SerializeOptions& options,
                              bool canonical) {
  xml::Element root;
  root.name = {std::string(NamespaceTable::didl), "DIDL"};
  if (doc.document_id) root.attributes.push_back({{"", "DIDLDocumentId"}, *doc.document_id});
  if (doc.document_created) {
    root.attributes.push_back(
        {{options.namespaces.ext, "DIDLDocumentCreated"}, doc.document_created->to_string()});
  }
  for (const auto& [name, value] : doc.foreign_attributes) {
    if (doc.document_created && name == xml::QName{options.namespaces.ext, "DIDLDocumentCreated"}) {
      continue;
    }
    root.attributes.push_back({name, value});
  }
  if (!doc.didl_info.empty()) {
    xml::Element info;
    info.name = {std::string(NamespaceTable::didl), "DIDLInfo"};
    for (const auto& e : doc.didl_info) info.children.emplace_back(e);
    root.children.emplace_back(std::move(info));
  }
  for (const auto& entity : doc.root_entities) {
    root.children.emplace_back(node_element(entity, options, canonical));
  }
  return root;
}

xml::PrefixTable prefixes_for(const SerializeOptions& options) {
  xml::PrefixTable table;
  table.bind(options.namespaces.ext, "diext");
  return table;
}

std::string write(const xml::Element& root, const SerializeOptions& options, bool canonical) {
  xml::WriteOptions write_options;
  write_options.style = canonical ? xml::Style::canonical : xml::Style::pretty;
  write_options.root_namespaces = {std::string(NamespaceTable::didl)};
  write_options.ordered_namespace = std::string(NamespaceTable::didl);
  return xml::write(root, prefixes_for(options), write_options);
}

}  // namespace

xml::Element to_element(const Node& node, const SerializeOptions& options, bool canonical) {
  return node_element(node, options, canonical);
}

std::string serialize_didl(const model::DidlDocument& doc, const SerializeOptions& options) {
  return write(document_element(doc, options, false), options, false);
}

std::string serialize_entity(const Node& node, const SerializeOptions& options) {
  return write(node_element(node, options, false), options, false);
}

std::string canonical_bytes(const model::DidlDocument& doc, const SerializeOptions& options) {
  return write(document_element(doc, options, true), options, true);
}

std::string canonical_entity(const Node& node, const SerializeOptions& options) {
  return write(node_element(node, options, true), options, true);
}

std::string canonical_nodes(const std::vector<xml::Node>& nodes) {
  xml::WriteOptions write_options;
  write_options.style = xml::Style::canonical;
  write_options.xml_declaration = false;
  std::string out;
  for (const auto& node : xml::normalized(nodes)) {
    if (node.is_text()) {
      out += xml::escape_text(node.text());
    } else {
      out += xml::write(node.element(), xml::PrefixTable{}, write_options);
    }
  }
  return out;
}

}  // namespace didlkit::codec
