#include "didlkit/dii.hpp"

#include "didlkit/error.hpp"
#include "didlkit/namespaces.hpp"
#include "didlkit/uri.hpp"

namespace didlkit::dii {

using model::Kind;
using model::Node;
using model::NodePath;

namespace {

std::string trimmed(std::string_view text) {
  auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  auto last = text.find_last_not_of(" \t\r\n");
  return std::string(text.substr(first, last - first + 1));
}

std::string checked_value(const xml::Element& e) {
  auto value = trimmed(e.text());
  if (e.has_element_children() || !uri::is_absolute(value)) {
    throw Error(Errc::malformed_identifier,
                "dii:" + e.name.local + " '" + value + "' is not an absolute URI");
  }
  return value;
}

// Calls `fn(element, host_path)` for every DII element named `local` carried by
// a Descriptor (or nested Descriptor) of a non-Descriptor entity.
template <typename Fn>
void scan(const model::DidlDocument& doc, std::string_view local, Fn fn) {
  const xml::QName name{std::string(ns::kDii), std::string(local)};
  std::function<void(const Node&, const NodePath&)> descriptor = [&](const Node& d,
                                                                     const NodePath& host) {
    for (const auto& child : d.children) {
      if (child.kind == Kind::statement) {
        for (const auto* e : model::statement_elements(child, name)) fn(*e, host);
      } else if (child.kind == Kind::descriptor) {
        descriptor(child, host);
      }
    }
  };
  model::visit(doc, [&](const Node& node, const NodePath& path, const Node*) {
    if (node.kind == Kind::descriptor) return;
    for (const auto& child : node.children) {
      if (child.kind == Kind::descriptor) descriptor(child, path);
    }
  });
}

}  // namespace

bool is_identifiable(Kind kind) {
  return kind == Kind::container || kind == Kind::item || kind == Kind::component ||
         kind == Kind::anchor;
}

std::vector<Identifier> extract_identifiers(const model::DidlDocument& doc) {
  std::vector<Identifier> out;
  scan(doc, "Identifier", [&](const xml::Element& e, const NodePath& host) {
    out.push_back({checked_value(e), host});
  });
  return out;
}

std::vector<RelatedIdentifier> extract_related(const model::DidlDocument& doc) {
  std::vector<RelatedIdentifier> out;
  scan(doc, "RelatedIdentifier", [&](const xml::Element& e, const NodePath& host) {
    RelatedIdentifier related{checked_value(e), std::nullopt, host};
    if (const auto* type = e.attribute({"", "relationshipType"})) {
      auto value = trimmed(*type);
      if (!uri::is_absolute(value)) {
        throw Error(Errc::malformed_identifier,
                    "relationshipType '" + *type + "' is not an absolute URI");
      }
      related.relationship_type = value;
    }
    out.push_back(std::move(related));
  });
  return out;
}

std::vector<std::string> identifiers_of(const Node& host) {
  const xml::QName name{std::string(ns::kDii), "Identifier"};
  std::vector<std::string> out;
  for (const auto* d : host.children_of(Kind::descriptor)) {
    for (const auto* s : d->children_of(Kind::statement)) {
      for (const auto* e : model::statement_elements(*s, name)) out.push_back(checked_value(*e));
    }
  }
  return out;
}

Node identifier_descriptor(const std::string& uri) {
  xml::Element id;
  id.name = {std::string(ns::kDii), "Identifier"};
  id.children.emplace_back(uri);
  return model::make_descriptor(
      {model::make_statement_xml(std::string(ns::kXmlStatementMime), {xml::Node(std::move(id))})});
}

model::DidlDocument attach_identifier(const model::DidlDocument& doc, const NodePath& host,
                                      const std::string& uri) {
  if (!uri::is_absolute(uri)) throw Error(Errc::invalid_uri, "'" + uri + "' is not an absolute URI");
  const Node* target = model::node_at(doc, host);
  if (!target) throw Error(Errc::not_found, "no entity at " + host.to_string());
  if (!is_identifiable(target->kind)) {
    throw Error(Errc::bad_target, std::string(model::kind_name(target->kind)) +
                                      " entities cannot carry an identifier");
  }
  model::DidlDocument copy = doc;
  Node* node = model::node_at(copy, host);
  node->children.insert(node->children.begin(), identifier_descriptor(uri));
  return copy;
}

}  // namespace didlkit::dii
