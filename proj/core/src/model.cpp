#include "didlkit/model.hpp"

#include <algorithm>
#include <charconv>
#include <set>

#include "didlkit/base64.hpp"
#include "didlkit/namespaces.hpp"

namespace didlkit::model {

std::string_view kind_name(Kind kind) {
  switch (kind) {
    case Kind::container: return "container";
    case Kind::item: return "item";
    case Kind::component: return "component";
    case Kind::descriptor: return "descriptor";
    case Kind::statement: return "statement";
    case Kind::resource: return "resource";
    case Kind::anchor: return "anchor";
    case Kind::fragment: return "fragment";
    case Kind::annotation: return "annotation";
    case Kind::choice: return "choice";
  }
  return "unknown";
}

std::optional<Kind> kind_from_element(std::string_view local) {
  if (local == "Container") return Kind::container;
  if (local == "Item") return Kind::item;
  if (local == "Component") return Kind::component;
  if (local == "Descriptor") return Kind::descriptor;
  if (local == "Statement") return Kind::statement;
  if (local == "Resource") return Kind::resource;
  if (local == "Anchor") return Kind::anchor;
  if (local == "Fragment") return Kind::fragment;
  if (local == "Annotation") return Kind::annotation;
  if (local == "Choice" || local == "Selection" || local == "Condition" || local == "Assertion") {
    return Kind::choice;
  }
  return std::nullopt;
}

std::string_view element_name(const Node& node) {
  switch (node.kind) {
    case Kind::container: return "Container";
    case Kind::item: return "Item";
    case Kind::component: return "Component";
    case Kind::descriptor: return "Descriptor";
    case Kind::statement: return "Statement";
    case Kind::resource: return "Resource";
    case Kind::anchor: return "Anchor";
    case Kind::fragment: return "Fragment";
    case Kind::annotation: return "Annotation";
    case Kind::choice: return node.opaque.name.local;
  }
  return {};
}

bool Payload::has_inline_content() const {
  if (std::holds_alternative<ByValueXml>(content)) return true;
  if (const auto* text = std::get_if<std::string>(&content)) {
    return ref ? !xml::is_whitespace(*text) : true;
  }
  return false;
}

std::optional<Provision> Payload::provision() const {
  if (ref) {
    if (has_inline_content()) return std::nullopt;
    return ByReference{*ref};
  }
  if (const auto* inline_xml = std::get_if<ByValueXml>(&content)) return *inline_xml;
  if (const auto* text = std::get_if<std::string>(&content)) return ByValueText{*text};
  return ByValueText{};
}

std::vector<const Node*> Node::children_of(Kind k) const {
  std::vector<const Node*> out;
  for (const auto& child : children) {
    if (child.kind == k) out.push_back(&child);
  }
  return out;
}

// ---------------------------------------------------------------------------

std::optional<NodePath> NodePath::parse(std::string_view text) {
  if (text.empty() || text[0] != '/') return std::nullopt;
  std::vector<std::size_t> indices;
  text.remove_prefix(1);
  while (!text.empty()) {
    auto slash = text.find('/');
    auto part = text.substr(0, slash);
    std::size_t value = 0;
    auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), value);
    if (part.empty() || ec != std::errc{} || ptr != part.data() + part.size()) return std::nullopt;
    indices.push_back(value);
    if (slash == std::string_view::npos) break;
    text.remove_prefix(slash + 1);
    if (text.empty()) return std::nullopt;
  }
  return NodePath(std::move(indices));
}

NodePath NodePath::child(std::size_t index) const {
  auto indices = indices_;
  indices.push_back(index);
  return NodePath(std::move(indices));
}

std::optional<NodePath> NodePath::parent() const {
  if (indices_.empty()) return std::nullopt;
  return NodePath(std::vector<std::size_t>(indices_.begin(), indices_.end() - 1));
}

std::string NodePath::to_string() const {
  if (indices_.empty()) return "/";
  std::string out;
  for (auto i : indices_) {
    out += '/';
    out += std::to_string(i);
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

Node make(Kind kind, std::vector<Node> children) {
  Node node;
  node.kind = kind;
  node.children = std::move(children);
  return node;
}

}  // namespace

Node make_container(std::vector<Node> children) { return make(Kind::container, std::move(children)); }
Node make_item(std::vector<Node> children) { return make(Kind::item, std::move(children)); }
Node make_component(std::vector<Node> children) { return make(Kind::component, std::move(children)); }
Node make_descriptor(std::vector<Node> children) { return make(Kind::descriptor, std::move(children)); }

Node make_statement_xml(std::string mime_type, std::vector<xml::Node> nodes) {
  Node node = make(Kind::statement, {});
  node.payload.mime_type = std::move(mime_type);
  node.payload.content = ByValueXml{std::move(nodes)};
  return node;
}

Node make_statement_text(std::string mime_type, std::string text) {
  Node node = make(Kind::statement, {});
  node.payload.mime_type = std::move(mime_type);
  if (!text.empty()) node.payload.content = std::move(text);
  return node;
}

Node make_resource_ref(std::string mime_type, std::string uri) {
  Node node = make(Kind::resource, {});
  node.payload.mime_type = std::move(mime_type);
  node.payload.ref = std::move(uri);
  return node;
}

Node make_resource_text(std::string mime_type, std::string text) {
  Node node = make(Kind::resource, {});
  node.payload.mime_type = std::move(mime_type);
  if (!text.empty()) node.payload.content = std::move(text);
  return node;
}

Node make_anchor(std::vector<Node> descriptors, std::string fragment_id) {
  Node fragment = make(Kind::fragment, {});
  fragment.fragment_id = std::move(fragment_id);
  descriptors.push_back(std::move(fragment));
  return make(Kind::anchor, std::move(descriptors));
}

Node make_annotation(std::string target, std::vector<Node> payload) {
  Node node = make(Kind::annotation, std::move(payload));
  node.target = std::move(target);
  return node;
}

// ---------------------------------------------------------------------------

const Node* node_at(const DidlDocument& doc, const NodePath& path) {
  const auto& indices = path.indices();
  if (indices.empty() || indices[0] >= doc.root_entities.size()) return nullptr;
  const Node* node = &doc.root_entities[indices[0]];
  for (std::size_t i = 1; i < indices.size(); ++i) {
    if (indices[i] >= node->children.size()) return nullptr;
    node = &node->children[indices[i]];
  }
  return node;
}

Node* node_at(DidlDocument& doc, const NodePath& path) {
  return const_cast<Node*>(node_at(static_cast<const DidlDocument&>(doc), path));
}

namespace {

void visit_node(const Node& node, const NodePath& path, const Node* parent, const Visitor& visitor) {
  visitor(node, path, parent);
  for (std::size_t i = 0; i < node.children.size(); ++i) {
    visit_node(node.children[i], path.child(i), &node, visitor);
  }
}

}  // namespace

void visit(const DidlDocument& doc, const Visitor& visitor) {
  NodePath root;
  for (std::size_t i = 0; i < doc.root_entities.size(); ++i) {
    visit_node(doc.root_entities[i], root.child(i), nullptr, visitor);
  }
}

std::optional<NodeRef> find_by_id(const DidlDocument& doc, std::string_view xml_id) {
  std::optional<NodeRef> found;
  visit(doc, [&](const Node& node, const NodePath& path, const Node*) {
    if (!found && node.xml_id && *node.xml_id == xml_id) found = NodeRef{path, &node};
  });
  return found;
}

std::string_view entity_kind(const Node& node) { return kind_name(node.kind); }

std::vector<const xml::Element*> statement_elements(const Node& statement, const xml::QName& name) {
  std::vector<const xml::Element*> out;
  const auto* inline_xml = std::get_if<ByValueXml>(&statement.payload.content);
  if (inline_xml == nullptr) return out;
  for (const auto& n : inline_xml->nodes) {
    if (n.is_element() && n.element().name == name) out.push_back(&n.element());
  }
  return out;
}

std::string_view predicate_name(Predicate predicate) {
  switch (predicate) {
    case Predicate::has_resource: return "hasResource";
    case Predicate::is_part_of_item: return "isPartOfItem";
    case Predicate::has_identifier: return "hasIdentifier";
  }
  return {};
}

std::string entity_reference(const Node& node, const NodePath& path) {
  return node.xml_id ? *node.xml_id : path.to_string();
}

namespace {

std::string_view trim(std::string_view text) {
  auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  auto last = text.find_last_not_of(" \t\r\n");
  return text.substr(first, last - first + 1);
}

}  // namespace

std::vector<RelationshipTriple> derive_relationships(const DidlDocument& doc) {
  const xml::QName identifier{std::string(ns::kDii), "Identifier"};
  std::vector<RelationshipTriple> out;
  visit(doc, [&](const Node& node, const NodePath& path, const Node* parent) {
    auto self = entity_reference(node, path);
    if (node.kind == Kind::item && parent != nullptr && parent->kind == Kind::item) {
      out.push_back({self, Predicate::is_part_of_item, entity_reference(*parent, *path.parent())});
    }
    for (std::size_t i = 0; i < node.children.size(); ++i) {
      const auto& child = node.children[i];
      if (child.kind == Kind::descriptor && node.kind != Kind::descriptor) {
        for (const auto* statement : child.children_of(Kind::statement)) {
          for (const auto* id : statement_elements(*statement, identifier)) {
            out.push_back({self, Predicate::has_identifier, std::string(trim(id->text()))});
          }
        }
      } else if (child.kind == Kind::resource && node.kind == Kind::component) {
        out.push_back({self, Predicate::has_resource, entity_reference(child, path.child(i))});
      }
    }
  });
  return out;
}

// ---------------------------------------------------------------------------

namespace {

bool allowed_child(Kind parent, Kind child) {
  if (child == Kind::choice) {
    return parent != Kind::statement && parent != Kind::resource && parent != Kind::fragment &&
           parent != Kind::choice;
  }
  switch (parent) {
    case Kind::container:
      return child == Kind::container || child == Kind::item || child == Kind::descriptor;
    case Kind::item:
      return child == Kind::item || child == Kind::component || child == Kind::descriptor ||
             child == Kind::annotation;
    case Kind::component:
      return child == Kind::descriptor || child == Kind::resource || child == Kind::anchor;
    case Kind::descriptor:
      return child == Kind::statement || child == Kind::descriptor;
    case Kind::anchor:
      return child == Kind::descriptor || child == Kind::fragment;
    case Kind::annotation:
      return child == Kind::descriptor || child == Kind::anchor;
    default:
      return false;
  }
}

class StructureChecker {
 public:
  std::vector<StructuralIssue> issues;

  void check(const Node& node, const NodePath& path) {
    auto where = path.to_string();
    if (node.xml_id && !ids_.insert(*node.xml_id).second) {
      add("E-DUPLICATE-ID", where, "duplicate XML ID '" + *node.xml_id + "'");
    }
    for (std::size_t i = 0; i < node.children.size(); ++i) {
      const auto& child = node.children[i];
      if (!allowed_child(node.kind, child.kind)) {
        add("E-CONTAINMENT", path.child(i).to_string(),
            std::string(kind_name(child.kind)) + " is not allowed inside " +
                std::string(kind_name(node.kind)));
      }
    }
    switch (node.kind) {
      case Kind::container:
        if (node.children_of(Kind::item).empty() && node.children_of(Kind::container).empty()) {
          add("E-EMPTY-CONTAINER", where, "container binds no items or containers");
        }
        break;
      case Kind::descriptor:
        if (node.children_of(Kind::statement).empty() &&
            node.children_of(Kind::descriptor).empty()) {
          add("E-EMPTY-DESCRIPTOR", where, "descriptor holds no statement or descriptor");
        }
        break;
      case Kind::anchor:
        if (node.children_of(Kind::fragment).size() != 1) {
          add("E-ANCHOR-FRAGMENT", where, "anchor must bind exactly one fragment");
        }
        break;
      case Kind::fragment:
        if (node.fragment_id.empty()) add("E-FRAGMENT-ID", where, "fragment has no fragmentId");
        break;
      case Kind::annotation:
        if (node.target.empty()) add("E-ANNOTATION-TARGET", where, "annotation has no target");
        break;
      case Kind::statement:
      case Kind::resource:
        if (const auto* inline_xml = std::get_if<ByValueXml>(&node.payload.content)) {
          bool any = std::any_of(inline_xml->nodes.begin(), inline_xml->nodes.end(),
                                 [](const xml::Node& n) { return n.is_element(); });
          if (!any) add("E-INLINE-XML", where, "inline XML content holds no element");
        }
        break;
      default:
        break;
    }
    for (std::size_t i = 0; i < node.children.size(); ++i) check(node.children[i], path.child(i));
  }

 private:
  void add(std::string code, std::string path, std::string message) {
    issues.push_back({std::move(code), std::move(path), std::move(message)});
  }

  std::set<std::string> ids_;
};

}  // namespace

std::vector<StructuralIssue> check_structure(const DidlDocument& doc) {
  StructureChecker checker;
  if (doc.root_entities.empty()) {
    checker.issues.push_back({"E-EMPTY-ROOT", "/", "DIDL root binds no container or item"});
  }
  NodePath root;
  for (std::size_t i = 0; i < doc.root_entities.size(); ++i) {
    const auto& entity = doc.root_entities[i];
    if (entity.kind != Kind::container && entity.kind != Kind::item) {
      checker.issues.push_back({"E-CONTAINMENT", root.child(i).to_string(),
                                std::string(kind_name(entity.kind)) +
                                    " is not allowed as a root entity"});
    }
    checker.check(entity, root.child(i));
  }
  return checker.issues;
}

std::vector<StructuralIssue> check_structure(const Node& node, const NodePath& base) {
  StructureChecker checker;
  checker.check(node, base);
  return checker.issues;
}

// ---------------------------------------------------------------------------

namespace {

bool content_equivalent(const Payload& a, const Payload& b) {
  auto canonical_text = [](const Payload& p) -> std::optional<std::string> {
    if (const auto* text = std::get_if<std::string>(&p.content)) {
      if (text->empty() || (p.ref && xml::is_whitespace(*text))) return std::string{};
      return *text;
    }
    if (std::holds_alternative<std::monostate>(p.content)) return std::string{};
    return std::nullopt;
  };
  auto ta = canonical_text(a);
  auto tb = canonical_text(b);
  if (ta.has_value() != tb.has_value()) return false;
  if (ta) {
    if (a.encoding && *a.encoding == "base64") {
      auto da = base64::decode(*ta);
      auto db = base64::decode(*tb);
      if (da && db) return *da == *db;
    }
    return *ta == *tb;
  }
  return xml::equivalent(std::get<ByValueXml>(a.content).nodes,
                         std::get<ByValueXml>(b.content).nodes);
}

bool payload_equivalent(const Payload& a, const Payload& b) {
  return a.mime_type == b.mime_type && a.ref == b.ref && a.encoding == b.encoding &&
         a.content_encoding == b.content_encoding && content_equivalent(a, b);
}

}  // namespace

bool equivalent(const Node& a, const Node& b) {
  if (a.kind != b.kind || a.xml_id != b.xml_id || a.foreign_attributes != b.foreign_attributes ||
      a.children.size() != b.children.size()) {
    return false;
  }
  switch (a.kind) {
    case Kind::statement:
    case Kind::resource:
      if (!payload_equivalent(a.payload, b.payload)) return false;
      break;
    case Kind::fragment:
      if (a.fragment_id != b.fragment_id) return false;
      break;
    case Kind::annotation:
      if (a.target != b.target) return false;
      break;
    case Kind::choice:
      if (!xml::equivalent(a.opaque, b.opaque)) return false;
      break;
    default:
      break;
  }
  for (std::size_t i = 0; i < a.children.size(); ++i) {
    if (!equivalent(a.children[i], b.children[i])) return false;
  }
  return true;
}

bool equivalent(const DidlDocument& a, const DidlDocument& b) {
  if (a.document_id != b.document_id || a.document_created != b.document_created ||
      a.foreign_attributes != b.foreign_attributes || a.didl_info.size() != b.didl_info.size() ||
      a.root_entities.size() != b.root_entities.size()) {
    return false;
  }
  for (std::size_t i = 0; i < a.didl_info.size(); ++i) {
    if (!xml::equivalent(a.didl_info[i], b.didl_info[i])) return false;
  }
  for (std::size_t i = 0; i < a.root_entities.size(); ++i) {
    if (!equivalent(a.root_entities[i], b.root_entities[i])) return false;
  }
  return true;
}

}  // namespace didlkit::model
