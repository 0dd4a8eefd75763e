#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "didlkit/timestamp.hpp"
#include "didlkit/xml.hpp"

// In-memory Digital Item Declaration entity tree.
//
// Every entity is a `Node` tagged with its `Kind`; the types do not enforce
// containment or identifier rules. `check_structure` reports the construction
// invariants the parser requires, the validator reports the rest.
namespace didlkit::model {

enum class Kind {
  container,
  item,
  component,
  descriptor,
  statement,
  resource,
  anchor,
  fragment,
  annotation,
  // Choice, Selection, Condition and Assertion blocks, carried opaquely.
  choice,
};

std::string_view kind_name(Kind kind);
std::optional<Kind> kind_from_element(std::string_view local_name);

struct ByReference {
  std::string uri;
};
struct ByValueText {
  std::string text;
};
struct ByValueXml {
  std::vector<xml::Node> nodes;
};
using Provision = std::variant<ByValueXml, ByValueText, ByReference>;

// Inline content exactly as written: none, character data, or mixed XML
// holding at least one element.
using InlineContent = std::variant<std::monostate, std::string, ByValueXml>;

// Shared shape of Statement and Resource.
struct Payload {
  std::optional<std::string> mime_type;
  std::optional<std::string> ref;
  InlineContent content;
  std::optional<std::string> encoding;
  std::vector<std::string> content_encoding;

  bool has_inline_content() const;
  // The single provision, or nullopt when both `ref` and inline content are given.
  std::optional<Provision> provision() const;
};

struct Node {
  Kind kind = Kind::item;
  std::optional<std::string> xml_id;
  std::map<xml::QName, std::string> foreign_attributes;
  std::vector<Node> children;

  Payload payload;          // statement, resource
  std::string fragment_id;  // fragment
  std::string target;       // annotation
  xml::Element opaque;      // choice

  std::vector<const Node*> children_of(Kind k) const;
};

// DIDL element local name for `node` ("Item", "Resource", ...).
std::string_view element_name(const Node& node);

struct DidlDocument {
  std::optional<std::string> document_id;
  std::optional<Timestamp> document_created;
  std::vector<xml::Element> didl_info;
  std::map<xml::QName, std::string> foreign_attributes;
  std::vector<Node> root_entities;
};

// `/`-joined child indices from the document root, e.g. "/0/2/1". The empty
// path ("/") addresses the DIDL root itself.
class NodePath {
 public:
  NodePath() = default;
  explicit NodePath(std::vector<std::size_t> indices) : indices_(std::move(indices)) {}

  static std::optional<NodePath> parse(std::string_view text);

  const std::vector<std::size_t>& indices() const { return indices_; }
  bool is_root() const { return indices_.empty(); }
  NodePath child(std::size_t index) const;
  std::optional<NodePath> parent() const;
  std::string to_string() const;

  friend auto operator<=>(const NodePath&, const NodePath&) = default;

 private:
  std::vector<std::size_t> indices_;
};

struct NodeRef {
  NodePath path;
  const Node* node = nullptr;
};

// ---------------------------------------------------------------------------
// Builders

Node make_container(std::vector<Node> children);
Node make_item(std::vector<Node> children);
Node make_component(std::vector<Node> children);
Node make_descriptor(std::vector<Node> children);
Node make_statement_xml(std::string mime_type, std::vector<xml::Node> nodes);
Node make_statement_text(std::string mime_type, std::string text);
Node make_resource_ref(std::string mime_type, std::string uri);
Node make_resource_text(std::string mime_type, std::string text);
Node make_anchor(std::vector<Node> descriptors, std::string fragment_id);
Node make_annotation(std::string target, std::vector<Node> payload);

// ---------------------------------------------------------------------------
// Structural access

const Node* node_at(const DidlDocument& doc, const NodePath& path);
Node* node_at(DidlDocument& doc, const NodePath& path);

// Pre-order traversal; `parent` is null for root entities.
using Visitor = std::function<void(const Node& node, const NodePath& path, const Node* parent)>;
void visit(const DidlDocument& doc, const Visitor& visitor);

std::optional<NodeRef> find_by_id(const DidlDocument& doc, std::string_view xml_id);

std::string_view entity_kind(const Node& node);

// Top-level elements of a Statement's inline XML with the given name.
std::vector<const xml::Element*> statement_elements(const Node& statement, const xml::QName& name);

enum class Predicate { has_resource, is_part_of_item, has_identifier };
std::string_view predicate_name(Predicate predicate);

struct RelationshipTriple {
  std::string subject;
  Predicate predicate;
  std::string object;

  friend bool operator==(const RelationshipTriple&, const RelationshipTriple&) = default;
};

// Entity reference used in triples: the XML ID when present, else the node path.
std::string entity_reference(const Node& node, const NodePath& path);

std::vector<RelationshipTriple> derive_relationships(const DidlDocument& doc);

// ---------------------------------------------------------------------------
// Construction invariants

struct StructuralIssue {
  std::string code;
  std::string path;
  std::string message;
};

// Codes: E-EMPTY-ROOT, E-CONTAINMENT, E-DUPLICATE-ID, E-EMPTY-CONTAINER,
// E-EMPTY-DESCRIPTOR, E-ANCHOR-FRAGMENT, E-FRAGMENT-ID, E-ANNOTATION-TARGET,
// E-INLINE-XML.
std::vector<StructuralIssue> check_structure(const DidlDocument& doc);
std::vector<StructuralIssue> check_structure(const Node& node, const NodePath& base = {});

// Tree equality: ignores prefix spelling, attribute order and inter-element
// whitespace; base64 payloads compare by decoded octets.
bool equivalent(const Node& a, const Node& b);
bool equivalent(const DidlDocument& a, const DidlDocument& b);

}  // namespace didlkit::model
