#pragma once

#include <optional>
#include <string>
#include <vector>

#include "didlkit/model.hpp"

// MPEG-21 DII Identifier and RelatedIdentifier statements.
namespace didlkit::dii {

struct Identifier {
  std::string value;
  model::NodePath host;

  friend bool operator==(const Identifier&, const Identifier&) = default;
};

struct RelatedIdentifier {
  std::string value;
  std::optional<std::string> relationship_type;
  model::NodePath host;

  friend bool operator==(const RelatedIdentifier&, const RelatedIdentifier&) = default;
};

// Hosts are the entities whose Descriptors carry the statement, in document
// order. Values are whitespace-trimmed. Throws Error(malformed_identifier)
// when a value (or relationshipType) is not an absolute URI.
std::vector<Identifier> extract_identifiers(const model::DidlDocument& doc);
std::vector<RelatedIdentifier> extract_related(const model::DidlDocument& doc);

// Identifiers declared directly on one entity.
std::vector<std::string> identifiers_of(const model::Node& host);

bool is_identifiable(model::Kind kind);  // container, item, component, anchor

// Copy of `doc` with a Descriptor wrapping dii:Identifier(uri) prepended to
// the host's children. Throws bad_target, invalid_uri or not_found.
model::DidlDocument attach_identifier(const model::DidlDocument& doc, const model::NodePath& host,
                                      const std::string& uri);

// The Descriptor that attach_identifier inserts.
model::Node identifier_descriptor(const std::string& uri);

}  // namespace didlkit::dii
