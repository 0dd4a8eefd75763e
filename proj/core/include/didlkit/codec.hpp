#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "didlkit/model.hpp"
#include "didlkit/namespaces.hpp"

// DIDL XML <-> model tree.
namespace didlkit::codec {

struct NamespaceTable {
  static constexpr std::string_view didl = ns::kDidl;
  static constexpr std::string_view dii = ns::kDii;
  static constexpr std::string_view rel = ns::kRel;
  // Namespace of the repository extension attributes (DIDLDocumentCreated).
  std::string ext{ns::kDefaultExt};
};

enum class Severity { fatal, error, warning };
std::string_view severity_name(Severity severity);

struct ParseDiagnostic {
  std::string code;
  std::string node_path;
  std::string message;
  Severity severity = Severity::error;
};

struct ParseResult {
  std::optional<model::DidlDocument> document;
  std::vector<ParseDiagnostic> diagnostics;

  bool has_fatal() const;
  bool has_errors() const;  // fatal or error
};

struct EntityParseResult {
  std::optional<model::Node> node;
  std::vector<ParseDiagnostic> diagnostics;
};

// Never throws. Fatal codes: E-XML, E-DTD, E-ENCODING, E-DEPTH, E-ROOT,
// E-ROOT-NAMESPACE, E-REFERENCE-REMOVED, E-UNKNOWN-ELEMENT, E-FOREIGN-CONTENT,
// E-MIXED-CONTENT plus the structural codes of model::check_structure.
// Error codes (document still returned): E-MIMETYPE, E-CREATED.
ParseResult parse_didl(std::string_view bytes, const NamespaceTable& namespaces = {});

// Parses a standalone DIDL entity element such as a serialized fragment.
EntityParseResult parse_entity(std::string_view bytes, const NamespaceTable& namespaces = {});

struct SerializeOptions {
  NamespaceTable namespaces;
  // When set, base64 payloads that fail to decode abort serialization
  // (Error(codec_error)); otherwise they are written verbatim.
  bool reject_invalid_payloads = true;
};

std::string serialize_didl(const model::DidlDocument& doc, const SerializeOptions& options = {});
std::string serialize_entity(const model::Node& node, const SerializeOptions& options = {});

// Deterministic form: fixed prefixes, sorted attributes, LF line endings, no
// whitespace between elements. Equal trees give equal bytes.
std::string canonical_bytes(const model::DidlDocument& doc, const SerializeOptions& options = {});
std::string canonical_entity(const model::Node& node, const SerializeOptions& options = {});
// Canonical UTF-8 form of inline XML content (used to materialize it).
std::string canonical_nodes(const std::vector<xml::Node>& nodes);

// Model <-> XML element tree, exposed for embedding DIDL in other envelopes.
xml::Element to_element(const model::Node& node, const SerializeOptions& options = {},
                        bool canonical = false);

}  // namespace didlkit::codec
