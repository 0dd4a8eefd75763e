#include "didlkit/validator.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <tuple>

#include "didlkit/base64.hpp"
#include "didlkit/error.hpp"
#include "didlkit/mime.hpp"
#include "didlkit/namespaces.hpp"
#include "didlkit/uri.hpp"
#include "json.hpp"

namespace didlkit::validator {

using model::Kind;
using model::Node;
using model::NodePath;

std::string_view severity_name(Severity severity) {
  return severity == Severity::error ? "error" : "warning";
}

std::string_view mode_name(Mode mode) { return mode == Mode::shallow ? "shallow" : "deep"; }

const std::vector<Rule>& rule_catalog() {
  static const std::vector<Rule> catalog = {
      {"R1", Severity::error, "Resource/Statement has exactly one provision (ref XOR inline content)",
       Mode::shallow},
      {"R2", Severity::error, "encoding is exactly \"base64\" and the payload decodes", Mode::shallow},
      {"R3", Severity::error, "mimeType present and well-formed on every Resource and Statement",
       Mode::shallow},
      {"R4", Severity::error, "Component holds at least one Resource, all of one mimeType",
       Mode::shallow},
      {"R5", Severity::error, "Containment: Container binds Items/Containers, Item binds Items/Components",
       Mode::shallow},
      {"R6", Severity::error, "XML IDs are unique", Mode::shallow},
      {"R6b", Severity::error, "Annotation target resolves to an existing XML ID", Mode::shallow},
      {"R7", Severity::error, "DII Identifier/RelatedIdentifier bodies are single absolute URIs",
       Mode::shallow},
      {"R8", Severity::error, "DIDLDocumentId is an absolute URI", Mode::shallow},
      {"R9", Severity::error, "Component resources are bit-equivalent", Mode::deep},
      {"R10", Severity::error, "contentEncoding tokens are supported and not repeated", Mode::shallow},
      {"W1", Severity::warning, "Item binds no Component and no sub-Item", Mode::shallow},
  };
  return catalog;
}

namespace {

std::tuple<char, int, std::string> rule_key(std::string_view id) {
  char letter = id.empty() ? '\0' : id[0];
  std::size_t i = 1;
  int number = 0;
  while (i < id.size() && id[i] >= '0' && id[i] <= '9') number = number * 10 + (id[i++] - '0');
  return {letter, number, std::string(id.substr(i))};
}

}  // namespace

bool rule_id_less(std::string_view a, std::string_view b) { return rule_key(a) < rule_key(b); }

std::size_t Report::count(Severity severity) const {
  return static_cast<std::size_t>(std::count_if(
      findings.begin(), findings.end(), [&](const Finding& f) { return f.severity == severity; }));
}

bool Report::has_rule(std::string_view rule) const {
  return std::any_of(findings.begin(), findings.end(),
                     [&](const Finding& f) { return f.rule == rule; });
}

namespace {

struct Pending {
  NodePath path;
  Finding finding;
};

std::string_view trim(std::string_view text) {
  auto begin = text.find_first_not_of(" \t\r\n");
  if (begin == std::string_view::npos) return {};
  auto end = text.find_last_not_of(" \t\r\n");
  return text.substr(begin, end - begin + 1);
}

class Engine {
 public:
  Engine(const model::DidlDocument& doc, const Options& options) : doc_(doc), options_(options) {}

  Report run() {
    NodePath root;
    if (doc_.document_id && !uri::is_absolute(*doc_.document_id)) {
      add("R8", root, "DIDLDocumentId '" + *doc_.document_id + "' is not an absolute URI");
    }
    for (const auto& issue : model::check_structure(doc_)) {
      auto path = NodePath::parse(issue.path).value_or(NodePath{});
      if (issue.code == "E-CONTAINMENT") add("R5", path, issue.message);
      if (issue.code == "E-DUPLICATE-ID") add("R6", path, issue.message);
    }
    std::set<std::string> ids;
    model::visit(doc_, [&](const Node& node, const NodePath&, const Node*) {
      if (node.xml_id) ids.insert(*node.xml_id);
    });
    model::visit(doc_, [&](const Node& node, const NodePath& path, const Node*) {
      check_node(node, path, ids);
    });
    return finish();
  }

 private:
  void add(std::string rule, const NodePath& path, std::string message,
           Severity severity = Severity::error) {
    if (options_.strict) severity = Severity::error;
    pending_.push_back({path, {std::move(rule), severity, path.to_string(), std::move(message)}});
  }

  void check_node(const Node& node, const NodePath& path, const std::set<std::string>& ids) {
    switch (node.kind) {
      case Kind::statement:
      case Kind::resource:
        check_payload(node, path);
        if (node.kind == Kind::statement) check_identifiers(node, path);
        break;
      case Kind::component:
        check_component(node, path);
        break;
      case Kind::item:
        if (node.children_of(Kind::component).empty() && node.children_of(Kind::item).empty()) {
          add("W1", path, "item binds no component and no sub-item", Severity::warning);
        }
        break;
      case Kind::annotation:
        if (!ids.count(node.target)) {
          add("R6b", path, "annotation target '" + node.target + "' matches no XML ID");
        }
        break;
      default:
        break;
    }
  }

  void check_payload(const Node& node, const NodePath& path) {
    const auto& p = node.payload;
    const auto element = std::string(model::element_name(node));
    bool both = p.ref && p.has_inline_content();
    bool inline_text = std::holds_alternative<std::string>(p.content) && p.has_inline_content();
    bool inline_xml = std::holds_alternative<model::ByValueXml>(p.content);

    // R1
    if (both) {
      add("R1", path, element + " carries both a ref and inline content");
    } else if (!p.ref && !p.has_inline_content() && !p.encoding) {
      add("R1", path, element + " has neither a ref nor inline content");
    } else if (p.ref && !uri::is_absolute(*p.ref)) {
      add("R1", path, "ref '" + *p.ref + "' is not an absolute URI");
    }

    // R2
    if (p.encoding && !both) {
      if (*p.encoding != "base64") {
        add("R2", path, "encoding '" + *p.encoding + "' is not \"base64\"");
      } else if (inline_xml) {
        add("R2", path, "encoding=\"base64\" on inline XML content");
      } else if (p.ref) {
        add("R2", path, "encoding=\"base64\" on a by-reference " + element);
      } else if (inline_text && !base64::decode(std::get<std::string>(p.content))) {
        add("R2", path, "payload does not decode as base64");
      }
    }

    // R3
    if (!p.mime_type) {
      add("R3", path, element + " lacks a mimeType");
    } else if (!mime::is_well_formed(*p.mime_type)) {
      add("R3", path, "mimeType '" + *p.mime_type + "' is malformed");
    }

    // R10
    std::set<std::string> seen;
    for (const auto& token : p.content_encoding) {
      if (!resourceio::is_supported_content_encoding(token)) {
        add("R10", path, "unsupported contentEncoding token '" + token + "'");
      } else if (!seen.insert(token).second) {
        add("R10", path, "contentEncoding token '" + token + "' is repeated");
      }
    }
  }

  void check_identifiers(const Node& statement, const NodePath& path) {
    const auto* nodes = std::get_if<model::ByValueXml>(&statement.payload.content);
    if (!nodes) return;
    for (const auto& n : nodes->nodes) {
      if (!n.is_element()) continue;
      const auto& e = n.element();
      if (e.name.ns != ns::kDii) continue;
      if (e.name.local != "Identifier" && e.name.local != "RelatedIdentifier") continue;
      auto text = e.text();
      auto value = trim(text);
      if (e.has_element_children() || value.empty() || !uri::is_absolute(value)) {
        add("R7", path, "dii:" + e.name.local + " '" + std::string(value) +
                            "' is not a single absolute URI");
      }
      if (e.name.local == "RelatedIdentifier") {
        if (const auto* type = e.attribute({"", "relationshipType"})) {
          if (!uri::is_absolute(trim(*type))) {
            add("R7", path, "relationshipType '" + *type + "' is not an absolute URI");
          }
        }
      }
    }
  }

  void check_component(const Node& component, const NodePath& path) {
    auto resources = component.children_of(Kind::resource);
    if (resources.empty()) {
      add("R4", path, "component binds no resource");
      return;
    }
    std::set<std::string> mimes;
    for (const auto* r : resources) {
      if (r->payload.mime_type && mime::is_well_formed(*r->payload.mime_type)) {
        mimes.insert(*r->payload.mime_type);
      }
    }
    if (mimes.size() > 1) {
      std::string list;
      for (const auto& m : mimes) list += (list.empty() ? "" : ", ") + m;
      add("R4", path, "resources disagree on mimeType: " + list);
    }

    if (!options_.fetcher) return;
    try {
      auto report = resourceio::check_component_equivalence(component, path, options_.fetcher,
                                                            options_.materialize);
      if (!report.equivalent) {
        std::string digests;
        for (const auto& d : report.digests) {
          digests += (digests.empty() ? "" : ", ") + d.node_path + "=" + d.sha256_hex;
        }
        add("R9", path, "resources are not bit-equivalent: " + digests);
      }
    } catch (const Error& e) {
      add("R9-FETCH", path, std::string(to_string(e.code())) + ": " + e.what());
    }
  }

  Report finish() {
    std::stable_sort(pending_.begin(), pending_.end(), [](const Pending& a, const Pending& b) {
      if (a.path != b.path) return a.path < b.path;
      return rule_id_less(a.finding.rule, b.finding.rule);
    });
    Report report;
    for (auto& p : pending_) {
      if (p.finding.severity == Severity::error) report.passed = false;
      report.findings.push_back(std::move(p.finding));
    }
    return report;
  }

  const model::DidlDocument& doc_;
  const Options& options_;
  std::vector<Pending> pending_;
};

}  // namespace

Report validate(const model::DidlDocument& doc, const Options& options) {
  return Engine(doc, options).run();
}

std::string to_text(const Report& report) {
  std::string out;
  for (const auto& f : report.findings) {
    out += std::string(severity_name(f.severity)) + ' ' + f.rule + ' ' + f.node_path + ' ' +
           f.message + '\n';
  }
  return out;
}

std::string to_json(const Report& report) {
  nlohmann::ordered_json j;
  j["passed"] = report.passed;
  j["findings"] = nlohmann::ordered_json::array();
  for (const auto& f : report.findings) {
    nlohmann::ordered_json entry;
    entry["rule"] = f.rule;
    entry["severity"] = severity_name(f.severity);
    entry["path"] = f.node_path;
    entry["message"] = f.message;
    j["findings"].push_back(std::move(entry));
  }
  return j.dump(2) + "\n";
}

}  // namespace didlkit::validator
