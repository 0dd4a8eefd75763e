#include "didlkit/fixtures.hpp"

#include <algorithm>

#include "didlkit/base64.hpp"
#include "didlkit/codec.hpp"
#include "didlkit/error.hpp"
#include "didlkit/namespaces.hpp"
#include "embedded.hpp"
#include "json.hpp"

namespace didlkit::fixtures {

using model::DidlDocument;
using model::Node;

namespace {

constexpr std::string_view kPdfRef = "http://purl.lanl.gov/tech/pdf/015997845.pdf";
constexpr std::string_view kPsRef = "http://purl.lanl.gov/tech/ps/015997845.ps";

const detail::EmbeddedFile* find_file(std::string_view path) {
  for (const auto& f : detail::embedded_files()) {
    if (f.path == path) return &f;
  }
  return nullptr;
}

// Positions inside table9: Item, its two Components and their Resources.
Node& item(DidlDocument& d) { return d.root_entities.at(0); }
Node& pdf_component(DidlDocument& d) { return item(d).children.at(2); }
Node& ps_component(DidlDocument& d) { return item(d).children.at(3); }
Node& pdf_ref(DidlDocument& d) { return pdf_component(d).children.at(0); }
Node& pdf_inline(DidlDocument& d) { return pdf_component(d).children.at(1); }

xml::Element& identifier_element(DidlDocument& d) {
  auto& statement = item(d).children.at(0).children.at(0);
  auto& nodes = std::get<model::ByValueXml>(statement.payload.content).nodes;
  for (auto& n : nodes) {
    if (n.is_element()) return n.element();
  }
  throw Error(Errc::not_found, "table9 has no identifier element");
}

std::vector<MutationOperator> make_operators() {
  std::vector<MutationOperator> ops;
  auto add = [&](std::string name, std::string rule, std::function<void(DidlDocument&)> fn,
                 bool deep = false) {
    ops.push_back({std::move(name), std::move(rule), deep, std::move(fn)});
  };

  add("drop-mimetype", "R3", [](DidlDocument& d) { pdf_inline(d).payload.mime_type.reset(); });
  add("malformed-mimetype", "R3", [](DidlDocument& d) { pdf_inline(d).payload.mime_type = "pdf"; });
  add("ref-and-inline", "R1",
      [](DidlDocument& d) { pdf_inline(d).payload.ref = std::string(kPdfRef); });
  add("drop-provision", "R1", [](DidlDocument& d) {
    auto& p = pdf_inline(d).payload;
    p.content = std::monostate{};
    p.encoding.reset();
  });
  add("relative-ref", "R1", [](DidlDocument& d) { pdf_ref(d).payload.ref = "tech/pdf/015997845.pdf"; });
  add("unknown-encoding", "R2", [](DidlDocument& d) { pdf_inline(d).payload.encoding = "base32"; });
  add("corrupt-base64", "R2",
      [](DidlDocument& d) { pdf_inline(d).payload.content = std::string("JVBERi0x*not-base64*"); });
  add("base64-on-ref", "R2", [](DidlDocument& d) { pdf_ref(d).payload.encoding = "base64"; });
  add("mixed-mimetype", "R4",
      [](DidlDocument& d) { pdf_inline(d).payload.mime_type = "application/postscript"; });
  add("empty-component", "R4", [](DidlDocument& d) { ps_component(d).children.clear(); });
  add("component-at-root", "R5", [](DidlDocument& d) {
    auto moved = ps_component(d);
    item(d).children.erase(item(d).children.begin() + 3);
    d.root_entities.push_back(std::move(moved));
  });
  add("duplicate-id", "R6", [](DidlDocument& d) {
    pdf_component(d).xml_id = "component-1";
    ps_component(d).xml_id = "component-1";
  });
  add("dangling-annotation", "R6b", [](DidlDocument& d) {
    item(d).children.push_back(model::make_annotation(
        "no-such-id", {model::make_descriptor({model::make_statement_text("text/plain", "reviewed")})}));
  });
  add("relative-identifier", "R7", [](DidlDocument& d) {
    auto& e = identifier_element(d);
    e.children.clear();
    e.children.emplace_back(std::string("july95-arms"));
  });
  add("nested-identifier", "R7", [](DidlDocument& d) {
    auto& e = identifier_element(d);
    xml::Element inner;
    inner.name = {std::string(ns::kDii), "Identifier"};
    inner.children.emplace_back(std::string("info:doi/10.1045/july95-arms"));
    e.children.clear();
    e.children.emplace_back(std::move(inner));
  });
  add("relative-document-id", "R8", [](DidlDocument& d) { d.document_id = "july95-arms"; });
  add("unsupported-content-encoding", "R10",
      [](DidlDocument& d) { pdf_inline(d).payload.content_encoding = {"compress"}; });
  add("repeated-content-encoding", "R10",
      [](DidlDocument& d) { pdf_inline(d).payload.content_encoding = {"gzip", "gzip"}; });
  add("drop-components", "W1", [](DidlDocument& d) {
    auto& children = item(d).children;
    children.erase(children.begin() + 2, children.end());
  });
  add(
      "tamper-by-value", "R9",
      [](DidlDocument& d) {
        auto& content = std::get<std::string>(pdf_inline(d).payload.content);
        auto bytes = base64::decode(content).value();
        bytes.at(bytes.size() / 2) ^= 0x01;
        content = base64::encode_wrapped(bytes);
      },
      true);
  return ops;
}

Expected mutant_expectation(const MutationOperator& op) {
  if (op.rule == "R5") return {Expectation::fatal, "E-CONTAINMENT"};
  if (op.rule == "R6") return {Expectation::fatal, "E-DUPLICATE-ID"};
  return {Expectation::rule_finding, op.rule};
}

std::vector<FixtureEntry> make_catalog() {
  std::vector<FixtureEntry> out;
  for (int n = 2; n <= 10; ++n) {
    auto name = "table" + std::to_string(n);
    out.push_back({name, name + ".xml", "listing:" + name, n <= 8, false, {}});
  }
  out.push_back({"sample75", "sample75.xml", "listing:sample75", false, false, {}});
  for (const auto& op : mutation_operators()) {
    auto name = "mutant-table9-" + op.name;
    out.push_back({name, "mutants/" + name + ".xml", "mutant:table9/" + op.name, false, op.deep,
                   mutant_expectation(op)});
  }
  return out;
}

}  // namespace

std::string_view expectation_name(Expectation e) {
  switch (e) {
    case Expectation::parse_ok: return "parse-ok";
    case Expectation::rule_finding: return "rule-finding";
    case Expectation::fatal: return "fatal";
  }
  return {};
}

const std::vector<MutationOperator>& mutation_operators() {
  static const auto ops = make_operators();
  return ops;
}

const std::vector<FixtureEntry>& catalog() {
  static const auto entries = make_catalog();
  return entries;
}

const FixtureEntry& entry(std::string_view name) {
  for (const auto& e : catalog()) {
    if (e.name == name) return e;
  }
  throw Error(Errc::not_found, "no fixture named '" + std::string(name) + "'");
}

Bytes load_file(std::string_view path) {
  const auto* f = find_file(path);
  if (!f) throw Error(Errc::not_found, "no fixture file '" + std::string(path) + "'");
  return Bytes(f->data, f->data + f->size);
}

std::string load_fixture(std::string_view name) {
  const auto& e = entry(name);
  if (const auto* f = find_file(e.file)) return std::string(reinterpret_cast<const char*>(f->data), f->size);
  // Mutants not yet written to disk are produced on demand.
  auto prefix = std::string_view("mutant-table9-");
  for (const auto& op : mutation_operators()) {
    if (name.substr(prefix.size()) == op.name) return mutant_bytes(op);
  }
  throw Error(Errc::not_found, "fixture file '" + e.file + "' is missing");
}

std::unique_ptr<resourceio::Fetcher> fixture_fetcher() {
  auto fetcher = std::make_unique<resourceio::ReplayFetcher>();
  fetcher->add(std::string(kPdfRef), load_file("payloads/015997845.pdf"));
  fetcher->add(std::string(kPsRef), load_file("payloads/015997845.ps"));
  return fetcher;
}

DidlDocument base_document() {
  auto parsed = codec::parse_didl(to_string(load_file("table9.xml")));
  if (!parsed.document || parsed.has_errors()) throw Error(Errc::codec_error, "table9 does not parse");
  return std::move(*parsed.document);
}

DidlDocument mutate(const MutationOperator& op) {
  auto doc = base_document();
  op.apply(doc);
  return doc;
}

std::string mutant_bytes(const MutationOperator& op) {
  codec::SerializeOptions options;
  options.reject_invalid_payloads = false;
  return codec::serialize_didl(mutate(op), options);
}

std::string index_json() {
  nlohmann::ordered_json root;
  root["fixtures"] = nlohmann::ordered_json::array();
  for (const auto& e : catalog()) {
    nlohmann::ordered_json j;
    j["name"] = e.name;
    j["file"] = e.file;
    j["source"] = e.source;
    j["kind"] = e.standalone_entity ? "entity" : "document";
    nlohmann::ordered_json expected;
    expected["outcome"] = expectation_name(e.expected.kind);
    if (!e.expected.code.empty()) expected["code"] = e.expected.code;
    if (e.deep) expected["mode"] = "deep";
    j["expected"] = std::move(expected);
    root["fixtures"].push_back(std::move(j));
  }
  root["payloads"] = nlohmann::ordered_json::array();
  for (auto [uri, file] : {std::pair{kPdfRef, "payloads/015997845.pdf"}, std::pair{kPsRef, "payloads/015997845.ps"}}) {
    nlohmann::ordered_json j;
    j["uri"] = uri;
    j["file"] = file;
    j["note"] = "synthetic stub standing in for the unavailable original";
    root["payloads"].push_back(std::move(j));
  }
  return root.dump(2) + "\n";
}

}  // namespace didlkit::fixtures
