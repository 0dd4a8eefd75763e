// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include "didlkit/access.hpp"
#include "didlkit/base64.hpp"
#include "didlkit/codec.hpp"
#include "didlkit/dii.hpp"
#include "didlkit/error.hpp"
#include "didlkit/fixtures.hpp"
#include "didlkit/integrity.hpp"
#include "didlkit/repository.hpp"
#include "didlkit/resourceio.hpp"
#include "didlkit/validator.hpp"
#include "httplib.h"
#include "json.hpp"
#include "oracles.hpp"
#include "random_doc.hpp"

namespace fs = std::filesystem;
using namespace didlkit;
using Clock = std::chrono::steady_clock;

namespace {

// Thrown by check(); carries the first broken expectation.
struct Failure {
  std::string what;
};

void check(bool condition, const std::string& what) {
  if (!condition) throw Failure{what};
}

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

class TempDir {
 public:
  TempDir() {
    std::string pattern = (fs::temp_directory_path() / "didlkit-accept-XXXXXX").string();
    if (!mkdtemp(pattern.data())) throw std::runtime_error("mkdtemp failed");
    path_ = pattern;
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

// Clock whose readings are set by the test.
struct ScriptedClock {
  std::shared_ptr<Timestamp> now = std::make_shared<Timestamp>(Timestamp::from_unix(1'100'000'000));
  repository::Clock fn() const {
    auto shared = now;
    return [shared] { return *shared; };
  }
};

repository::AssetManifest manifest_for(const std::string& content_id, std::string_view payload) {
  repository::AssetManifest m;
  m.content_id = content_id;
  repository::DatastreamSpec pdf;
  pdf.mime_type = "application/pdf";
  pdf.source_bytes = to_bytes(payload);
  pdf.embed_policy = repository::EmbedPolicy::by_value;
  pdf.format_id = "info:lanl-repo/fmt/5";
  pdf.created = Timestamp::parse("2003-10-29T18:07:18Z");
  m.datastreams.push_back(std::move(pdf));
  m.metadata_blocks.push_back(
      {"dc", "<dc:title xmlns:dc=\"http://purl.org/dc/elements/1.1/\">Version " + std::string(payload) +
                 "</dc:title>"});
  return m;
}

// ---------------------------------------------------------------------------
// OAI-PMH response reading

struct OaiPage {
  std::vector<std::pair<std::string, std::string>> headers;  // identifier, datestamp
  std::vector<std::string> metadata;                         // raw <metadata> contents
  bool has_token_element = false;
  std::string token;
  std::optional<std::string> error;
};

const xml::Element* child(const xml::Element& e, std::string_view local) {
  for (const auto* c : e.elements()) {
    if (c->name.local == local) return c;
  }
  return nullptr;
}

OaiPage read_oai(const std::string& body) {
  auto parsed = xml::parse(body);
  check(parsed.root.has_value(), "OAI response is not well-formed XML");
  OaiPage page;
  const auto& root = *parsed.root;
  check(root.name.ns == ns::kOai && root.name.local == "OAI-PMH", "OAI root element");
  if (const auto* error = child(root, "error")) {
    page.error = *error->attribute({"", "code"});
    return page;
  }
  for (const auto* verb : root.elements()) {
    if (verb->name.local == "responseDate" || verb->name.local == "request") continue;
    for (const auto* e : verb->elements()) {
      const xml::Element* header = nullptr;
      if (e->name.local == "record") header = child(*e, "header");
      if (e->name.local == "header") header = e;
      if (header) {
        page.headers.emplace_back(child(*header, "identifier")->text(), child(*header, "datestamp")->text());
      }
      if (e->name.local == "resumptionToken") {
        page.has_token_element = true;
        page.token = e->text();
      }
    }
  }
  std::size_t pos = 0;
  while ((pos = body.find("<metadata>", pos)) != std::string::npos) {
    auto end = body.find("</metadata>", pos);
    page.metadata.push_back(body.substr(pos + 10, end - pos - 10));
    pos = end;
  }
  return page;
}

std::string stored_without_declaration(const std::string& bytes) {
  auto pos = bytes.find("?>");
  std::string rest = bytes.substr(bytes.rfind("<?xml", 0) == 0 ? pos + 2 : 0);
  while (!rest.empty() && rest.front() == '\n') rest.erase(rest.begin());
  while (!rest.empty() && rest.back() == '\n') rest.pop_back();
  return rest;
}

model::DidlDocument parse_ok(std::string_view bytes, const std::string& what) {
  auto parsed = codec::parse_didl(bytes);
  check(parsed.document.has_value() && !parsed.has_errors(), what + " does not parse cleanly");
  return std::move(*parsed.document);
}

// ---------------------------------------------------------------------------
// Criteria

std::string criterion1() {
  auto start = Clock::now();
  for (const auto* name : {"table9", "sample75"}) {
    auto parsed = codec::parse_didl(fixtures::load_fixture(name));
    check(parsed.document.has_value(), std::string(name) + " parse");
    check(parsed.diagnostics.empty(), std::string(name) + " has parse diagnostics");
    auto report = validator::validate(*parsed.document);
    check(report.findings.empty(), std::string(name) + " has validator findings");
    auto ids = dii::extract_identifiers(*parsed.document);
    check(ids.size() == 1 && ids[0].value == "info:doi/10.1045/july95-arms", std::string(name) + " identifier");
  }
  auto table9 = parse_ok(fixtures::load_fixture("table9"), "table9");
  check(table9.root_entities.size() == 1 && table9.root_entities[0].children_of(model::Kind::component).size() == 2,
        "table9 is one Item with two Components");
  auto sample = parse_ok(fixtures::load_fixture("sample75"), "sample75");
  check(sample.document_id == "info:lanl-repo/i/00002cb8-c477-11d8-a819-b1db893d21e6", "sample75 document id");
  check(sample.document_created && sample.document_created->to_string() == "2004-11-22T18:07:18Z",
        "sample75 DIDLDocumentCreated");
  auto elapsed = seconds_since(start);
  check(elapsed < 1.0, "took " + std::to_string(elapsed) + " s");
  std::ostringstream out;
  out << "2 documents, 0 errors, " << elapsed << " s";
  return out.str();
}

std::string criterion2() {
  auto start = Clock::now();
  testsupport::Rng rng(20250101);
  std::size_t bytes = 0;
  for (int i = 0; i < 1000; ++i) {
    auto doc = testsupport::random_document(rng);
    auto tag = "document " + std::to_string(i);
    check(validator::validate(doc).passed, tag + " is not valid");
    auto text = codec::serialize_didl(doc);
    bytes += text.size();
    auto back = parse_ok(text, tag);
    check(model::equivalent(doc, back), tag + " is not tree-equal after round trip");
    auto canonical = codec::canonical_bytes(doc);
    auto again = codec::canonical_bytes(parse_ok(canonical, tag + " canonical"));
    check(canonical == again, tag + " canonical_bytes is not idempotent");
    check(codec::canonical_bytes(back) == canonical, tag + " canonical bytes differ after round trip");
  }
  auto elapsed = seconds_since(start);
  check(elapsed < 30.0, "took " + std::to_string(elapsed) + " s");
  std::ostringstream out;
  out << "1000 documents (" << bytes / 1024 << " KiB serialized), " << elapsed << " s";
  return out.str();
}

std::string criterion3() {
  auto fetcher = fixtures::fixture_fetcher();
  std::size_t operators = 0;
  for (const auto& op : fixtures::mutation_operators()) {
    validator::Options options;
    if (op.deep) options.fetcher = fetcher.get();
    auto report = validator::validate(fixtures::mutate(op), options);
    std::set<std::string> rules;
    for (const auto& f : report.findings) rules.insert(f.rule);
    std::string seen;
    for (const auto& r : rules) seen += r + " ";
    check(rules == std::set<std::string>{op.rule}, op.name + ": expected " + op.rule + ", got " + seen);
    ++operators;
  }
  check(operators >= 12, "only " + std::to_string(operators) + " operators");
  for (const auto& e : fixtures::catalog()) {
    if (e.source.rfind("listing:", 0) != 0) continue;
    auto bytes = fixtures::load_fixture(e.name);
    if (e.standalone_entity) {
      auto parsed = codec::parse_entity(bytes);
      check(parsed.node.has_value() && parsed.diagnostics.empty(), e.name + " entity parse");
      continue;
    }
    validator::Options options;
    options.fetcher = fetcher.get();
    auto report = validator::validate(parse_ok(bytes, e.name), options);
    check(report.passed && report.findings.empty(), e.name + " is not clean under deep validation");
  }
  return std::to_string(operators) + " operators each raise exactly their rule; listings clean";
}

std::string criterion4() {
  testsupport::Rng rng(4);
  auto payload = testsupport::random_bytes(rng, 1 << 20);
  const std::string uri = "http://example.org/payload.bin";
  resourceio::ReplayFetcher fetcher;
  fetcher.add(uri, payload);
  auto component = model::make_component({model::make_resource_ref("application/octet-stream", uri),
                                          resourceio::embed_by_value(payload, "application/octet-stream")});
  auto report = resourceio::check_component_equivalence(component, model::NodePath({0}), &fetcher);
  auto expected = oracle::sha256_hex(payload);
  check(report.equivalent, "by-ref and by-value copies are not equivalent");
  check(report.digests.size() == 2, "expected two digests");
  for (const auto& d : report.digests) check(d.sha256_hex == expected, "digest differs from the sodium oracle");

  std::vector<std::size_t> positions = {0, payload.size() - 1};
  for (int i = 0; i < 98; ++i) positions.push_back(rng() % payload.size());
  for (auto pos : positions) {
    auto corrupted = payload;
    corrupted[pos] ^= static_cast<std::uint8_t>(1 + rng() % 255);
    auto by_value = model::make_component({model::make_resource_ref("application/octet-stream", uri),
                                           resourceio::embed_by_value(corrupted, "application/octet-stream")});
    check(!resourceio::check_component_equivalence(by_value, model::NodePath({0}), &fetcher).equivalent,
          "corruption at octet " + std::to_string(pos) + " of the by-value copy went unnoticed");
    resourceio::ReplayFetcher bad;
    bad.add(uri, corrupted);
    check(!resourceio::check_component_equivalence(component, model::NodePath({0}), &bad).equivalent,
          "corruption at octet " + std::to_string(pos) + " of the by-ref copy went unnoticed");
  }
  return "1 MiB equivalent, sha-256 matches oracle, " + std::to_string(positions.size() * 2) +
         " single-octet corruptions detected";
}

std::string criterion5() {
  testsupport::Rng rng(5);
  std::size_t cases = 0;
  for (int i = 0; i < 500; ++i) {
    auto size = static_cast<std::size_t>(rng() % (64 * 1024 + 1));
    auto bytes = testsupport::random_bytes(rng, size);
    if (i % 3 == 1) std::fill(bytes.begin(), bytes.begin() + static_cast<long>(size / 2), 'a');
    for (std::optional<std::string> token : {std::optional<std::string>{}, std::optional<std::string>{"gzip"},
                                             std::optional<std::string>{"deflate"}}) {
      auto tag = "case " + std::to_string(i) + " " + token.value_or("none");
      auto resource = resourceio::embed_by_value(bytes, "application/octet-stream", token);
      auto entity = codec::parse_entity(codec::serialize_entity(resource));
      check(entity.node.has_value() && entity.diagnostics.empty(), tag + ": serialized resource does not parse");
      check(resourceio::materialize(*entity.node, nullptr) == bytes, tag + ": materialize differs");
      if (token) {
        auto flat = std::get<std::string>(resource.payload.content);
        flat.erase(std::remove(flat.begin(), flat.end(), '\n'), flat.end());
        auto wire = oracle::base64_decode(flat);
        check(wire.has_value(), tag + ": OpenSSL cannot decode the base64 payload");
        auto oracle_plain = oracle::decompress(*wire, *token, bytes.size());
        check(oracle_plain && *oracle_plain == bytes, tag + ": libdeflate cannot read the encoded payload");
        auto from_oracle = oracle::compress(bytes, *token);
        check(resourceio::decode_content(from_oracle, *token) == bytes, tag + ": decode of libdeflate output");
      }
      ++cases;
    }
  }
  return std::to_string(cases) + " embed/materialize round trips";
}

std::string criterion6() {
  testsupport::Rng rng(6);
  std::size_t rejected = 0;
  for (int i = 0; i < 100; ++i) {
    auto tag = "case " + std::to_string(i);
    auto key = integrity::SigningKey::from_seed(testsupport::random_bytes(rng, 32));
    integrity::Keyring keyring;
    keyring.add(key);
    auto bytes = testsupport::random_bytes(rng, 1 + rng() % 4096);
    const std::string uri = "http://example.org/c/" + std::to_string(i);
    resourceio::ReplayFetcher fetcher;
    fetcher.add(uri, bytes);
    std::vector<model::Node> children;
    if (rng() % 2) children.push_back(model::make_resource_ref("application/octet-stream", uri));
    children.push_back(resourceio::embed_by_value(bytes, "application/octet-stream",
                                                  rng() % 3 == 0 ? std::optional<std::string>("gzip") : std::nullopt));
    auto component = model::make_component(std::move(children));
    integrity::SealOptions options;
    options.key = &key;
    options.signed_at = Timestamp::from_unix(1'000'000'000 + i);
    auto sealed = integrity::seal_component(component, &fetcher, options);
    check(integrity::verify_component(sealed, &fetcher, keyring) == integrity::Verdict::ok, tag + ": sealed is not ok");

    // Mutations of the payload, the digest and the signature.
    auto payload_index = sealed.children.size() - 1;
    auto tampered = sealed;
    {
      auto raw = resourceio::materialize(tampered.children[payload_index], nullptr);
      raw[rng() % raw.size()] ^= static_cast<std::uint8_t>(1 + rng() % 255);
      auto replacement = resourceio::embed_by_value(raw, "application/octet-stream");
      tampered.children[payload_index] = replacement;
    }
    auto flip_hex = [&](std::string& hex) {
      auto pos = rng() % hex.size();
      hex[pos] = hex[pos] == '0' ? '1' : '0';
    };
    auto edit_block = [&](bool signature) {
      auto copy = sealed;
      for (auto& d : copy.children) {
        if (!integrity::is_integrity_descriptor(d)) continue;
        auto& nodes = std::get<model::ByValueXml>(d.children.at(0).payload.content).nodes;
        for (auto& n : nodes) {
          if (!n.is_element()) continue;
          if ((n.element().name.local == "Signature") == signature) {
            auto text = n.element().text();
            flip_hex(text);
            n.element().children = {xml::Node(text)};
          }
        }
      }
      return copy;
    };
    resourceio::ReplayFetcher altered;
    auto altered_bytes = bytes;
    altered_bytes[rng() % altered_bytes.size()] ^= 0x80;
    altered.add(uri, altered_bytes);
    bool has_ref = sealed.children.size() > 2 && sealed.children[payload_index - 1].payload.ref;

    std::vector<std::pair<std::string, integrity::Verdict>> verdicts = {
        {"payload", integrity::verify_component(tampered, &fetcher, keyring)},
        {"digest", integrity::verify_component(edit_block(false), &fetcher, keyring)},
        {"signature", integrity::verify_component(edit_block(true), &fetcher, keyring)},
    };
    if (has_ref) verdicts.emplace_back("by-ref bytes", integrity::verify_component(sealed, &altered, keyring));
    for (const auto& [what, verdict] : verdicts) {
      check(verdict != integrity::Verdict::ok, tag + ": mutated " + what + " still verifies");
      ++rejected;
    }

    model::DidlDocument doc;
    doc.document_id = "info:example/i/" + std::to_string(i);
    doc.root_entities.push_back(model::make_item({sealed}));
    auto sealed_doc = integrity::seal_document(doc, options);
    check(integrity::verify_document(sealed_doc, keyring) == integrity::Verdict::ok, tag + ": document seal");
    auto moved = sealed_doc;
    moved.document_id = "info:example/i/other";
    check(integrity::verify_document(moved, keyring) != integrity::Verdict::ok, tag + ": mutated document verifies");
    ++rejected;
  }
  return "100 seals verify ok, " + std::to_string(rejected) + " mutations rejected";
}

struct Scenario {
  std::unique_ptr<TempDir> dir;
  ScriptedClock clock;
  std::unique_ptr<repository::Store> store;
  std::vector<std::string> ids;  // ingest order
  std::string content_id = "info:doi/10.1045/july95-arms";
};

Scenario three_versions() {
  Scenario s;
  s.dir = std::make_unique<TempDir>();
  repository::StoreOptions options;
  options.clock = s.clock.fn();
  s.store = std::make_unique<repository::Store>(s.dir->path() / "store", options);
  for (int v = 0; v < 3; ++v) {
    *s.clock.now = Timestamp::from_unix(1'100'000'000 + 3600 * v);
    s.ids.push_back(s.store->ingest(manifest_for(s.content_id, "v" + std::to_string(v + 1))));
  }
  return s;
}

access::ServiceConfig service_config() {
  access::ServiceConfig config;
  config.base_url = "http://repo.example.org";
  config.clock = [] { return Timestamp::from_unix(1'700'000'000); };
  return config;
}

std::string criterion7() {
  auto s = three_versions();
  auto versions = s.store->resolve_content(s.content_id);
  check(versions.size() == 3, "resolve_content returned " + std::to_string(versions.size()));
  for (std::size_t i = 0; i < 3; ++i) {
    check(versions[i].package_id == s.ids[2 - i], "resolve_content is not newest first");
  }
  access::Service service(*s.store, service_config());
  for (const auto& id : s.ids) {
    auto record = s.store->get_package(id);
    auto stored = parse_ok(record.document_bytes, id);
    check(record.item_xml_ids.size() == 1, id + ": one Item expected");
    auto fragment = s.store->get_fragment(id, record.item_xml_ids[0]);
    auto entity = codec::parse_entity(fragment);
    auto item = model::find_by_id(stored, record.item_xml_ids[0]);
    check(entity.node && item && model::equivalent(*entity.node, *item->node), id + ": fragment is not the Item");

    auto page = read_oai(service.handle_oai(
        {{"verb", "GetRecord"}, {"identifier", id}, {"metadataPrefix", "didl"}}));
    check(!page.error, id + ": GetRecord error " + page.error.value_or(""));
    check(page.headers.size() == 1 && page.headers[0].first == id, id + ": record identifier");
    check(page.headers[0].second == stored.document_created->to_string(), id + ": datestamp != DIDLDocumentCreated");
    check(page.metadata.size() == 1 && page.metadata[0] == stored_without_declaration(record.document_bytes),
          id + ": embedded document differs from the stored bytes");
    check(model::equivalent(parse_ok(page.metadata[0], id), stored), id + ": embedded document not tree-equal");
  }
  auto missing = read_oai(service.handle_oai(
      {{"verb", "GetRecord"}, {"identifier", "info:didlkit-repo/i/none"}, {"metadataPrefix", "didl"}}));
  check(missing.error == "idDoesNotExist", "unknown identifier");
  return "3 versions newest-first, fragments and GetRecord exact";
}

std::string criterion8() {
  auto start = Clock::now();
  TempDir dir;
  ScriptedClock clock;
  repository::StoreOptions options;
  options.clock = clock.fn();
  repository::Store store(dir.path() / "store", options);
  std::vector<std::pair<Timestamp, std::string>> expected;
  const std::int64_t base = 1'200'000'000;
  for (int i = 0; i < 1000; ++i) {
    *clock.now = Timestamp::from_unix(base + (i * 7) / 10);  // ties on most seconds
    auto id = store.ingest(manifest_for("info:example/c/" + std::to_string(i % 37), "r" + std::to_string(i)));
    expected.emplace_back(*clock.now, id);
  }
  std::sort(expected.begin(), expected.end());

  access::Service service(store, service_config());
  std::vector<std::pair<std::string, std::string>> harvested;
  std::size_t responses = 0;
  std::size_t tokens = 0;
  std::optional<std::string> token;
  do {
    access::Params params{{"verb", "ListRecords"}};
    if (token) {
      params.emplace("resumptionToken", *token);
    } else {
      params.emplace("metadataPrefix", "didl");
    }
    auto page = read_oai(service.handle_oai(params));
    check(!page.error, "ListRecords error " + page.error.value_or(""));
    ++responses;
    check(page.metadata.size() == page.headers.size(), "metadata count differs from header count");
    for (std::size_t i = 0; i < page.headers.size(); ++i) {
      const auto& [id, datestamp] = page.headers[i];
      auto stored = store.get_package(id);
      check(page.metadata[i] == stored_without_declaration(stored.document_bytes), id + ": harvested bytes differ");
      auto doc = parse_ok(page.metadata[i], id);
      check(doc.document_id == id && doc.document_created->to_string() == datestamp, id + ": header mismatch");
      harvested.push_back(page.headers[i]);
    }
    if (page.has_token_element) ++tokens;
    token = page.token.empty() ? std::nullopt : std::optional<std::string>(page.token);
  } while (token);
  check(responses == 10, "ListRecords took " + std::to_string(responses) + " responses");
  check(tokens == 10, std::to_string(tokens) + " resumptionToken elements");
  check(harvested.size() == expected.size(), "harvested " + std::to_string(harvested.size()) + " records");
  for (std::size_t i = 0; i < expected.size(); ++i) {
    check(harvested[i].first == expected[i].second && harvested[i].second == expected[i].first.to_string(),
          "harvest order differs at " + std::to_string(i));
  }

  testsupport::Rng rng(8);
  for (int w = 0; w < 50; ++w) {
    auto a = base - 5 + static_cast<std::int64_t>(rng() % 710);
    auto b = a + static_cast<std::int64_t>(rng() % 300);
    auto from = Timestamp::from_unix(a);
    auto until = Timestamp::from_unix(b);
    std::vector<std::string> want;
    for (const auto& [created, id] : expected) {
      if (created >= from && created <= until) want.push_back(id);
    }
    std::vector<std::string> got;
    std::optional<std::string> next;
    bool empty_reply = false;
    do {
      access::Params params{{"verb", "ListIdentifiers"}};
      if (next) {
        params.emplace("resumptionToken", *next);
      } else {
        params.emplace("metadataPrefix", "didl");
        params.emplace("from", from.to_string());
        params.emplace("until", until.to_string());
      }
      auto page = read_oai(service.handle_oai(params));
      if (page.error) {
        check(*page.error == "noRecordsMatch" && !next, "window error " + *page.error);
        empty_reply = true;
        break;
      }
      for (const auto& h : page.headers) got.push_back(h.first);
      next = page.token.empty() ? std::nullopt : std::optional<std::string>(page.token);
    } while (next);
    check(got == want, "window " + std::to_string(w) + " [" + from.to_string() + ", " + until.to_string() +
                           "] returned " + std::to_string(got.size()) + " of " + std::to_string(want.size()));
    check(!empty_reply || want.empty(), "noRecordsMatch for a non-empty window");
  }
  auto elapsed = seconds_since(start);
  check(elapsed < 120.0, "took " + std::to_string(elapsed) + " s");
  std::ostringstream out;
  out << "1000 records in 10 pages, 50 windows exact, " << elapsed << " s";
  return out.str();
}

std::string criterion9() {
  auto s = three_versions();
  access::Service service(*s.store, service_config());
  const std::string kev = "Z39.88-2004";

  auto versions = service.handle_openurl({{"url_ver", kev}, {"rft_id", s.content_id}, {"svc_id", "versions"}});
  check(versions.status == 200 && versions.content_type == "application/json", "versions status");
  auto list = nlohmann::json::parse(versions.body);
  check(list.size() == 3, "versions returned " + std::to_string(list.size()));
  for (std::size_t i = 0; i < 3; ++i) {
    check(list[i]["package_id"] == s.ids[2 - i], "versions order");
    check(list[i]["created"] == s.store->header(s.ids[2 - i])->created.to_string(), "versions created");
  }

  auto locate = service.handle_openurl({{"url_ver", kev}, {"rft_id", s.content_id}});
  check(locate.status == 302 && locate.headers["Location"] == service.get_record_url(s.ids[2]),
        "locate does not target the newest package");

  auto oldest = s.store->get_package(s.ids[0]);
  auto ds = service.handle_openurl(
      {{"rft_id", s.content_id}, {"svc_id", "datastream"}, {"fragment", oldest.item_xml_ids[0]}});
  check(ds.status == 200 && ds.content_type.rfind("text/xml", 0) == 0, "datastream status");
  check(ds.body == s.store->get_fragment(s.ids[0], oldest.item_xml_ids[0]), "datastream body");

  check(service.handle_openurl({{"rft_id", "info:doi/10.9999/unknown"}}).status == 404, "unknown rft_id");
  check(service.handle_openurl({{"rft_id", s.content_id}, {"svc_id", "datastream"}, {"fragment", "uuid-none"}})
                .status == 404,
        "unknown fragment");
  check(service.handle_openurl({{"rft_id", "not a uri"}}).status == 400, "malformed rft_id");
  check(service.handle_openurl({{"rft_id", s.content_id}, {"svc_id", "bogus"}}).status == 400, "bad svc_id");
  check(service.handle_openurl({{"url_ver", "Z39.88-1999"}, {"rft_id", s.content_id}}).status == 400,
        "bad url_ver");

  // Tie on created: package_id ascending wins.
  *s.clock.now = Timestamp::from_unix(1'100'000'000 + 3600 * 5);
  auto tie_a = s.store->ingest(manifest_for(s.content_id, "tie-a"));
  auto tie_b = s.store->ingest(manifest_for(s.content_id, "tie-b"));
  auto winner = std::min(tie_a, tie_b);
  auto tied = service.handle_openurl({{"rft_id", s.content_id}, {"svc_id", "locate"}});
  check(tied.headers["Location"] == service.get_record_url(winner), "tie not broken by package_id ascending");
  auto tied_list = nlohmann::json::parse(
      service.handle_openurl({{"rft_id", s.content_id}, {"svc_id", "versions"}}).body);
  check(tied_list.size() == 5 && tied_list[0]["package_id"] == winner &&
            tied_list[1]["package_id"] == std::max(tie_a, tie_b),
        "tied versions order");

  // Same service over HTTP.
  access::Server server(service);
  int port = server.bind("127.0.0.1", 0);
  std::thread thread([&] { server.listen(); });
  server.wait_until_ready();
  httplib::Client client("127.0.0.1", port);
  auto http_locate = client.Get("/openurl?url_ver=Z39.88-2004&rft_id=" + httplib::detail::encode_query_param(s.content_id));
  auto http_missing = client.Get("/openurl?rft_id=info%3Adoi%2Fnone");
  auto http_record = client.Post("/oai", "verb=GetRecord&metadataPrefix=didl&identifier=" +
                                             httplib::detail::encode_query_param(s.ids[1]),
                                 "application/x-www-form-urlencoded");
  server.stop();
  thread.join();
  check(http_locate && http_locate->status == 302 &&
            http_locate->get_header_value("Location") == service.get_record_url(winner),
        "HTTP locate");
  check(http_missing && http_missing->status == 404, "HTTP 404");
  check(http_record && read_oai(http_record->body).headers.at(0).first == s.ids[1], "HTTP POST GetRecord");
  return "versions, locate, datastream, 404/400 and tie-break verified (direct and HTTP)";
}

// Child: ingest until the store holds `target` packages, optionally dying at
// a commit step of its n-th ingest.
[[noreturn]] void ingest_child(const fs::path& root, int target, int die_at_ingest, int die_at_step) {
  try {
    int ingests = 0;
    repository::StoreOptions options;
    options.commit_hook = [&](repository::CommitStep step) {
      if (ingests == die_at_ingest && static_cast<int>(step) == die_at_step) raise(SIGKILL);
    };
    repository::Store store(root, options);
    while (static_cast<int>(store.size()) < target) {
      auto n = store.size();
      store.ingest(manifest_for("info:example/crash/" + std::to_string(n % 7), "payload-" + std::to_string(n)));
      ++ingests;
    }
    _exit(0);
  } catch (...) {
    _exit(3);
  }
}

void check_coherent(const fs::path& root, std::size_t& last_size) {
  repository::Store store(root);
  auto page = store.list_packages(std::nullopt, std::nullopt, std::nullopt, 1000);
  check(page.headers.size() == store.size(), "listing size differs from store size");
  check(store.size() >= last_size, "store lost packages");
  last_size = store.size();
  std::map<std::string, std::set<std::string>> by_content;
  for (const auto& h : page.headers) {
    auto record = store.get_package(h.package_id);
    auto doc = parse_ok(record.document_bytes, h.package_id);
    check(doc.document_id == h.package_id, h.package_id + ": document id mismatch");
    check(doc.document_created == h.created, h.package_id + ": created mismatch");
    for (const auto& c : record.content_ids) by_content[c].insert(h.package_id);
  }
  for (const auto& [content, packages] : by_content) {
    auto versions = store.resolve_content(content);
    std::set<std::string> resolved;
    for (const auto& v : versions) {
      resolved.insert(v.package_id);
      check(store.header(v.package_id).has_value(), content + " resolves to an unknown package");
    }
    check(resolved == packages, content + ": resolve_content disagrees with the packages");
  }
}

std::string criterion10() {
  TempDir dir;
  auto root = dir.path() / "store";
  testsupport::Rng rng(10);
  std::size_t last_size = 0;
  int timer_kills = 0;
  int hook_kills = 0;
  for (int k = 0; k < 20; ++k) {
    bool by_timer = k % 2 == 1;
    int die_ingest = static_cast<int>(rng() % 3);
    int die_step = static_cast<int>(rng() % 4);
    pid_t pid = fork();
    check(pid >= 0, "fork failed");
    if (pid == 0) ingest_child(root, 100, by_timer ? -1 : die_ingest, die_step);
    if (by_timer) {
      // Store start-up plus a few ingests; the child cannot finish 100 in this time.
      std::this_thread::sleep_for(std::chrono::microseconds(rng() % 4000));
      kill(pid, SIGKILL);
    }
    int status = 0;
    waitpid(pid, &status, 0);
    bool killed = WIFSIGNALED(status) && WTERMSIG(status) == SIGKILL;
    check(killed, "ingest child " + std::to_string(k) + " was not killed mid-run");
    (by_timer ? timer_kills : hook_kills)++;
    check_coherent(root, last_size);
  }
  pid_t pid = fork();
  if (pid == 0) ingest_child(root, 100, -1, -1);
  int status = 0;
  waitpid(pid, &status, 0);
  check(WIFEXITED(status) && WEXITSTATUS(status) == 0, "final run failed");
  check_coherent(root, last_size);
  check(last_size == 100, "store holds " + std::to_string(last_size) + " packages");
  check(hook_kills + timer_kills == 20, "expected 20 kills");
  return std::to_string(hook_kills + timer_kills) + " kills (" + std::to_string(hook_kills) + " at commit steps, " +
         std::to_string(timer_kills) + " timed), store coherent after each, 100 packages at end";
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<std::string()>>> criteria = {
      {"golden parse", criterion1},          {"round trip", criterion2},       {"mutation operators", criterion3},
      {"bit equivalence", criterion4},       {"content encoding", criterion5}, {"seal and verify", criterion6},
      {"dual addressing", criterion7},       {"harvest", criterion8},          {"openurl", criterion9},
      {"crash consistency", criterion10},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto& [name, fn] = criteria[i];
    std::string result;
    bool ok = false;
    try {
      result = fn();
      ok = true;
    } catch (const Failure& f) {
      result = f.what;
    } catch (const std::exception& e) {
      result = std::string("exception: ") + e.what();
    }
    failures += ok ? 0 : 1;
    std::cout << "criterion " << i + 1 << " " << (ok ? "PASS" : "FAIL") << " " << name << ": " << result << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
