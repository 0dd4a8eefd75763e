#include "cli.hpp"

#include <signal.h>

#include <algorithm>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "didlkit/access.hpp"
#include "didlkit/codec.hpp"
#include "didlkit/dii.hpp"
#include "didlkit/error.hpp"
#include "didlkit/integrity.hpp"
#include "didlkit/repository.hpp"
#include "didlkit/resourceio.hpp"
#include "didlkit/uri.hpp"
#include "didlkit/validator.hpp"
#include "json.hpp"

namespace didlkit::cli {

namespace {

using Json = nlohmann::ordered_json;

// Failure with a chosen exit code and no library error behind it.
struct Exit {
  int code;
  std::string message;
};

int exit_code_for(Errc code) {
  switch (code) {
    case Errc::not_found: return kNotFound;
    case Errc::io_error:
    case Errc::fetch_error: return kIoError;
    default: return kValidationFailure;
  }
}

// http URIs go to the network when allowed; everything else, and http
// without --allow-http, is looked up below the local fetch root.
class SchemeFetcher : public resourceio::Fetcher {
 public:
  SchemeFetcher(std::optional<std::string> root, bool allow_http) {
    if (root) local_.emplace(*root);
    if (allow_http) http_.emplace();
  }

  Bytes fetch(const std::string& uri) override {
    if (http_ && uri::scheme(uri).value_or("") == "http") return http_->fetch(uri);
    if (!local_) throw Error(Errc::fetch_error, "fetching " + uri + " needs --fetch-root or --allow-http");
    return local_->fetch(uri);
  }

  bool enabled() const { return local_.has_value() || http_.has_value(); }

 private:
  std::optional<resourceio::LocalFetcher> local_;
  std::optional<resourceio::HttpFetcher> http_;
};

struct FetchFlags {
  std::optional<std::string> root;
  bool allow_http = false;

  void add_to(CLI::App* app) {
    app->add_option("--fetch-root", root, "Directory standing in for scheme://host/ locations");
    app->add_flag("--allow-http", allow_http, "Permit network fetches over http");
  }
  SchemeFetcher make() const { return SchemeFetcher(root, allow_http); }
};

std::string read_input(const std::string& path, std::istream& in) {
  if (path == "-") {
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  }
  std::ifstream file(path, std::ios::binary);
  if (!file) throw Error(Errc::io_error, "cannot read " + path);
  std::ostringstream buffer;
  buffer << file.rdbuf();
  if (file.bad()) throw Error(Errc::io_error, "cannot read " + path);
  return buffer.str();
}

void print_diagnostics(const std::vector<codec::ParseDiagnostic>& diagnostics, std::ostream& err) {
  for (const auto& d : diagnostics) {
    err << codec::severity_name(d.severity) << ' ' << d.code << ' ' << (d.node_path.empty() ? "/" : d.node_path)
        << ' ' << d.message << '\n';
  }
}

Json diagnostics_json(const std::vector<codec::ParseDiagnostic>& diagnostics) {
  Json list = Json::array();
  for (const auto& d : diagnostics) {
    Json j;
    j["code"] = d.code;
    j["severity"] = codec::severity_name(d.severity);
    j["path"] = d.node_path.empty() ? "/" : d.node_path;
    j["message"] = d.message;
    list.push_back(std::move(j));
  }
  return list;
}

// Parsed document or an Exit carrying the parse failure.
model::DidlDocument parse_or_exit(const std::string& path, std::istream& in, std::ostream& err) {
  auto parsed = codec::parse_didl(read_input(path, in));
  if (!parsed.document || parsed.has_fatal()) {
    print_diagnostics(parsed.diagnostics, err);
    throw Exit{kValidationFailure, path + ": not a usable DIDL document"};
  }
  return std::move(*parsed.document);
}

std::optional<integrity::SigningKey> load_key(const std::optional<std::string>& path, std::istream& in) {
  if (!path) return std::nullopt;
  return integrity::SigningKey::from_json(read_input(*path, in));
}

repository::StoreOptions store_options(const std::string& authority, const integrity::SigningKey* key) {
  repository::StoreOptions options;
  options.build.authority = authority;
  options.build.key = key;
  return options;
}

std::string provision_name(const model::Payload& payload) {
  auto provision = payload.provision();
  if (!provision) return "conflicting";
  if (std::holds_alternative<model::ByReference>(*provision)) return "by-reference";
  if (payload.encoding) return "by-value-" + *payload.encoding;
  return std::holds_alternative<model::ByValueXml>(*provision) ? "by-value-xml" : "by-value-text";
}

Json inspect_json(const model::DidlDocument& doc, resourceio::Fetcher* fetcher) {
  Json j;
  j["document_id"] = doc.document_id ? Json(*doc.document_id) : Json(nullptr);
  j["document_created"] = doc.document_created ? Json(doc.document_created->to_string()) : Json(nullptr);

  Json identifiers = Json::array();
  for (const auto& id : dii::extract_identifiers(doc)) {
    Json e;
    e["value"] = id.value;
    e["host"] = id.host.to_string();
    identifiers.push_back(std::move(e));
  }
  j["identifiers"] = std::move(identifiers);

  Json related = Json::array();
  for (const auto& r : dii::extract_related(doc)) {
    Json e;
    e["value"] = r.value;
    e["relationship_type"] = r.relationship_type ? Json(*r.relationship_type) : Json(nullptr);
    e["host"] = r.host.to_string();
    related.push_back(std::move(e));
  }
  j["related_identifiers"] = std::move(related);

  Json relationships = Json::array();
  for (const auto& t : model::derive_relationships(doc)) {
    Json e;
    e["subject"] = t.subject;
    e["predicate"] = model::predicate_name(t.predicate);
    e["object"] = t.object;
    relationships.push_back(std::move(e));
  }
  j["relationships"] = std::move(relationships);

  Json components = Json::array();
  model::visit(doc, [&](const model::Node& node, const model::NodePath& path, const model::Node*) {
    if (node.kind != model::Kind::component) return;
    Json c;
    c["path"] = path.to_string();
    c["id"] = node.xml_id ? Json(*node.xml_id) : Json(nullptr);
    c["identifiers"] = dii::identifiers_of(node);
    c["sealed"] = std::any_of(node.children.begin(), node.children.end(),
                              [](const model::Node& d) { return integrity::is_integrity_descriptor(d); });
    Json resources = Json::array();
    for (std::size_t i = 0; i < node.children.size(); ++i) {
      const auto& r = node.children[i];
      if (r.kind != model::Kind::resource) continue;
      Json e;
      e["path"] = path.child(i).to_string();
      e["mime_type"] = r.payload.mime_type ? Json(*r.payload.mime_type) : Json(nullptr);
      e["provision"] = provision_name(r.payload);
      if (r.payload.ref) e["ref"] = *r.payload.ref;
      try {
        auto bytes = resourceio::materialize(r, fetcher);
        e["size"] = bytes.size();
        e["sha256"] = sha256_hex(bytes);
      } catch (const Error& error) {
        e["sha256"] = nullptr;
        e["error"] = error.what();
      }
      resources.push_back(std::move(e));
    }
    c["resources"] = std::move(resources);
    components.push_back(std::move(c));
  });
  j["components"] = std::move(components);
  return j;
}

void inspect_text(const Json& j, std::ostream& out) {
  out << "document_id: " << (j["document_id"].is_null() ? "-" : j["document_id"].get<std::string>()) << '\n';
  out << "created: " << (j["document_created"].is_null() ? "-" : j["document_created"].get<std::string>())
      << '\n';
  for (const auto& id : j["identifiers"]) {
    out << "identifier " << id["host"].get<std::string>() << ' ' << id["value"].get<std::string>() << '\n';
  }
  for (const auto& r : j["related_identifiers"]) {
    out << "related " << r["host"].get<std::string>() << ' ' << r["value"].get<std::string>();
    if (!r["relationship_type"].is_null()) out << ' ' << r["relationship_type"].get<std::string>();
    out << '\n';
  }
  for (const auto& t : j["relationships"]) {
    out << "relationship " << t["subject"].get<std::string>() << ' ' << t["predicate"].get<std::string>() << ' '
        << t["object"].get<std::string>() << '\n';
  }
  for (const auto& c : j["components"]) {
    out << "component " << c["path"].get<std::string>();
    if (!c["id"].is_null()) out << ' ' << c["id"].get<std::string>();
    out << '\n';
    for (const auto& r : c["resources"]) {
      out << "  resource " << r["path"].get<std::string>() << ' '
          << (r["mime_type"].is_null() ? "-" : r["mime_type"].get<std::string>()) << ' '
          << r["provision"].get<std::string>() << ' '
          << (r["sha256"].is_null() ? "unavailable" : r["sha256"].get<std::string>()) << '\n';
    }
  }
}

void wait_for_termination(access::Server& server) {
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);
  std::thread watcher([&] {
    int received = 0;
    sigwait(&signals, &received);
    server.stop();
  });
  watcher.detach();
}

}  // namespace

int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err) {
  CLI::App app{"didlkit: MPEG-21 DIDL toolkit", "didlkit"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every command");

  std::function<int()> action;
  bool json = false;
  FetchFlags fetch;
  std::string store_root;
  std::string authority = "didlkit-repo";
  std::optional<std::string> key_path;

  auto add_store = [&](CLI::App* cmd) {
    cmd->add_option("--store", store_root, "Store root directory")->envname("DIDLKIT_STORE")->required();
  };

  // create
  auto* create = app.add_subcommand("create", "Wrap a manifest into a DIDL document (no store)");
  std::string manifest_path;
  std::optional<std::string> created_text;
  create->add_option("manifest", manifest_path, "Manifest JSON file or -")->required();
  create->add_option("--authority", authority, "Package identifier authority");
  create->add_option("--created", created_text, "DIDLDocumentCreated (RFC 3339); default now");
  create->add_option("--key", key_path, "Signing key JSON");
  fetch.add_to(create);
  create->callback([&] {
    action = [&] {
      auto manifest = repository::AssetManifest::from_json(read_input(manifest_path, in));
      auto created = Timestamp::now();
      if (created_text) {
        auto parsed = Timestamp::parse(*created_text);
        if (!parsed) throw Exit{kUsage, "--created: not an RFC 3339 date-time"};
        created = *parsed;
      }
      auto key = load_key(key_path, in);
      repository::BuildOptions options;
      options.authority = authority;
      options.key = key ? &*key : nullptr;
      repository::RandomIdSource ids;
      auto fetcher = fetch.make();
      auto built = repository::build_package_document(manifest, created, ids,
                                                      fetcher.enabled() ? &fetcher : nullptr, options);
      out << codec::serialize_didl(built.document);
      return int{kOk};
    };
  });

  // validate
  auto* validate = app.add_subcommand("validate", "Check a DIDL document against the rule catalog");
  std::string input_path;
  bool deep = false;
  bool strict = false;
  validate->add_option("file", input_path, "DIDL file or -")->required();
  validate->add_flag("--deep", deep, "Also check bit-equivalence of component resources");
  validate->add_flag("--strict", strict, "Treat warnings as errors");
  validate->add_flag("--json", json, "Machine-readable report");
  fetch.add_to(validate);
  validate->callback([&] {
    action = [&] {
      auto parsed = codec::parse_didl(read_input(input_path, in));
      if (!parsed.document || parsed.has_fatal()) {
        if (json) {
          Json j;
          j["passed"] = false;
          j["parse_diagnostics"] = diagnostics_json(parsed.diagnostics);
          j["findings"] = Json::array();
          out << j.dump(2) << '\n';
        }
        print_diagnostics(parsed.diagnostics, err);
        return int{kValidationFailure};
      }
      auto fetcher = fetch.make();
      if (deep && !fetcher.enabled()) throw Exit{kUsage, "--deep needs --fetch-root or --allow-http"};
      validator::Options options;
      options.fetcher = deep ? &fetcher : nullptr;
      options.strict = strict;
      auto report = validator::validate(*parsed.document, options);
      if (json) {
        auto j = Json::parse(validator::to_json(report));
        Json ordered;
        ordered["passed"] = j["passed"];
        ordered["parse_diagnostics"] = diagnostics_json(parsed.diagnostics);
        ordered["findings"] = j["findings"];
        out << ordered.dump(2) << '\n';
      } else {
        err << validator::to_text(report);
        if (report.passed) out << input_path << ": ok\n";
      }
      return report.passed ? int{kOk} : int{kValidationFailure};
    };
  });

  // inspect
  auto* inspect = app.add_subcommand("inspect", "Show identifiers, relationships and component digests");
  inspect->add_option("file", input_path, "DIDL file or -")->required();
  inspect->add_flag("--json", json, "Machine-readable output");
  fetch.add_to(inspect);
  inspect->callback([&] {
    action = [&] {
      auto doc = parse_or_exit(input_path, in, err);
      auto fetcher = fetch.make();
      auto j = inspect_json(doc, fetcher.enabled() ? &fetcher : nullptr);
      if (json) {
        out << j.dump(2) << '\n';
      } else {
        inspect_text(j, out);
      }
      return int{kOk};
    };
  });

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Store a manifest as a new package; prints its id");
  ingest->add_option("manifest", manifest_path, "Manifest JSON file or -")->required();
  ingest->add_option("--authority", authority, "Package identifier authority")->envname("DIDLKIT_AUTHORITY");
  ingest->add_option("--key", key_path, "Signing key JSON");
  add_store(ingest);
  fetch.add_to(ingest);
  ingest->callback([&] {
    action = [&] {
      auto manifest = repository::AssetManifest::from_json(read_input(manifest_path, in));
      auto key = load_key(key_path, in);
      repository::Store store(store_root, store_options(authority, key ? &*key : nullptr));
      auto fetcher = fetch.make();
      out << store.ingest(manifest, fetcher.enabled() ? &fetcher : nullptr) << '\n';
      return int{kOk};
    };
  });

  // get
  auto* get = app.add_subcommand("get", "Print a stored package document");
  std::string package_id;
  get->add_option("package_id", package_id, "Package identifier")->required();
  add_store(get);
  get->callback([&] {
    action = [&] {
      repository::Store store(store_root, store_options(authority, nullptr));
      out << store.get_package(package_id).document_bytes;
      return int{kOk};
    };
  });

  // resolve
  auto* resolve = app.add_subcommand("resolve", "List packages holding a content identifier, newest first");
  std::string content_id;
  resolve->add_option("content_id", content_id, "Content identifier")->required();
  resolve->add_flag("--json", json, "Machine-readable output");
  add_store(resolve);
  resolve->callback([&] {
    action = [&] {
      repository::Store store(store_root, store_options(authority, nullptr));
      auto versions = store.resolve_content(content_id);
      if (versions.empty()) throw Error(Errc::not_found, "no package holds " + content_id);
      if (json) {
        Json list = Json::array();
        for (const auto& v : versions) {
          Json e;
          e["package_id"] = v.package_id;
          e["created"] = v.created.to_string();
          e["host_path"] = v.host_path;
          list.push_back(std::move(e));
        }
        out << list.dump(2) << '\n';
      } else {
        for (const auto& v : versions) {
          out << v.created.to_string() << '\t' << v.package_id << '\t' << v.host_path << '\n';
        }
      }
      return int{kOk};
    };
  });

  // fragment
  auto* fragment = app.add_subcommand("fragment", "Print the entity with an XML ID from a package");
  std::string xml_id;
  fragment->add_option("package_id", package_id, "Package identifier")->required();
  fragment->add_option("xml_id", xml_id, "XML ID inside the package")->required();
  add_store(fragment);
  fragment->callback([&] {
    action = [&] {
      repository::Store store(store_root, store_options(authority, nullptr));
      out << store.get_fragment(package_id, xml_id);
      return int{kOk};
    };
  });

  // serve
  auto* serve = app.add_subcommand("serve", "Run the OAI-PMH and OpenURL service");
  std::string host = "127.0.0.1";
  int port = 8080;
  std::optional<std::string> base_url;
  access::ServiceConfig service_config;
  serve->add_option("--host", host, "Listen address")->envname("DIDLKIT_HOST");
  serve->add_option("--port", port, "Listen port (0 picks one)")->envname("DIDLKIT_PORT");
  serve->add_option("--base-url", base_url, "Public base URL")->envname("DIDLKIT_BASE_URL");
  serve->add_option("--repository-name", service_config.repository_name, "OAI repositoryName")
      ->envname("DIDLKIT_REPOSITORY_NAME");
  serve->add_option("--admin-email", service_config.admin_email, "OAI adminEmail")
      ->envname("DIDLKIT_ADMIN_EMAIL");
  serve->add_option("--page-size", service_config.page_size, "Records per OAI list page")
      ->envname("DIDLKIT_PAGE_SIZE")
      ->check(CLI::PositiveNumber);
  add_store(serve);
  serve->callback([&] {
    action = [&] {
      if (port == 0 && !base_url) throw Exit{kUsage, "--port 0 needs --base-url"};
      service_config.base_url = base_url.value_or("http://" + host + ":" + std::to_string(port));
      repository::Store store(store_root, store_options(authority, nullptr));
      access::Service service(store, service_config);
      access::Server server(service);
      int bound = server.bind(host, port);
      err << "listening on " << host << ':' << bound << '\n';
      wait_for_termination(server);
      server.listen();
      return int{kOk};
    };
  });

  // seal
  auto* seal = app.add_subcommand("seal", "Add digest (and signature) blocks to a DIDL document");
  seal->add_option("file", input_path, "DIDL file or -")->required();
  seal->add_option("--key", key_path, "Signing key JSON");
  fetch.add_to(seal);
  seal->callback([&] {
    action = [&] {
      auto doc = parse_or_exit(input_path, in, err);
      auto key = load_key(key_path, in);
      integrity::SealOptions options;
      options.key = key ? &*key : nullptr;
      options.signed_at = Timestamp::now();
      auto fetcher = fetch.make();
      std::vector<model::NodePath> components;
      model::visit(doc, [&](const model::Node& node, const model::NodePath& path, const model::Node*) {
        if (node.kind == model::Kind::component) components.push_back(path);
      });
      for (const auto& path : components) {
        auto* node = model::node_at(doc, path);
        try {
          *node = integrity::seal_component(*node, fetcher.enabled() ? &fetcher : nullptr, options);
        } catch (const Error& e) {
          throw Error(e.code(), path.to_string() + ": " + e.what());
        }
      }
      out << codec::serialize_didl(integrity::seal_document(doc, options));
      return int{kOk};
    };
  });

  // verify
  auto* verify = app.add_subcommand("verify", "Check digest and signature blocks");
  std::vector<std::string> keyring_paths;
  verify->add_option("file", input_path, "DIDL file or -")->required();
  verify->add_option("--keyring", keyring_paths, "Public key JSON (repeatable)");
  verify->add_flag("--json", json, "Machine-readable output");
  fetch.add_to(verify);
  verify->callback([&] {
    action = [&] {
      auto doc = parse_or_exit(input_path, in, err);
      integrity::Keyring keyring;
      for (const auto& path : keyring_paths) keyring.add_json(read_input(path, in));
      auto fetcher = fetch.make();
      Json results = Json::array();
      bool all_ok = true;
      auto record = [&](const std::string& path, integrity::Verdict verdict) {
        all_ok = all_ok && verdict == integrity::Verdict::ok;
        Json e;
        e["path"] = path;
        e["verdict"] = integrity::verdict_name(verdict);
        results.push_back(std::move(e));
      };
      model::visit(doc, [&](const model::Node& node, const model::NodePath& path, const model::Node*) {
        if (node.kind != model::Kind::component) return;
        record(path.to_string(),
               integrity::verify_component(node, fetcher.enabled() ? &fetcher : nullptr, keyring));
      });
      record("/", integrity::verify_document(doc, keyring));
      if (json) {
        Json j;
        j["ok"] = all_ok;
        j["results"] = std::move(results);
        out << j.dump(2) << '\n';
      } else {
        for (const auto& r : results) {
          out << r["verdict"].get<std::string>() << ' ' << r["path"].get<std::string>() << '\n';
        }
      }
      return all_ok ? int{kOk} : int{kValidationFailure};
    };
  });

  // keygen
  auto* keygen = app.add_subcommand("keygen", "Create an Ed25519 signing key (JSON)");
  std::string key_id;
  bool public_only = false;
  keygen->add_option("--key-id", key_id, "Key identifier; default derives from the public key");
  keygen->add_flag("--public", public_only, "Print only the public half of a new key");
  keygen->callback([&] {
    action = [&] {
      auto key = integrity::SigningKey::generate(key_id);
      out << (public_only ? key.public_json() : key.to_json()) << '\n';
      return int{kOk};
    };
  });

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "didlkit: " << e.what() << '\n';
    if (auto* selected = app.get_subcommands().empty() ? nullptr : app.get_subcommands().front()) {
      err << "see: didlkit " << selected->get_name() << " --help\n";
    } else {
      err << "see: didlkit --help\n";
    }
    return kUsage;
  }

  try {
    return action();
  } catch (const Exit& e) {
    err << "didlkit: " << e.message << '\n';
    return e.code;
  } catch (const Error& e) {
    err << "didlkit: " << to_string(e.code()) << ": " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "didlkit: " << e.what() << '\n';
    return kIoError;
  }
}

}  // namespace didlkit::cli
