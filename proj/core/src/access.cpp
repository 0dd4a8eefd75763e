#include "didlkit/access.hpp"

#include <set>

#include "didlkit/base64.hpp"
#include "didlkit/codec.hpp"
#include "didlkit/error.hpp"
#include "didlkit/namespaces.hpp"
#include "didlkit/uri.hpp"
#include "didlkit/xml.hpp"
#include "httplib.h"
#include "json.hpp"

namespace didlkit::access {

namespace {

constexpr std::string_view kOaiSchema = "http://www.openarchives.org/OAI/2.0/OAI-PMH.xsd";
constexpr std::string_view kXsi = "http://www.w3.org/2001/XMLSchema-instance";
constexpr std::string_view kOaiDcSchema = "http://www.openarchives.org/OAI/2.0/oai_dc.xsd";
constexpr std::string_view kKevVersion = "Z39.88-2004";

struct OaiError {
  std::string code;
  std::string message;
};

using Arguments = std::map<std::string, std::string>;

// Single-valued view of the request; repeated keys are a protocol error.
std::optional<Arguments> single_valued(const Params& params) {
  Arguments out;
  for (const auto& [key, value] : params) {
    if (!out.emplace(key, value).second) return std::nullopt;
  }
  return out;
}

std::optional<std::string> take(const Arguments& args, const std::string& key) {
  auto it = args.find(key);
  if (it == args.end()) return std::nullopt;
  return it->second;
}

enum class Granularity { day, second };

struct Datestamp {
  Timestamp at;
  Granularity granularity;
};

std::optional<Datestamp> parse_datestamp(std::string_view text) {
  if (text.size() == 10) {
    if (auto day = Timestamp::parse_date(text)) return Datestamp{*day, Granularity::day};
    return std::nullopt;
  }
  auto at = Timestamp::parse(text);
  if (!at || at->to_string() != text) return std::nullopt;
  return Datestamp{*at, Granularity::second};
}

// The verbatim document without its XML declaration, ready to nest.
std::string_view without_declaration(std::string_view bytes) {
  if (bytes.substr(0, 5) == "<?xml") {
    auto end = bytes.find("?>");
    if (end != std::string_view::npos) bytes.remove_prefix(end + 2);
  }
  while (!bytes.empty() && (bytes.front() == '\n' || bytes.front() == '\r')) bytes.remove_prefix(1);
  while (!bytes.empty() && (bytes.back() == '\n' || bytes.back() == '\r')) bytes.remove_suffix(1);
  return bytes;
}

xml::Element dc_element(std::string local, std::string text) {
  xml::Element e;
  e.name = {std::string(ns::kDc), std::move(local)};
  e.children.emplace_back(std::move(text));
  return e;
}

// oai_dc rendering: DC elements of the first Item's first Descriptor that
// carries any, else a title-only stub naming the package.
std::string oai_dc(const repository::PackageRecord& record) {
  xml::Element dc;
  dc.name = {std::string(ns::kOaiDc), "dc"};
  dc.attributes.push_back({{std::string(kXsi), "schemaLocation"},
                           std::string(ns::kOaiDc) + " " + std::string(kOaiDcSchema)});

  auto parsed = codec::parse_didl(record.document_bytes);
  if (parsed.document) {
    const model::Node* item = nullptr;
    model::visit(*parsed.document, [&](const model::Node& node, const model::NodePath&, const model::Node*) {
      if (!item && node.kind == model::Kind::item) item = &node;
    });
    if (item) {
      for (const auto* descriptor : item->children_of(model::Kind::descriptor)) {
        std::vector<xml::Element> found;
        for (const auto* statement : descriptor->children_of(model::Kind::statement)) {
          const auto* inline_xml = std::get_if<model::ByValueXml>(&statement->payload.content);
          if (!inline_xml) continue;
          for (const auto& node : inline_xml->nodes) {
            if (!node.is_element()) continue;
            const auto& top = node.element();
            if (top.name.ns == ns::kDc) {
              found.push_back(top);
              continue;
            }
            for (const auto* child : top.elements()) {
              if (child->name.ns == ns::kDc) found.push_back(*child);
            }
          }
        }
        if (!found.empty()) {
          for (auto& e : found) dc.children.emplace_back(std::move(e));
          break;
        }
      }
    }
  }
  if (dc.children.empty()) dc.children.emplace_back(dc_element("title", record.package_id));

  xml::PrefixTable prefixes;
  prefixes.bind(std::string(ns::kOaiDc), "oai_dc");
  prefixes.bind(std::string(ns::kDc), "dc");
  prefixes.bind(std::string(kXsi), "xsi");
  xml::WriteOptions options;
  options.style = xml::Style::canonical;
  options.xml_declaration = false;
  options.root_namespaces = {std::string(ns::kDc), std::string(kXsi)};
  return xml::write(dc, prefixes, options);
}

class Envelope {
 public:
  Envelope(Timestamp response_date, const std::string& base_url) : base_url_(base_url) {
    out_ += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out_ += "<OAI-PMH xmlns=\"" + std::string(ns::kOai) + "\" xmlns:xsi=\"" + std::string(kXsi) +
            "\" xsi:schemaLocation=\"" + std::string(ns::kOai) + " " + std::string(kOaiSchema) + "\">\n";
    out_ += "<responseDate>" + response_date.to_string() + "</responseDate>\n";
  }

  void request(const Arguments* args) {
    out_ += "<request";
    if (args) {
      for (const auto& [key, value] : *args) {
        out_ += " " + key + "=\"" + xml::escape_attribute(value) + "\"";
      }
    }
    out_ += ">" + xml::escape_text(oai_url()) + "</request>\n";
  }

  void error(const OaiError& e) {
    out_ += "<error code=\"" + e.code + "\">" + xml::escape_text(e.message) + "</error>\n";
  }

  std::string& body() { return out_; }

  std::string finish() {
    out_ += "</OAI-PMH>\n";
    return std::move(out_);
  }

 private:
  std::string oai_url() const { return base_url_ + "/oai"; }

  std::string base_url_;
  std::string out_;
};

void write_header(std::string& out, const repository::PackageHeader& header) {
  out += "<header><identifier>" + xml::escape_text(header.package_id) + "</identifier><datestamp>" +
         header.created.to_string() + "</datestamp></header>";
}

void write_record(std::string& out, const repository::PackageRecord& record) {
  out += "<record>";
  write_header(out, {record.package_id, record.created, {}});
  out += "<metadata>";
  out += without_declaration(record.document_bytes);
  out += "</metadata><about>";
  out += oai_dc(record);
  out += "</about></record>\n";
}

std::string encode_optional(const std::optional<Timestamp>& t) { return t ? t->to_string() : ""; }

Response plain(int status, std::string message) {
  return {status, "text/plain; charset=UTF-8", std::move(message) + "\n", {}};
}

}  // namespace

// ---------------------------------------------------------------------------
// Resumption tokens

std::string encode_resumption_token(const ResumptionState& state) {
  auto plain = std::string(kMetadataPrefix) + "|" + encode_optional(state.from) + "|" +
               encode_optional(state.until) + "|" + state.cursor;
  return base64::encode_url(as_bytes(plain));
}

ResumptionState decode_resumption_token(std::string_view token) {
  auto bytes = base64::decode_url(token);
  if (!bytes || token.empty()) throw Error(Errc::bad_cursor, "malformed resumption token");
  auto plain = to_string(*bytes);
  std::vector<std::string> parts;
  std::size_t start = 0;
  for (int i = 0; i < 3; ++i) {
    auto bar = plain.find('|', start);
    if (bar == std::string::npos) throw Error(Errc::bad_cursor, "malformed resumption token");
    parts.push_back(plain.substr(start, bar - start));
    start = bar + 1;
  }
  parts.push_back(plain.substr(start));
  if (parts[0] != kMetadataPrefix || parts[3].empty()) {
    throw Error(Errc::bad_cursor, "malformed resumption token");
  }
  ResumptionState state;
  for (int i : {1, 2}) {
    if (parts[i].empty()) continue;
    auto at = Timestamp::parse(parts[i]);
    if (!at || at->to_string() != parts[i]) throw Error(Errc::bad_cursor, "malformed resumption token");
    (i == 1 ? state.from : state.until) = *at;
  }
  state.cursor = parts[3];
  repository::decode_cursor(state.cursor);
  return state;
}

// ---------------------------------------------------------------------------
// Service

Service::Service(const repository::Store& store, ServiceConfig config)
    : store_(store), config_(std::move(config)) {
  while (!config_.base_url.empty() && config_.base_url.back() == '/') config_.base_url.pop_back();
  if (config_.page_size == 0) throw Error(Errc::invalid_argument, "page size must be positive");
  if (!config_.clock) config_.clock = [] { return Timestamp::now(); };
}

std::string Service::get_record_url(std::string_view package_id) const {
  return config_.base_url + "/oai?verb=GetRecord&identifier=" + uri::percent_encode(package_id) +
         "&metadataPrefix=" + std::string(kMetadataPrefix);
}

std::string Service::handle_oai(const Params& params) const {
  Envelope envelope(config_.clock(), config_.base_url);
  auto fail = [&](const Arguments* echo, OaiError e) {
    envelope.request(echo);
    envelope.error(e);
    return envelope.finish();
  };

  auto args = single_valued(params);
  if (!args) {
    if (params.count("verb") > 1) return fail(nullptr, {"badVerb", "verb is repeated"});
    return fail(nullptr, {"badArgument", "an argument is repeated"});
  }
  auto verb = take(*args, "verb");
  if (!verb) return fail(nullptr, {"badVerb", "missing verb"});

  static const std::map<std::string, std::set<std::string>, std::less<>> allowed = {
      {"Identify", {}},
      {"GetRecord", {"identifier", "metadataPrefix"}},
      {"ListRecords", {"from", "until", "metadataPrefix", "resumptionToken"}},
      {"ListIdentifiers", {"from", "until", "metadataPrefix", "resumptionToken"}},
  };
  auto spec = allowed.find(*verb);
  if (spec == allowed.end()) return fail(nullptr, {"badVerb", "unsupported verb '" + *verb + "'"});
  for (const auto& [key, value] : *args) {
    if (key != "verb" && !spec->second.count(key)) {
      return fail(nullptr, {"badArgument", "illegal argument '" + key + "'"});
    }
  }

  if (*verb == "Identify") {
    envelope.request(&*args);
    auto& out = envelope.body();
    auto earliest = store_.earliest().value_or(Timestamp::from_unix(0));
    out += "<Identify><repositoryName>" + xml::escape_text(config_.repository_name) +
           "</repositoryName><baseURL>" + xml::escape_text(config_.base_url + "/oai") +
           "</baseURL><protocolVersion>2.0</protocolVersion><adminEmail>" +
           xml::escape_text(config_.admin_email) + "</adminEmail><earliestDatestamp>" +
           earliest.to_string() +
           "</earliestDatestamp><deletedRecord>no</deletedRecord>"
           "<granularity>YYYY-MM-DDThh:mm:ssZ</granularity></Identify>\n";
    return envelope.finish();
  }

  if (*verb == "GetRecord") {
    auto identifier = take(*args, "identifier");
    auto prefix = take(*args, "metadataPrefix");
    if (!identifier || !prefix) {
      return fail(nullptr, {"badArgument", "GetRecord requires identifier and metadataPrefix"});
    }
    if (*prefix != kMetadataPrefix) {
      return fail(&*args, {"cannotDisseminateFormat", "only metadataPrefix 'didl' is served"});
    }
    repository::PackageRecord record;
    try {
      record = store_.get_package(*identifier);
    } catch (const Error& e) {
      if (e.code() != Errc::not_found) throw;
      return fail(&*args, {"idDoesNotExist", "no record with identifier '" + *identifier + "'"});
    }
    envelope.request(&*args);
    auto& out = envelope.body();
    out += "<GetRecord>";
    write_record(out, record);
    out += "</GetRecord>\n";
    return envelope.finish();
  }

  // ListRecords / ListIdentifiers
  ResumptionState state;
  bool resumed = false;
  if (auto token = take(*args, "resumptionToken")) {
    if (args->size() != 2) {
      return fail(nullptr, {"badArgument", "resumptionToken is an exclusive argument"});
    }
    try {
      state = decode_resumption_token(*token);
    } catch (const Error&) {
      return fail(&*args, {"badResumptionToken", "invalid resumption token"});
    }
    resumed = true;
  } else {
    auto prefix = take(*args, "metadataPrefix");
    if (!prefix) return fail(nullptr, {"badArgument", *verb + " requires metadataPrefix"});
    std::optional<Datestamp> from;
    std::optional<Datestamp> until;
    if (auto text = take(*args, "from")) {
      from = parse_datestamp(*text);
      if (!from) return fail(nullptr, {"badArgument", "illegal from datestamp '" + *text + "'"});
    }
    if (auto text = take(*args, "until")) {
      until = parse_datestamp(*text);
      if (!until) return fail(nullptr, {"badArgument", "illegal until datestamp '" + *text + "'"});
    }
    if (from && until && from->granularity != until->granularity) {
      return fail(nullptr, {"badArgument", "from and until differ in granularity"});
    }
    if (*prefix != kMetadataPrefix) {
      return fail(&*args, {"cannotDisseminateFormat", "only metadataPrefix 'didl' is served"});
    }
    if (from) state.from = from->at;
    if (until) {
      state.until = until->granularity == Granularity::day
                        ? Timestamp::from_unix(until->at.unix_seconds() + 86399)
                        : until->at;
    }
    if (state.from && state.until && *state.from > *state.until) {
      return fail(nullptr, {"badArgument", "from is later than until"});
    }
  }

  repository::Page page;
  try {
    page = store_.list_packages(state.from, state.until,
                                resumed ? std::optional<std::string>(state.cursor) : std::nullopt,
                                config_.page_size);
  } catch (const Error& e) {
    if (e.code() != Errc::bad_cursor) throw;
    return fail(&*args, {"badResumptionToken", "invalid resumption token"});
  }
  if (page.headers.empty()) return fail(&*args, {"noRecordsMatch", "no records match the request"});

  envelope.request(&*args);
  auto& out = envelope.body();
  bool records = *verb == "ListRecords";
  out += "<" + *verb + ">\n";
  for (const auto& header : page.headers) {
    if (records) {
      write_record(out, store_.get_package(header.package_id));
    } else {
      write_header(out, header);
      out += "\n";
    }
  }
  if (page.next_cursor) {
    ResumptionState next{state.from, state.until, *page.next_cursor};
    out += "<resumptionToken>" + encode_resumption_token(next) + "</resumptionToken>\n";
  } else if (resumed) {
    out += "<resumptionToken/>\n";
  }
  out += "</" + *verb + ">\n";
  return envelope.finish();
}

Response Service::handle_openurl(const Params& params) const {
  auto args = single_valued(params);
  if (!args) return plain(400, "repeated OpenURL parameter");
  if (auto version = take(*args, "url_ver"); version && *version != kKevVersion) {
    return plain(400, "unsupported url_ver '" + *version + "'");
  }
  auto rft_id = take(*args, "rft_id");
  if (!rft_id || !uri::is_absolute(*rft_id)) return plain(400, "rft_id must be an absolute URI");
  auto service = take(*args, "svc_id").value_or("locate");
  auto fragment = take(*args, "fragment");
  if (service != "locate" && service != "versions" && service != "datastream") {
    return plain(400, "unknown svc_id '" + service + "'");
  }
  if (fragment && service != "datastream") return plain(400, "fragment requires svc_id=datastream");
  if (service == "datastream" && (!fragment || fragment->empty())) {
    return plain(400, "svc_id=datastream requires fragment");
  }

  auto versions = store_.resolve_content(*rft_id);
  if (versions.empty()) return plain(404, "unknown rft_id '" + *rft_id + "'");

  if (service == "versions") {
    nlohmann::ordered_json list = nlohmann::ordered_json::array();
    for (const auto& v : versions) {
      nlohmann::ordered_json entry;
      entry["package_id"] = v.package_id;
      entry["created"] = v.created.to_string();
      list.push_back(std::move(entry));
    }
    return {200, "application/json", list.dump() + "\n", {}};
  }

  if (service == "locate") {
    Response r;
    r.status = 302;
    r.content_type = "text/plain; charset=UTF-8";
    r.headers["Location"] = get_record_url(versions.front().package_id);
    r.body = r.headers["Location"] + "\n";
    return r;
  }

  for (const auto& v : versions) {
    try {
      return {200, "text/xml; charset=UTF-8", store_.get_fragment(v.package_id, *fragment), {}};
    } catch (const Error& e) {
      if (e.code() != Errc::not_found) throw;
    }
  }
  return plain(404, "no fragment '" + *fragment + "' for '" + *rft_id + "'");
}

// ---------------------------------------------------------------------------
// Server

struct Server::Impl {
  const Service& service;
  httplib::Server http;

  explicit Impl(const Service& s) : service(s) {}
};

namespace {

Params params_of(const httplib::Request& req) {
  Params params(req.params.begin(), req.params.end());
  if (req.method == "POST" && req.get_header_value("Content-Type").rfind("application/x-www-form-urlencoded", 0) == 0) {
    httplib::Params form;
    httplib::detail::parse_query_text(req.body, form);
    for (const auto& [key, value] : form) {
      bool present = false;
      auto range = params.equal_range(key);
      for (auto it = range.first; it != range.second; ++it) present = present || it->second == value;
      if (!present) params.emplace(key, value);
    }
  }
  return params;
}

}  // namespace

Server::Server(const Service& service) : impl_(std::make_unique<Impl>(service)) {
  auto oai = [this](const httplib::Request& req, httplib::Response& res) {
    res.set_content(impl_->service.handle_oai(params_of(req)), "text/xml; charset=UTF-8");
  };
  impl_->http.Get("/oai", oai);
  impl_->http.Post("/oai", oai);
  impl_->http.Get("/openurl", [this](const httplib::Request& req, httplib::Response& res) {
    auto r = impl_->service.handle_openurl(params_of(req));
    res.status = r.status;
    for (const auto& [name, value] : r.headers) res.set_header(name, value);
    res.set_content(r.body, r.content_type);
  });
  impl_->http.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
    std::string message = "internal error";
    try {
      std::rethrow_exception(ep);
    } catch (const std::exception& e) {
      message = e.what();
    } catch (...) {
    }
    res.status = 500;
    res.set_content(message + "\n", "text/plain; charset=UTF-8");
  });
}

Server::~Server() { stop(); }

int Server::bind(const std::string& host, int port) {
  int bound = port == 0 ? impl_->http.bind_to_any_port(host) : (impl_->http.bind_to_port(host, port) ? port : -1);
  if (bound < 0) throw Error(Errc::io_error, "cannot bind " + host + ":" + std::to_string(port));
  return bound;
}

void Server::listen() { impl_->http.listen_after_bind(); }

void Server::wait_until_ready() const { impl_->http.wait_until_ready(); }

void Server::stop() {
  if (impl_->http.is_running()) impl_->http.stop();
}

}  // namespace didlkit::access
