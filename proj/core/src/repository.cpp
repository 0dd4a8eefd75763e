#include "didlkit/repository.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <sstream>

#include "didlkit/base64.hpp"
#include "didlkit/dii.hpp"
#include "didlkit/error.hpp"
#include "didlkit/mime.hpp"
#include "didlkit/namespaces.hpp"
#include "didlkit/uri.hpp"
#include "didlkit/validator.hpp"
#include "json.hpp"

namespace didlkit::repository {

using model::Kind;
using model::Node;
namespace fs = std::filesystem;

std::string_view embed_policy_name(EmbedPolicy policy) {
  switch (policy) {
    case EmbedPolicy::by_ref: return "by-ref";
    case EmbedPolicy::by_value: return "by-value";
    case EmbedPolicy::both: return "both";
  }
  return {};
}

// ---------------------------------------------------------------------------
// Manifest JSON

namespace {

[[noreturn]] void bad_manifest(const std::string& message) {
  throw Error(Errc::invalid_argument, "manifest: " + message);
}

std::string string_field(const nlohmann::json& j, const char* key, const std::string& where) {
  if (!j.contains(key) || !j[key].is_string()) bad_manifest(where + "." + key + " must be a string");
  return j[key].get<std::string>();
}

std::optional<std::string> optional_string(const nlohmann::json& j, const char* key,
                                           const std::string& where) {
  if (!j.contains(key) || j[key].is_null()) return std::nullopt;
  return string_field(j, key, where);
}

}  // namespace

AssetManifest AssetManifest::from_json(std::string_view text) {
  auto j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) bad_manifest("not a JSON object");
  AssetManifest m;
  m.content_id = string_field(j, "content_id", "manifest");
  if (j.contains("metadata")) {
    if (!j["metadata"].is_array()) bad_manifest("metadata must be an array");
    for (std::size_t i = 0; i < j["metadata"].size(); ++i) {
      const auto& block = j["metadata"][i];
      auto where = "metadata[" + std::to_string(i) + "]";
      if (!block.is_object()) bad_manifest(where + " must be an object");
      m.metadata_blocks.push_back(
          {optional_string(block, "label", where).value_or(""), string_field(block, "xml", where)});
    }
  }
  if (j.contains("datastreams")) {
    if (!j["datastreams"].is_array()) bad_manifest("datastreams must be an array");
    for (std::size_t i = 0; i < j["datastreams"].size(); ++i) {
      const auto& d = j["datastreams"][i];
      auto where = "datastreams[" + std::to_string(i) + "]";
      if (!d.is_object()) bad_manifest(where + " must be an object");
      DatastreamSpec spec;
      spec.mime_type = string_field(d, "mime_type", where);
      if (!d.contains("source") || !d["source"].is_object()) bad_manifest(where + ".source must be an object");
      const auto& source = d["source"];
      auto swhere = where + ".source";
      int given = 0;
      if (auto ref = optional_string(source, "ref", swhere)) {
        spec.source_ref = *ref;
        ++given;
      }
      if (auto b64 = optional_string(source, "base64", swhere)) {
        auto bytes = base64::decode(*b64);
        if (!bytes) bad_manifest(swhere + ".base64 is not valid base64");
        spec.source_bytes = std::move(*bytes);
        ++given;
      }
      if (auto text_value = optional_string(source, "text", swhere)) {
        spec.source_bytes = to_bytes(*text_value);
        ++given;
      }
      if (given != 1) bad_manifest(swhere + " needs exactly one of ref, base64, text");
      if (auto created = optional_string(d, "created", where)) {
        spec.created = Timestamp::parse(*created);
        if (!spec.created) bad_manifest(where + ".created is not an RFC 3339 date-time");
      }
      spec.format_id = optional_string(d, "format_id", where);
      if (d.contains("extra_locations")) {
        if (!d["extra_locations"].is_array()) bad_manifest(where + ".extra_locations must be an array");
        for (const auto& loc : d["extra_locations"]) {
          if (!loc.is_string()) bad_manifest(where + ".extra_locations entries must be strings");
          spec.extra_locations.push_back(loc.get<std::string>());
        }
      }
      auto embed = optional_string(d, "embed", where).value_or("by-ref");
      if (embed == "by-ref") {
        spec.embed_policy = EmbedPolicy::by_ref;
      } else if (embed == "by-value") {
        spec.embed_policy = EmbedPolicy::by_value;
      } else if (embed == "both") {
        spec.embed_policy = EmbedPolicy::both;
      } else {
        bad_manifest(where + ".embed must be by-ref, by-value or both");
      }
      spec.compress = optional_string(d, "compress", where);
      m.datastreams.push_back(std::move(spec));
    }
  }
  return m;
}

std::string AssetManifest::to_json() const {
  nlohmann::ordered_json j;
  j["content_id"] = content_id;
  j["metadata"] = nlohmann::ordered_json::array();
  for (const auto& block : metadata_blocks) {
    nlohmann::ordered_json b;
    b["label"] = block.label;
    b["xml"] = block.xml;
    j["metadata"].push_back(std::move(b));
  }
  j["datastreams"] = nlohmann::ordered_json::array();
  for (const auto& d : datastreams) {
    nlohmann::ordered_json s;
    s["mime_type"] = d.mime_type;
    nlohmann::ordered_json source;
    if (d.source_ref) source["ref"] = *d.source_ref;
    if (d.source_bytes) source["base64"] = base64::encode(*d.source_bytes);
    s["source"] = std::move(source);
    if (d.created) s["created"] = d.created->to_string();
    if (d.format_id) s["format_id"] = *d.format_id;
    if (!d.extra_locations.empty()) s["extra_locations"] = d.extra_locations;
    s["embed"] = embed_policy_name(d.embed_policy);
    if (d.compress) s["compress"] = *d.compress;
    j["datastreams"].push_back(std::move(s));
  }
  return j.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Identifiers

std::string format_uuid_v4(std::uint64_t high, std::uint64_t low) {
  high = (high & 0xFFFFFFFFFFFF0FFFULL) | 0x0000000000004000ULL;
  low = (low & 0x3FFFFFFFFFFFFFFFULL) | 0x8000000000000000ULL;
  char buffer[37];
  std::snprintf(buffer, sizeof buffer, "%08x-%04x-%04x-%04x-%012llx",
                static_cast<unsigned>(high >> 32), static_cast<unsigned>((high >> 16) & 0xFFFF),
                static_cast<unsigned>(high & 0xFFFF), static_cast<unsigned>(low >> 48),
                static_cast<unsigned long long>(low & 0xFFFFFFFFFFFFULL));
  return buffer;
}

RandomIdSource::RandomIdSource() {
  std::random_device device;
  std::seed_seq seq{device(), device(), device(), device(), device(), device()};
  engine_.seed(seq);
}

RandomIdSource::RandomIdSource(std::uint64_t seed) : engine_(seed) {}

std::string RandomIdSource::next_uuid() {
  std::lock_guard lock(mutex_);
  auto high = engine_();
  auto low = engine_();
  return format_uuid_v4(high, low);
}

std::string package_id_for(std::string_view authority, std::string_view uuid) {
  return "info:" + std::string(authority) + "/i/" + std::string(uuid);
}

std::optional<std::string> uuid_of(std::string_view package_id) {
  if (package_id.substr(0, 5) != "info:") return std::nullopt;
  auto marker = package_id.rfind("/i/");
  if (marker == std::string_view::npos) return std::nullopt;
  auto uuid = package_id.substr(marker + 3);
  if (uuid.size() != 36) return std::nullopt;
  for (std::size_t i = 0; i < uuid.size(); ++i) {
    char c = uuid[i];
    bool dash = i == 8 || i == 13 || i == 18 || i == 23;
    if (dash ? c != '-' : !((c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'))) return std::nullopt;
  }
  return std::string(uuid);
}

// ---------------------------------------------------------------------------
// Package construction

namespace {

[[noreturn]] void invalid(const std::string& message) {
  throw Error(Errc::validation_failed, message);
}

void check_manifest(const AssetManifest& m) {
  if (!uri::is_absolute(m.content_id)) invalid("content_id '" + m.content_id + "' is not an absolute URI");
  if (m.datastreams.empty() && m.metadata_blocks.empty()) {
    invalid("manifest has no datastream and no metadata block");
  }
  for (std::size_t i = 0; i < m.datastreams.size(); ++i) {
    const auto& d = m.datastreams[i];
    auto where = "datastream " + std::to_string(i) + ": ";
    if (!mime::is_well_formed(d.mime_type)) invalid(where + "malformed mime type '" + d.mime_type + "'");
    if (d.source_ref.has_value() == d.source_bytes.has_value()) {
      invalid(where + "needs exactly one source");
    }
    if (d.source_ref && !uri::is_absolute(*d.source_ref)) {
      invalid(where + "source '" + *d.source_ref + "' is not an absolute URI");
    }
    if (d.embed_policy != EmbedPolicy::by_value && !d.source_ref) {
      invalid(where + std::string(embed_policy_name(d.embed_policy)) + " needs a source URI");
    }
    for (const auto& loc : d.extra_locations) {
      if (!uri::is_absolute(loc)) invalid(where + "extra location '" + loc + "' is not an absolute URI");
    }
    if (d.compress && !resourceio::is_supported_content_encoding(*d.compress)) {
      invalid(where + "unsupported compression '" + *d.compress + "'");
    }
    if (d.format_id && !uri::is_absolute(*d.format_id)) {
      invalid(where + "format_id '" + *d.format_id + "' is not an absolute URI");
    }
  }
}

xml::Element text_element(std::string_view ns, std::string local, std::string text) {
  xml::Element e;
  e.name = {std::string(ns), std::move(local)};
  e.children.emplace_back(std::move(text));
  return e;
}

Node admin_descriptor(const DatastreamSpec& d) {
  xml::Element admin;
  admin.name = {std::string(ns::kDiadm), "Admin"};
  if (d.format_id) admin.children.emplace_back(text_element(ns::kDc, "format", *d.format_id));
  if (d.created) {
    admin.children.emplace_back(text_element(ns::kDcTerms, "created", d.created->to_string()));
  }
  return model::make_descriptor(
      {model::make_statement_xml(std::string(ns::kXmlStatementMime), {xml::Node(std::move(admin))})});
}

Node metadata_descriptor(const MetadataBlock& block) {
  auto parsed = xml::parse(block.xml);
  if (parsed.error) {
    invalid("metadata block '" + block.label + "' is not well-formed XML: " + parsed.error->message);
  }
  return model::make_descriptor({model::make_statement_xml(std::string(ns::kXmlStatementMime),
                                                           {xml::Node(std::move(*parsed.root))})});
}

}  // namespace

BuiltPackage build_package_document(const AssetManifest& manifest, Timestamp created,
                                    IdSource& ids, resourceio::Fetcher* fetcher,
                                    const BuildOptions& options) {
  check_manifest(manifest);
  BuiltPackage built;
  built.uuid = ids.next_uuid();
  built.package_id = package_id_for(options.authority, built.uuid);

  integrity::SealOptions seal;
  seal.key = options.key;
  seal.signed_at = created;

  Node item = model::make_item({dii::identifier_descriptor(manifest.content_id)});
  item.xml_id = "uuid-" + ids.next_uuid();
  for (const auto& block : manifest.metadata_blocks) item.children.push_back(metadata_descriptor(block));

  for (const auto& d : manifest.datastreams) {
    Node component = model::make_component({});
    component.xml_id = "uuid-" + ids.next_uuid();
    if (d.format_id || d.created) component.children.push_back(admin_descriptor(d));

    bool by_ref = d.embed_policy != EmbedPolicy::by_value;
    bool by_value = d.embed_policy != EmbedPolicy::by_ref;
    if (by_ref) component.children.push_back(model::make_resource_ref(d.mime_type, *d.source_ref));
    for (const auto& loc : d.extra_locations) {
      component.children.push_back(model::make_resource_ref(d.mime_type, loc));
    }

    std::optional<Bytes> bytes = d.source_bytes;
    if (!bytes && (by_value || fetcher)) {
      if (!fetcher) throw Error(Errc::fetch_error, "no fetcher to embed " + *d.source_ref);
      bytes = fetcher->fetch(*d.source_ref);
    }
    if (by_value) component.children.push_back(resourceio::embed_by_value(*bytes, d.mime_type, d.compress));
    if (bytes) component = integrity::seal_component_digest(component, sha256_hex(*bytes), seal);
    item.children.push_back(std::move(component));
  }

  model::DidlDocument doc;
  doc.document_id = built.package_id;
  doc.document_created = created;
  doc.root_entities.push_back(std::move(item));
  built.document = integrity::seal_document(doc, seal);

  auto report = validator::validate(built.document);
  if (!report.passed) invalid("package document fails validation:\n" + validator::to_text(report));
  return built;
}

// ---------------------------------------------------------------------------
// Cursors

std::string encode_cursor(Timestamp created, std::string_view package_id) {
  return base64::encode_url(as_bytes(created.to_string() + "|" + std::string(package_id)));
}

std::pair<Timestamp, std::string> decode_cursor(std::string_view cursor) {
  auto bytes = base64::decode_url(cursor);
  if (!bytes || cursor.empty()) throw Error(Errc::bad_cursor, "malformed cursor");
  auto plain = to_string(*bytes);
  auto bar = plain.find('|');
  if (bar == std::string::npos || bar + 1 == plain.size()) throw Error(Errc::bad_cursor, "malformed cursor");
  auto stamp = plain.substr(0, bar);
  auto created = Timestamp::parse(stamp);
  if (!created || created->to_string() != stamp) throw Error(Errc::bad_cursor, "malformed cursor timestamp");
  return {*created, plain.substr(bar + 1)};
}

// ---------------------------------------------------------------------------
// Store

namespace {

[[noreturn]] void io_failure(const std::string& what) {
  throw Error(Errc::io_error, what + ": " + std::strerror(errno));
}

class FileLock {
 public:
  explicit FileLock(const fs::path& path) {
    fd_ = ::open(path.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
    if (fd_ < 0) io_failure("open " + path.string());
    while (::flock(fd_, LOCK_EX) != 0) {
      if (errno != EINTR) {
        ::close(fd_);
        io_failure("flock " + path.string());
      }
    }
  }
  ~FileLock() {
    ::flock(fd_, LOCK_UN);
    ::close(fd_);
  }
  FileLock(const FileLock&) = delete;
  FileLock& operator=(const FileLock&) = delete;

 private:
  int fd_ = -1;
};

void write_all(int fd, std::string_view data, const std::string& what) {
  while (!data.empty()) {
    auto n = ::write(fd, data.data(), data.size());
    if (n < 0) {
      if (errno == EINTR) continue;
      io_failure("write " + what);
    }
    data.remove_prefix(static_cast<std::size_t>(n));
  }
}

void sync_fd(int fd, const std::string& what) {
  if (::fsync(fd) != 0) io_failure("fsync " + what);
}

void sync_directory(const fs::path& dir) {
  int fd = ::open(dir.c_str(), O_RDONLY | O_DIRECTORY | O_CLOEXEC);
  if (fd < 0) io_failure("open " + dir.string());
  int rc = ::fsync(fd);
  ::close(fd);
  if (rc != 0) io_failure("fsync " + dir.string());
}

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> out;
  while (true) {
    auto cut = text.find(sep);
    out.push_back(text.substr(0, cut));
    if (cut == std::string_view::npos) break;
    text.remove_prefix(cut + 1);
  }
  return out;
}

bool version_order(const VersionEntry& a, const VersionEntry& b) {
  if (a.created != b.created) return a.created > b.created;
  return a.package_id < b.package_id;
}

}  // namespace

Store::Store(fs::path root, StoreOptions options) : root_(std::move(root)), options_(std::move(options)) {
  std::error_code ec;
  fs::create_directories(root_ / "packages", ec);
  if (ec) throw Error(Errc::io_error, "cannot create store at " + root_.string() + ": " + ec.message());
  if (!options_.ids) options_.ids = std::make_shared<RandomIdSource>();
  if (!options_.clock) options_.clock = [] { return Timestamp::now(); };
  refresh();
}

Store::~Store() = default;

fs::path Store::package_path(std::string_view uuid) const {
  return root_ / "packages" / std::string(uuid.substr(0, 2)) / (std::string(uuid) + ".didl.xml");
}

void Store::refresh() {
  std::unique_lock lock(mutex_);
  read_index_locked();
}

std::uintmax_t Store::read_index_locked() {
  auto path = root_ / "index.log";
  std::ifstream in(path, std::ios::binary);
  if (!in) return index_offset_;
  in.seekg(0, std::ios::end);
  auto size = static_cast<std::uintmax_t>(in.tellg());
  if (size <= index_offset_) return size;
  in.seekg(static_cast<std::streamoff>(index_offset_));
  std::string tail(size - index_offset_, '\0');
  in.read(tail.data(), static_cast<std::streamsize>(tail.size()));
  std::size_t consumed = 0;
  while (true) {
    auto newline = tail.find('\n', consumed);
    if (newline == std::string::npos) break;
    apply_line(std::string_view(tail).substr(consumed, newline - consumed));
    consumed = newline + 1;
  }
  index_offset_ += consumed;
  return size;
}

void Store::apply_line(std::string_view line) {
  auto fields = split(line, '\t');
  if (fields.size() < 2) return;
  auto created = Timestamp::parse(fields[0]);
  auto uuid = uuid_of(fields[1]);
  if (!created || !uuid) return;
  std::string package_id(fields[1]);
  if (packages_.count(package_id)) return;
  Entry entry;
  entry.uuid = *uuid;
  entry.header.package_id = package_id;
  entry.header.created = *created;
  for (std::size_t i = 2; i < fields.size(); ++i) {
    auto space = fields[i].find(' ');
    ContentEntry content{std::string(fields[i].substr(0, space)),
                         space == std::string_view::npos ? "/" : std::string(fields[i].substr(space + 1))};
    auto& versions = by_content_[content.content_id];
    bool seen = std::any_of(versions.begin(), versions.end(),
                            [&](const VersionEntry& v) { return v.package_id == package_id; });
    if (!seen) {
      VersionEntry version{package_id, *created, content.host_path};
      versions.insert(std::upper_bound(versions.begin(), versions.end(), version, version_order),
                      version);
    }
    entry.header.content_ids.push_back(std::move(content));
  }
  by_created_.emplace(*created, package_id);
  if (!last_created_ || *created > *last_created_) last_created_ = *created;
  packages_.emplace(package_id, std::move(entry));
}

std::string Store::ingest(const AssetManifest& manifest, resourceio::Fetcher* fetcher) {
  std::lock_guard writer(write_mutex_);
  FileLock file_lock(root_ / ".lock");

  std::uintmax_t index_size;
  Timestamp created;
  {
    std::unique_lock lock(mutex_);
    index_size = read_index_locked();
    created = options_.clock();
    if (last_created_ && created < *last_created_) created = *last_created_;
  }
  if (index_size > index_offset_) {
    // A torn trailing line from an interrupted writer is not part of the index.
    fs::resize_file(root_ / "index.log", index_offset_);
  }

  auto built = build_package_document(manifest, created, *options_.ids, fetcher, options_.build);
  {
    std::shared_lock lock(mutex_);
    if (packages_.count(built.package_id) || fs::exists(package_path(built.uuid))) {
      throw Error(Errc::id_collision, "package id " + built.package_id + " already exists");
    }
  }

  std::vector<ContentEntry> contents;
  try {
    for (const auto& id : dii::extract_identifiers(built.document)) {
      contents.push_back({id.value, id.host.to_string()});
    }
  } catch (const Error& e) {
    throw Error(Errc::validation_failed, e.what());
  }

  commit(built, created, contents);
  return built.package_id;
}

void Store::commit(const BuiltPackage& built, Timestamp created,
                   const std::vector<ContentEntry>& contents) {
  codec::SerializeOptions serialize;
  serialize.namespaces = options_.build.namespaces;
  auto bytes = codec::canonical_bytes(built.document, serialize);

  auto target = package_path(built.uuid);
  auto dir = target.parent_path();
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(Errc::io_error, "cannot create " + dir.string() + ": " + ec.message());
  auto temp = dir / ("." + built.uuid + ".tmp");
  auto hook = [&](CommitStep step) {
    if (options_.commit_hook) options_.commit_hook(step);
  };

  int fd = ::open(temp.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
  if (fd < 0) io_failure("open " + temp.string());
  try {
    write_all(fd, bytes, temp.string());
    hook(CommitStep::temp_written);
    if (options_.durable) sync_fd(fd, temp.string());
    ::close(fd);
    fd = -1;
    hook(CommitStep::temp_synced);
  } catch (...) {
    if (fd >= 0) ::close(fd);
    fs::remove(temp, ec);
    throw;
  }
  if (::rename(temp.c_str(), target.c_str()) != 0) {
    fs::remove(temp, ec);
    io_failure("rename " + temp.string());
  }
  if (options_.durable) sync_directory(dir);
  hook(CommitStep::renamed);

  std::string line = created.to_string() + '\t' + built.package_id;
  for (const auto& c : contents) line += '\t' + c.content_id + ' ' + c.host_path;
  line += '\n';
  auto index = root_ / "index.log";
  int index_fd = ::open(index.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
  if (index_fd < 0) io_failure("open " + index.string());
  try {
    write_all(index_fd, line, index.string());
    if (options_.durable) sync_fd(index_fd, index.string());
  } catch (...) {
    ::close(index_fd);
    throw;
  }
  ::close(index_fd);
  if (options_.durable) sync_directory(root_);

  {
    std::unique_lock lock(mutex_);
    read_index_locked();
  }
  hook(CommitStep::indexed);
}

std::optional<PackageHeader> Store::header(std::string_view package_id) const {
  std::shared_lock lock(mutex_);
  auto it = packages_.find(package_id);
  if (it == packages_.end()) return std::nullopt;
  return it->second.header;
}

PackageRecord Store::get_package(std::string_view package_id) const {
  Entry entry;
  {
    std::shared_lock lock(mutex_);
    auto it = packages_.find(package_id);
    if (it == packages_.end()) throw Error(Errc::not_found, "no package " + std::string(package_id));
    entry = it->second;
  }
  auto path = package_path(entry.uuid);
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io_error, "package file missing: " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();

  PackageRecord record;
  record.package_id = entry.header.package_id;
  record.created = entry.header.created;
  record.document_bytes = buffer.str();
  for (const auto& c : entry.header.content_ids) {
    if (std::find(record.content_ids.begin(), record.content_ids.end(), c.content_id) ==
        record.content_ids.end()) {
      record.content_ids.push_back(c.content_id);
    }
  }
  auto parsed = codec::parse_didl(record.document_bytes, options_.build.namespaces);
  if (parsed.document) {
    model::visit(*parsed.document, [&](const Node& node, const model::NodePath&, const Node*) {
      if (node.kind == Kind::item && node.xml_id) record.item_xml_ids.push_back(*node.xml_id);
    });
  }
  return record;
}

std::vector<VersionEntry> Store::resolve_content(std::string_view content_id) const {
  std::shared_lock lock(mutex_);
  auto it = by_content_.find(content_id);
  if (it == by_content_.end()) return {};
  return it->second;
}

std::string Store::get_fragment(std::string_view package_id, std::string_view xml_id) const {
  auto record = get_package(package_id);
  auto parsed = codec::parse_didl(record.document_bytes, options_.build.namespaces);
  if (!parsed.document) throw Error(Errc::io_error, "stored package does not parse: " + record.package_id);
  auto found = model::find_by_id(*parsed.document, xml_id);
  if (!found) {
    throw Error(Errc::not_found, "no element with id '" + std::string(xml_id) + "' in " + record.package_id);
  }
  codec::SerializeOptions serialize;
  serialize.namespaces = options_.build.namespaces;
  return codec::serialize_entity(*found->node, serialize);
}

Page Store::list_packages(std::optional<Timestamp> from, std::optional<Timestamp> until,
                          std::optional<std::string> after, std::size_t page_size) const {
  if (page_size == 0) throw Error(Errc::invalid_argument, "page size must be positive");
  if (from && until && *from > *until) throw Error(Errc::invalid_argument, "from is after until");
  std::optional<std::pair<Timestamp, std::string>> start;
  if (after) start = decode_cursor(*after);

  std::shared_lock lock(mutex_);
  auto it = by_created_.begin();
  if (from) it = by_created_.lower_bound({*from, std::string{}});
  if (start && (it == by_created_.end() || !(*start < *it))) it = by_created_.upper_bound(*start);
  Page page;
  for (; it != by_created_.end(); ++it) {
    if (until && it->first > *until) break;
    if (page.headers.size() == page_size) {
      const auto& last = page.headers.back();
      page.next_cursor = encode_cursor(last.created, last.package_id);
      break;
    }
    page.headers.push_back(packages_.find(it->second)->second.header);
  }
  return page;
}

std::size_t Store::size() const {
  std::shared_lock lock(mutex_);
  return packages_.size();
}

std::optional<Timestamp> Store::earliest() const {
  std::shared_lock lock(mutex_);
  if (by_created_.empty()) return std::nullopt;
  return by_created_.begin()->first;
}

}  // namespace didlkit::repository
