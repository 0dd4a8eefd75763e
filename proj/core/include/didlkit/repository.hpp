#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <set>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include "didlkit/codec.hpp"
#include "didlkit/integrity.hpp"
#include "didlkit/model.hpp"
#include "didlkit/resourceio.hpp"
#include "didlkit/timestamp.hpp"

// Ingestion of asset manifests into append-only package storage.
namespace didlkit::repository {

// ---------------------------------------------------------------------------
// Manifests

enum class EmbedPolicy { by_ref, by_value, both };
std::string_view embed_policy_name(EmbedPolicy policy);

struct DatastreamSpec {
  std::string mime_type;
  // Exactly one of source_ref / source_bytes.
  std::optional<std::string> source_ref;
  std::optional<Bytes> source_bytes;
  std::optional<Timestamp> created;
  std::optional<std::string> format_id;
  std::vector<std::string> extra_locations;
  EmbedPolicy embed_policy = EmbedPolicy::by_ref;
  std::optional<std::string> compress;  // gzip or deflate, by-value copies only
};

struct MetadataBlock {
  std::string label;
  std::string xml;  // one well-formed element
};

struct AssetManifest {
  std::string content_id;
  std::vector<MetadataBlock> metadata_blocks;
  std::vector<DatastreamSpec> datastreams;

  // Schema in docs/manifest.md. Throws Error(invalid_argument).
  static AssetManifest from_json(std::string_view json);
  std::string to_json() const;
};

// ---------------------------------------------------------------------------
// Identity and time sources

class IdSource {
 public:
  virtual ~IdSource() = default;
  // Lowercase RFC 4122 version 4 UUID text.
  virtual std::string next_uuid() = 0;
};

// Seeded from std::random_device unless a seed is given.
class RandomIdSource : public IdSource {
 public:
  RandomIdSource();
  explicit RandomIdSource(std::uint64_t seed);
  std::string next_uuid() override;

 private:
  std::mutex mutex_;
  std::mt19937_64 engine_;
};

std::string format_uuid_v4(std::uint64_t high, std::uint64_t low);

using Clock = std::function<Timestamp()>;

// ---------------------------------------------------------------------------
// Package construction

struct BuildOptions {
  std::string authority = "didlkit-repo";
  codec::NamespaceTable namespaces;
  const integrity::SigningKey* key = nullptr;
};

struct BuiltPackage {
  model::DidlDocument document;
  std::string package_id;
  std::string uuid;
};

// Wraps `manifest` into a sealed package document. Throws validation_failed for
// an unusable manifest and propagates materialize errors when embedding.
BuiltPackage build_package_document(const AssetManifest& manifest, Timestamp created,
                                    IdSource& ids, resourceio::Fetcher* fetcher,
                                    const BuildOptions& options = {});

std::string package_id_for(std::string_view authority, std::string_view uuid);
// UUID part of "info:<authority>/i/<uuid>", or nullopt.
std::optional<std::string> uuid_of(std::string_view package_id);

// ---------------------------------------------------------------------------
// Store

struct ContentEntry {
  std::string content_id;
  std::string host_path;

  friend bool operator==(const ContentEntry&, const ContentEntry&) = default;
};

struct PackageHeader {
  std::string package_id;
  Timestamp created;
  std::vector<ContentEntry> content_ids;
};

struct PackageRecord {
  std::string package_id;
  Timestamp created;
  std::string document_bytes;
  std::vector<std::string> content_ids;
  std::vector<std::string> item_xml_ids;
};

struct VersionEntry {
  std::string package_id;
  Timestamp created;
  std::string host_path;

  friend bool operator==(const VersionEntry&, const VersionEntry&) = default;
};

struct Page {
  std::vector<PackageHeader> headers;
  std::optional<std::string> next_cursor;
};

enum class CommitStep { temp_written, temp_synced, renamed, indexed };

struct StoreOptions {
  BuildOptions build;
  Clock clock = [] { return Timestamp::now(); };
  std::shared_ptr<IdSource> ids = std::make_shared<RandomIdSource>();
  // fsync file, directory and index writes.
  bool durable = true;
  // Called after each commit step; throwing aborts the ingest.
  std::function<void(CommitStep)> commit_hook;
};

// Layout: <root>/packages/<uuid[0:2]>/<uuid>.didl.xml and <root>/index.log.
// One writer at a time (flock on <root>/.lock); any number of readers.
class Store {
 public:
  explicit Store(std::filesystem::path root, StoreOptions options = {});
  ~Store();
  Store(const Store&) = delete;
  Store& operator=(const Store&) = delete;

  const std::filesystem::path& root() const { return root_; }
  const StoreOptions& options() const { return options_; }

  std::string ingest(const AssetManifest& manifest, resourceio::Fetcher* fetcher = nullptr);

  PackageRecord get_package(std::string_view package_id) const;
  std::optional<PackageHeader> header(std::string_view package_id) const;
  std::vector<VersionEntry> resolve_content(std::string_view content_id) const;
  std::string get_fragment(std::string_view package_id, std::string_view xml_id) const;
  // Inclusive [from, until], ordered by (created, package_id).
  Page list_packages(std::optional<Timestamp> from, std::optional<Timestamp> until,
                     std::optional<std::string> after, std::size_t page_size) const;

  std::size_t size() const;
  std::optional<Timestamp> earliest() const;
  // Picks up index lines appended by other processes.
  void refresh();

  std::filesystem::path package_path(std::string_view uuid) const;

 private:
  struct Entry {
    PackageHeader header;
    std::string uuid;
  };

  // Applies complete index lines past index_offset_; returns the file size.
  std::uintmax_t read_index_locked();
  void apply_line(std::string_view line);
  void commit(const BuiltPackage& built, Timestamp created,
                     const std::vector<ContentEntry>& contents);

  std::filesystem::path root_;
  StoreOptions options_;
  mutable std::shared_mutex mutex_;
  std::mutex write_mutex_;
  std::uintmax_t index_offset_ = 0;
  std::map<std::string, Entry, std::less<>> packages_;
  std::set<std::pair<Timestamp, std::string>> by_created_;
  std::map<std::string, std::vector<VersionEntry>, std::less<>> by_content_;
  std::optional<Timestamp> last_created_;
};

std::string encode_cursor(Timestamp created, std::string_view package_id);
// Throws Error(bad_cursor).
std::pair<Timestamp, std::string> decode_cursor(std::string_view cursor);

}  // namespace didlkit::repository
