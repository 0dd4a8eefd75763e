#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "didlkit/bytes.hpp"
#include "didlkit/model.hpp"

// Turning Resource and Statement payloads into octets.
namespace didlkit::resourceio {

inline constexpr std::size_t kDefaultMaxBytes = std::size_t{256} << 20;

// fetch() returns the bytes behind `uri` or throws Error(fetch_error).
// Implementations are safe for concurrent calls.
class Fetcher {
 public:
  virtual ~Fetcher() = default;
  virtual Bytes fetch(const std::string& uri) = 0;
};

// Maps `scheme://host/path` to `<root>/host/path`.
class LocalFetcher : public Fetcher {
 public:
  explicit LocalFetcher(std::filesystem::path root, std::size_t max_bytes = kDefaultMaxBytes);
  Bytes fetch(const std::string& uri) override;
  std::filesystem::path path_for(const std::string& uri) const;

 private:
  std::filesystem::path root_;
  std::size_t max_bytes_;
};

struct HttpOptions {
  std::size_t max_bytes = kDefaultMaxBytes;
  std::chrono::seconds timeout{30};
  int max_redirects = 5;
};

// Plain-http GET with manual redirect following and a streaming size cap.
class HttpFetcher : public Fetcher {
 public:
  explicit HttpFetcher(HttpOptions options = {});
  Bytes fetch(const std::string& uri) override;

 private:
  HttpOptions options_;
};

// Serves a fixed uri -> bytes table.
class ReplayFetcher : public Fetcher {
 public:
  ReplayFetcher() = default;
  explicit ReplayFetcher(std::map<std::string, Bytes> table) : table_(std::move(table)) {}
  void add(std::string uri, Bytes bytes);
  Bytes fetch(const std::string& uri) override;

 private:
  mutable std::mutex mutex_;
  std::map<std::string, Bytes> table_;
};

// Forwards to `inner` and keeps every successful response.
class RecordingFetcher : public Fetcher {
 public:
  explicit RecordingFetcher(Fetcher& inner) : inner_(inner) {}
  Bytes fetch(const std::string& uri) override;
  std::map<std::string, Bytes> recorded() const;
  ReplayFetcher replay() const { return ReplayFetcher(recorded()); }

 private:
  Fetcher& inner_;
  mutable std::mutex mutex_;
  std::map<std::string, Bytes> recorded_;
};

// ---------------------------------------------------------------------------
// Content encodings

bool is_supported_content_encoding(std::string_view token);  // gzip, deflate
Bytes encode_content(ByteView bytes, std::string_view token);
// Throws decode_error on corrupt or truncated input, unsupported_encoding on
// unknown tokens. Output larger than `max_bytes` is a decode_error.
Bytes decode_content(ByteView bytes, std::string_view token,
                     std::size_t max_bytes = kDefaultMaxBytes);

// ---------------------------------------------------------------------------
// Materialization

struct MaterializeOptions {
  // By-reference URIs with these schemes name non-digital things.
  std::set<std::string> non_dereferenceable{"urn"};
  std::size_t max_bytes = kDefaultMaxBytes;
};

// Bytes of a Resource or Statement in its declared MIME type. `fetcher` may
// be null when the payload is inline.
Bytes materialize(const model::Node& payload_node, Fetcher* fetcher,
                  const MaterializeOptions& options = {});

struct ResourceDigest {
  std::string node_path;
  std::string sha256_hex;
};

struct EquivalenceReport {
  bool equivalent = true;
  std::vector<ResourceDigest> digests;
};

// Materializes every Resource of `component`. Errors are rethrown with the
// failing resource's path in the message.
EquivalenceReport check_component_equivalence(const model::Node& component,
                                              const model::NodePath& component_path,
                                              Fetcher* fetcher,
                                              const MaterializeOptions& options = {});

// Inline base64 Resource; `compress` (gzip or deflate) is applied first.
model::Node embed_by_value(ByteView bytes, std::string mime_type,
                           std::optional<std::string> compress = std::nullopt);

}  // namespace didlkit::resourceio
