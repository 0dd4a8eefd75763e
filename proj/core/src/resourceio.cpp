#include "didlkit/resourceio.hpp"

#include <zlib.h>

#include <fstream>

#include "didlkit/base64.hpp"
#include "didlkit/codec.hpp"
#include "didlkit/error.hpp"
#include "didlkit/uri.hpp"
#include "httplib.h"

namespace didlkit::resourceio {

using model::Kind;
using model::Node;

// ---------------------------------------------------------------------------
// Fetchers

LocalFetcher::LocalFetcher(std::filesystem::path root, std::size_t max_bytes)
    : root_(std::move(root)), max_bytes_(max_bytes) {}

std::filesystem::path LocalFetcher::path_for(const std::string& uri) const {
  auto parts = uri::split_hierarchical(uri);
  if (!parts) throw Error(Errc::fetch_error, "not a scheme://host/path URI: " + uri);
  std::filesystem::path relative(parts->host);
  std::string_view rest = parts->path;
  while (!rest.empty()) {
    auto slash = rest.find('/');
    auto segment = uri::percent_decode(rest.substr(0, slash));
    if (segment == ".." || segment == "." || segment.find('/') != std::string::npos) {
      throw Error(Errc::fetch_error, "refusing path segment '" + segment + "' in " + uri);
    }
    if (!segment.empty()) relative /= segment;
    if (slash == std::string_view::npos) break;
    rest.remove_prefix(slash + 1);
  }
  if (parts->host == ".." || parts->host == ".") {
    throw Error(Errc::fetch_error, "refusing host segment in " + uri);
  }
  return root_ / relative;
}

Bytes LocalFetcher::fetch(const std::string& uri) {
  auto path = path_for(uri);
  std::error_code ec;
  auto size = std::filesystem::file_size(path, ec);
  if (ec || !std::filesystem::is_regular_file(path)) {
    throw Error(Errc::fetch_error, "no local copy for " + uri + " at " + path.string());
  }
  if (size > max_bytes_) throw Error(Errc::fetch_error, "size cap exceeded for " + uri);
  std::ifstream in(path, std::ios::binary);
  Bytes bytes(size);
  in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(size));
  if (!in) throw Error(Errc::fetch_error, "read failed for " + path.string());
  return bytes;
}

HttpFetcher::HttpFetcher(HttpOptions options) : options_(options) {}

Bytes HttpFetcher::fetch(const std::string& uri) {
  std::string current = uri;
  for (int hop = 0; hop <= options_.max_redirects; ++hop) {
    auto parts = uri::split_hierarchical(current);
    if (!parts || parts->scheme != "http") {
      throw Error(Errc::fetch_error, "HTTP fetcher only handles http:// URIs: " + current);
    }
    auto after_scheme = current.find("//") + 2;
    auto path_start = current.find_first_of("/?#", after_scheme);
    std::string target = path_start == std::string::npos ? "/" : current.substr(path_start);
    if (auto hash = target.find('#'); hash != std::string::npos) target.resize(hash);
    if (target.empty() || target[0] != '/') target.insert(target.begin(), '/');

    httplib::Client client("http://" + parts->host);
    client.set_follow_location(false);
    client.set_connection_timeout(options_.timeout);
    client.set_read_timeout(options_.timeout);
    client.set_write_timeout(options_.timeout);

    Bytes body;
    bool too_large = false;
    auto result = client.Get(
        target, httplib::Headers{},
        [&](const httplib::Response&) { return true; },
        [&](const char* data, std::size_t length) {
          if (body.size() + length > options_.max_bytes) {
            too_large = true;
            return false;
          }
          body.insert(body.end(), data, data + length);
          return true;
        });
    if (too_large) throw Error(Errc::fetch_error, "size cap exceeded for " + current);
    if (!result) {
      throw Error(Errc::fetch_error, "GET " + current + " failed: " + httplib::to_string(result.error()));
    }
    int status = result->status;
    if (status >= 300 && status < 400 && result->has_header("Location")) {
      auto location = result->get_header_value("Location");
      if (!location.empty() && location[0] == '/') {
        location = "http://" + parts->host + location;
      }
      current = location;
      continue;
    }
    if (status != 200) {
      throw Error(Errc::fetch_error, "GET " + current + " returned status " + std::to_string(status));
    }
    return body;
  }
  throw Error(Errc::fetch_error, "too many redirects for " + uri);
}

void ReplayFetcher::add(std::string uri, Bytes bytes) {
  std::lock_guard lock(mutex_);
  table_[std::move(uri)] = std::move(bytes);
}

Bytes ReplayFetcher::fetch(const std::string& uri) {
  std::lock_guard lock(mutex_);
  auto it = table_.find(uri);
  if (it == table_.end()) throw Error(Errc::fetch_error, "no recorded response for " + uri);
  return it->second;
}

Bytes RecordingFetcher::fetch(const std::string& uri) {
  auto bytes = inner_.fetch(uri);
  std::lock_guard lock(mutex_);
  recorded_[uri] = bytes;
  return bytes;
}

std::map<std::string, Bytes> RecordingFetcher::recorded() const {
  std::lock_guard lock(mutex_);
  return recorded_;
}

// ---------------------------------------------------------------------------
// Content encodings

namespace {

constexpr int kGzipWindow = 16 + MAX_WBITS;
constexpr int kZlibWindow = MAX_WBITS;
constexpr int kRawWindow = -MAX_WBITS;

Bytes deflate_with(ByteView bytes, int window_bits) {
  z_stream stream{};
  if (deflateInit2(&stream, Z_DEFAULT_COMPRESSION, Z_DEFLATED, window_bits, 8,
                   Z_DEFAULT_STRATEGY) != Z_OK) {
    throw Error(Errc::codec_error, "deflateInit2 failed");
  }
  Bytes out(deflateBound(&stream, static_cast<uLong>(bytes.size())));
  stream.next_in = const_cast<Bytef*>(bytes.data());
  stream.avail_in = static_cast<uInt>(bytes.size());
  stream.next_out = out.data();
  stream.avail_out = static_cast<uInt>(out.size());
  int rc = deflate(&stream, Z_FINISH);
  out.resize(stream.total_out);
  deflateEnd(&stream);
  if (rc != Z_STREAM_END) throw Error(Errc::codec_error, "deflate did not finish");
  return out;
}

// nullopt when the stream header does not match `window_bits`.
std::optional<Bytes> inflate_with(ByteView bytes, int window_bits, std::size_t max_bytes,
                                  std::string_view token) {
  z_stream stream{};
  if (inflateInit2(&stream, window_bits) != Z_OK) {
    throw Error(Errc::codec_error, "inflateInit2 failed");
  }
  stream.next_in = const_cast<Bytef*>(bytes.data());
  stream.avail_in = static_cast<uInt>(bytes.size());
  Bytes out;
  std::uint8_t chunk[64 * 1024];
  int rc = Z_OK;
  while (rc != Z_STREAM_END) {
    stream.next_out = chunk;
    stream.avail_out = sizeof chunk;
    rc = inflate(&stream, Z_NO_FLUSH);
    if (rc == Z_DATA_ERROR && stream.total_out == 0 && out.empty() && stream.total_in < 2) {
      inflateEnd(&stream);
      return std::nullopt;
    }
    if (rc != Z_OK && rc != Z_STREAM_END) {
      inflateEnd(&stream);
      if (rc == Z_BUF_ERROR) {
        throw Error(Errc::decode_error, std::string(token) + " stream is truncated");
      }
      throw Error(Errc::decode_error, std::string(token) + " stream is corrupt");
    }
    out.insert(out.end(), chunk, chunk + (sizeof chunk - stream.avail_out));
    if (out.size() > max_bytes) {
      inflateEnd(&stream);
      throw Error(Errc::decode_error, std::string(token) + " output exceeds the size cap");
    }
    if (rc == Z_OK && stream.avail_in == 0 && stream.avail_out != 0) {
      inflateEnd(&stream);
      throw Error(Errc::decode_error, std::string(token) + " stream is truncated");
    }
  }
  bool trailing = stream.avail_in != 0;
  inflateEnd(&stream);
  if (trailing) throw Error(Errc::decode_error, std::string(token) + " stream has trailing data");
  return out;
}

}  // namespace

bool is_supported_content_encoding(std::string_view token) {
  return token == "gzip" || token == "deflate";
}

Bytes encode_content(ByteView bytes, std::string_view token) {
  if (token == "gzip") return deflate_with(bytes, kGzipWindow);
  if (token == "deflate") return deflate_with(bytes, kZlibWindow);
  throw Error(Errc::unsupported_encoding, "unsupported content encoding '" + std::string(token) + "'");
}

Bytes decode_content(ByteView bytes, std::string_view token, std::size_t max_bytes) {
  if (token == "gzip") {
    auto out = inflate_with(bytes, kGzipWindow, max_bytes, token);
    if (!out) throw Error(Errc::decode_error, "gzip stream has a bad header");
    return std::move(*out);
  }
  if (token == "deflate") {
    if (auto out = inflate_with(bytes, kZlibWindow, max_bytes, token)) return std::move(*out);
    auto raw = inflate_with(bytes, kRawWindow, max_bytes, token);
    if (!raw) throw Error(Errc::decode_error, "deflate stream is corrupt");
    return std::move(*raw);
  }
  throw Error(Errc::unsupported_encoding, "unsupported content encoding '" + std::string(token) + "'");
}

// ---------------------------------------------------------------------------
// Materialization

Bytes materialize(const Node& node, Fetcher* fetcher, const MaterializeOptions& options) {
  if (node.kind != Kind::resource && node.kind != Kind::statement) {
    throw Error(Errc::invalid_argument, "only Resource and Statement payloads materialize");
  }
  const auto& payload = node.payload;
  auto provision = payload.provision();
  if (!provision) throw Error(Errc::invalid_argument, "payload has both ref and inline content");

  Bytes bytes;
  if (const auto* by_ref = std::get_if<model::ByReference>(&*provision)) {
    auto scheme = uri::scheme(by_ref->uri);
    if (!scheme) throw Error(Errc::fetch_error, "ref is not an absolute URI: " + by_ref->uri);
    if (options.non_dereferenceable.count(*scheme)) {
      throw Error(Errc::non_digital, by_ref->uri + " names a non-digital resource");
    }
    if (!fetcher) throw Error(Errc::fetch_error, "no fetcher configured for " + by_ref->uri);
    bytes = fetcher->fetch(by_ref->uri);
  } else if (const auto* text = std::get_if<model::ByValueText>(&*provision)) {
    if (payload.encoding) {
      if (*payload.encoding != "base64") {
        throw Error(Errc::unsupported_encoding, "unsupported encoding '" + *payload.encoding + "'");
      }
      auto decoded = base64::decode(text->text);
      if (!decoded) throw Error(Errc::decode_error, "payload is not valid base64");
      bytes = std::move(*decoded);
    } else {
      bytes = to_bytes(text->text);
    }
  } else {
    const auto& inline_xml = std::get<model::ByValueXml>(*provision);
    bytes = to_bytes(codec::canonical_nodes(inline_xml.nodes));
  }

  for (auto it = payload.content_encoding.rbegin(); it != payload.content_encoding.rend(); ++it) {
    bytes = decode_content(bytes, *it, options.max_bytes);
  }
  return bytes;
}

EquivalenceReport check_component_equivalence(const Node& component,
                                              const model::NodePath& component_path,
                                              Fetcher* fetcher,
                                              const MaterializeOptions& options) {
  EquivalenceReport report;
  std::optional<Bytes> first;
  for (std::size_t i = 0; i < component.children.size(); ++i) {
    const auto& child = component.children[i];
    if (child.kind != Kind::resource) continue;
    auto path = component_path.child(i).to_string();
    Bytes bytes;
    try {
      bytes = materialize(child, fetcher, options);
    } catch (const Error& e) {
      throw Error(e.code(), path + ": " + e.what());
    }
    report.digests.push_back({path, sha256_hex(bytes)});
    if (!first) {
      first = std::move(bytes);
    } else if (bytes != *first) {
      report.equivalent = false;
    }
  }
  return report;
}

Node embed_by_value(ByteView bytes, std::string mime_type, std::optional<std::string> compress) {
  Node resource;
  resource.kind = Kind::resource;
  resource.payload.mime_type = std::move(mime_type);
  resource.payload.encoding = "base64";
  if (compress) {
    auto packed = encode_content(bytes, *compress);
    resource.payload.content = base64::encode_wrapped(packed);
    resource.payload.content_encoding.push_back(*compress);
  } else {
    resource.payload.content = base64::encode_wrapped(bytes);
  }
  return resource;
}

}  // namespace didlkit::resourceio
