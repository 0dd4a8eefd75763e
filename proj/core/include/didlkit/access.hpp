#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <string>
#include <string_view>

#include "didlkit/repository.hpp"

// HTTP access to a Store: an OAI-PMH 2.0 subset keyed by package identifier
// and an OpenURL (Z39.88-2004 KEV) resolver keyed by content identifier.
namespace didlkit::access {

inline constexpr std::string_view kMetadataPrefix = "didl";

// Decoded query or form parameters; repeated keys are kept.
using Params = std::multimap<std::string, std::string>;

struct ServiceConfig {
  std::string base_url = "http://localhost:8080";
  std::string repository_name = "didlkit repository";
  std::string admin_email = "admin@localhost";
  std::size_t page_size = 100;
  repository::Clock clock = [] { return Timestamp::now(); };
};

struct Response {
  int status = 200;
  std::string content_type;
  std::string body;
  std::map<std::string, std::string> headers;
};

class Service {
 public:
  Service(const repository::Store& store, ServiceConfig config);

  const ServiceConfig& config() const { return config_; }

  // Always an OAI-PMH envelope; protocol errors are reported in-band.
  std::string handle_oai(const Params& params) const;
  Response handle_openurl(const Params& params) const;

  std::string get_record_url(std::string_view package_id) const;

 private:
  const repository::Store& store_;
  ServiceConfig config_;
};

// Resumption tokens carry the harvest window and the store cursor.
struct ResumptionState {
  std::optional<Timestamp> from;
  std::optional<Timestamp> until;
  std::string cursor;
};
std::string encode_resumption_token(const ResumptionState& state);
// Throws Error(bad_cursor).
ResumptionState decode_resumption_token(std::string_view token);

// Thread-pooled HTTP front end serving GET/POST /oai and GET /openurl.
class Server {
 public:
  explicit Server(const Service& service);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  // Port 0 picks a free port. Returns the bound port; throws io_error.
  int bind(const std::string& host, int port);
  // Blocks until stop().
  void listen();
  // Returns once listen() accepts connections.
  void wait_until_ready() const;
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace didlkit::access
