#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace didlkit {

enum class Errc {
  invalid_argument,
  invalid_uri,
  not_found,
  bad_target,
  malformed_identifier,
  fetch_error,
  decode_error,
  unsupported_encoding,
  non_digital,
  equivalence_violation,
  validation_failed,
  id_collision,
  bad_cursor,
  io_error,
  codec_error,
  key_error,
};

std::string_view to_string(Errc code) noexcept;

// Single exception type for the library; `code()` carries the contract error name.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace didlkit
