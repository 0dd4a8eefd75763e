#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace didlkit::uri {

// RFC 3986 absolute URI: scheme ":" hier-part, optional query and fragment.
// Rejects whitespace, control characters and characters outside the URI set.
bool is_absolute(std::string_view text);

// Lowercased scheme, or nullopt when `text` has no valid scheme.
std::optional<std::string> scheme(std::string_view text);

struct Hierarchical {
  std::string scheme;
  std::string host;
  std::string path;  // without leading '/', query and fragment stripped
};

// Splits `scheme://host/path`; nullopt for URIs without an authority.
std::optional<Hierarchical> split_hierarchical(std::string_view text);

std::string percent_encode(std::string_view text);
std::string percent_decode(std::string_view text);

}  // namespace didlkit::uri
