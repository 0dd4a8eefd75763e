#pragma once

#include <string>
#include <string_view>

namespace didlkit::mime {

// type "/" subtype *( OWS ";" OWS attribute "=" ( token / quoted-string ) )
bool is_well_formed(std::string_view media_type);

// Lowercased "type/subtype" with parameters stripped; empty if malformed.
std::string essence(std::string_view media_type);

}  // namespace didlkit::mime
