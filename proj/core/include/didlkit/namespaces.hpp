#pragma once

#include <string_view>

namespace didlkit::ns {

inline constexpr std::string_view kDidl = "urn:mpeg:mpeg21:2002:02-DIDL-NS";
inline constexpr std::string_view kDii = "urn:mpeg:mpeg21:2002:01-DII-NS";
inline constexpr std::string_view kRel = "urn:mpeg:mpeg21:2003:01-REL-R-NS";
inline constexpr std::string_view kDefaultExt = "http://library.lanl.gov/2005-08/aDORe/DIDLextension/";
inline constexpr std::string_view kDsig = "http://www.w3.org/2000/09/xmldsig#";
inline constexpr std::string_view kDc = "http://purl.org/dc/elements/1.1/";
inline constexpr std::string_view kDcTerms = "http://purl.org/dc/terms/";
inline constexpr std::string_view kOaiDc = "http://www.openarchives.org/OAI/2.0/oai_dc/";
inline constexpr std::string_view kOai = "http://www.openarchives.org/OAI/2.0/";
inline constexpr std::string_view kDiadm = "http://library.lanl.gov/2004-01/STB-RL/DIADM";
inline constexpr std::string_view kIntegrity = "urn:x-didlkit:integrity:1";

inline constexpr std::string_view kXmlStatementMime = "text/xml; charset=UTF-8";

}  // namespace didlkit::ns
