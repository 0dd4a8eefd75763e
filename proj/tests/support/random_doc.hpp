#pragma once

#include <cstdint>
#include <random>
#include <string>

#include "didlkit/bytes.hpp"
#include "didlkit/model.hpp"

namespace testsupport {

using Rng = std::mt19937_64;

didlkit::Bytes random_bytes(Rng& rng, std::size_t size);
// Printable text with markup-significant characters and non-ASCII letters,
// never whitespace-only.
std::string random_text(Rng& rng, std::size_t max_length);

// A document that parses and passes shallow validation: unique IDs, valid
// containment, one mimeType per Component, resolvable Annotation targets.
didlkit::model::DidlDocument random_document(Rng& rng);

}  // namespace testsupport
