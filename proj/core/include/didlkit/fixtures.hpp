#pragma once

#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "didlkit/bytes.hpp"
#include "didlkit/model.hpp"
#include "didlkit/resourceio.hpp"

// Golden corpus: transcribed listings plus mutants of the table9 document.
namespace didlkit::fixtures {

enum class Expectation { parse_ok, rule_finding, fatal };
std::string_view expectation_name(Expectation e);

struct Expected {
  Expectation kind = Expectation::parse_ok;
  std::string code;  // rule id or fatal parse code; empty for parse_ok
};

struct FixtureEntry {
  std::string name;    // "table9", "mutant-table9-drop-mimetype"
  std::string file;    // path below the fixtures directory
  std::string source;  // "listing:table9" or "mutant:table9/drop-mimetype"
  bool standalone_entity = false;
  // Deep validation (with fixture_fetcher) is needed to see the outcome.
  bool deep = false;
  Expected expected;
};

const std::vector<FixtureEntry>& catalog();
const FixtureEntry& entry(std::string_view name);  // throws not_found

// Throws Error(not_found) for names outside the catalog.
std::string load_fixture(std::string_view name);
// Raw file below the fixtures directory, e.g. "payloads/015997845.pdf".
Bytes load_file(std::string_view path);

// Serves the purl locations referenced by the listings from payloads/.
std::unique_ptr<resourceio::Fetcher> fixture_fetcher();

// A model-level edit of the table9 document predicted to raise one rule.
struct MutationOperator {
  std::string name;
  std::string rule;
  bool deep = false;
  std::function<void(model::DidlDocument&)> apply;
};

const std::vector<MutationOperator>& mutation_operators();
model::DidlDocument base_document();  // table9, parsed
model::DidlDocument mutate(const MutationOperator& op);
// Serialized mutant as shipped under fixtures/mutants/.
std::string mutant_bytes(const MutationOperator& op);

// Catalog as shipped in fixtures/index.json.
std::string index_json();

}  // namespace didlkit::fixtures
