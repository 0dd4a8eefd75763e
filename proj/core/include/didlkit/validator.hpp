#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "didlkit/model.hpp"
#include "didlkit/resourceio.hpp"

// Rules a DIDL document must satisfy beyond what the parser enforces.
namespace didlkit::validator {

enum class Severity { error, warning };
enum class Mode { shallow, deep };

std::string_view severity_name(Severity severity);
std::string_view mode_name(Mode mode);

struct Rule {
  std::string id;
  Severity severity;
  std::string description;
  Mode mode;
};

// R1..R10, R6b and W1 in natural id order.
const std::vector<Rule>& rule_catalog();

// Natural ordering of rule ids: R2 < R6 < R6b < R9 < R9-FETCH < R10 < W1.
bool rule_id_less(std::string_view a, std::string_view b);

struct Finding {
  std::string rule;
  Severity severity;
  std::string node_path;
  std::string message;
};

struct Report {
  std::vector<Finding> findings;  // by (document order, rule id)
  bool passed = true;

  std::size_t count(Severity severity) const;
  bool has_rule(std::string_view rule) const;
};

struct Options {
  // Deep rules (R9) run only when a fetcher is supplied.
  resourceio::Fetcher* fetcher = nullptr;
  // Report warnings as errors.
  bool strict = false;
  resourceio::MaterializeOptions materialize;
};

Report validate(const model::DidlDocument& doc, const Options& options = {});

// One line per finding: "<severity> <rule> <path> <message>".
std::string to_text(const Report& report);
// {"passed": bool, "findings": [{"rule", "severity", "path", "message"}]}
std::string to_json(const Report& report);

}  // namespace didlkit::validator
