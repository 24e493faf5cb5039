#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "rwb/fock.hpp"
#include "rwb/verify.hpp"

namespace rwb {

struct CheckSpec {
  std::string id;
  nlohmann::json options = nlohmann::json::object();
};

/// Validated suite description. `functions` is the name -> test-function
/// binding used by expression options; names are C identifiers.
struct SuiteConfig {
  int schema = 1;
  ModelPtr model;
  RepConfig rep;
  std::map<std::string, Vec> functions;
  std::vector<CheckSpec> checks;
  std::uint64_t seed = 0;
  std::string out_path;  // empty = stdout
};

/// Known check ids in canonical execution order.
const std::vector<std::string>& known_checks();

/// Parses and validates a config document. Every diagnostic names the
/// offending field, e.g. "config error at model.flavor: ...".
SuiteConfig parse_config(const nlohmann::json& doc);

/// Canonical pairs n=1, cutoff 16, margin 4, three small dense test
/// functions, every known check with default options.
SuiteConfig default_config();

struct SuiteResult {
  nlohmann::json document;  // { schema, seed, verdict, reports: [...] }
  bool all_pass = true;
};

/// Builds the representation once, then runs the configured checks in
/// order. `only` restricts to the named ids (unknown ids are rejected).
/// A check may expand to several reports (one per element / test vector).
SuiteResult run_suite(const SuiteConfig& config,
                      const std::vector<std::string>& only = {});

}  // namespace rwb
