#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "ccplan/scenario.hpp"

namespace ccplan {

/// Schema violation; the message carries the JSON path of the offending field.
struct ScenarioParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Parses and validates a scenario document. Unknown keys are rejected.
/// The returned scenario carries its canonical serialization.
Scenario parse_scenario(const std::string& text);

/// Reads, parses and validates a scenario file.
Scenario load_scenario(const std::string& path);

/// Canonical (sorted-key, compact) serialization; parse/serialize round
/// trips are byte-identical regardless of input key order.
std::string serialize_scenario(const Scenario& scenario);

/// FNV-1a 64-bit hash as a hex string; used to tie result files to the
/// scenario they were computed from.
std::string fnv1a_hex(const std::string& text);

/// Hash of the scenario's canonical form.
std::string scenario_hash(const Scenario& scenario);

}  // namespace ccplan
