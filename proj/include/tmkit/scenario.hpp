#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

#include "tmkit/diagnostics.hpp"
#include "tmkit/model.hpp"

namespace tmkit {

struct Injection {
  std::int64_t tick = 0;
  std::string thing;
  StageRef at;  // stage kind must be create or transfer
  std::vector<std::pair<std::string, AttrValue>> attributes;
  bool operator==(const Injection&) const = default;
};

struct Scenario {
  std::vector<Injection> injections;  // sorted by tick, input order preserved
  std::int64_t max_ticks = 10000;
  bool operator==(const Scenario&) const = default;
};

struct ScenarioParseResult {
  std::optional<Scenario> scenario;
  std::vector<ParseDiagnostic> diagnostics;
  bool ok() const { return scenario.has_value(); }
};

// Line-oriented format:
//   max_ticks <N>
//   inject <tick> <Thing> at <stageref> {attr=value, ...}
// '//' starts a comment. Injections are checked against the model: the
// thing must be declared, the stage must resolve with kind create or
// transfer, and attributes must match the declared names and kinds.
ScenarioParseResult parse_scenario(std::string_view source, const Model& model);

}  // namespace tmkit
