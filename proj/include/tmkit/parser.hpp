#pragma once

#include <optional>
#include <string_view>

#include "tmkit/diagnostics.hpp"
#include "tmkit/model.hpp"

namespace tmkit {

struct ParseResult {
  std::optional<Model> model;  // engaged iff no error diagnostics
  std::vector<ParseDiagnostic> diagnostics;

  bool ok() const { return model.has_value(); }
};

// Parses DSL text. Total: any input yields either a model or error
// diagnostics, never a crash. Recovery skips to the next ';' after a
// syntax error so several problems surface in one pass. The parser does
// no semantic checking; ill-formed graphs parse cleanly and are caught
// by validate_model.
ParseResult parse_model(std::string_view source);

}  // namespace tmkit
