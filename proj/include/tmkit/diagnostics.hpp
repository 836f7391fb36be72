#pragma once

#include <string>
#include <vector>

namespace tmkit {

struct SourcePosition {
  int line = 1;    // 1-based
  int column = 1;  // 1-based
  bool operator==(const SourcePosition&) const = default;
};

enum class Severity { error, warning };

const char* to_string(Severity s);

struct ParseDiagnostic {
  Severity severity = Severity::error;
  std::string message;
  SourcePosition position;
  bool operator==(const ParseDiagnostic&) const = default;
};

// One diagnostic per line: "<line>:<col>: <severity>: <message>".
// Diagnostics come out in input order.
std::string format_diagnostics(const std::vector<ParseDiagnostic>& diags);

}  // namespace tmkit
