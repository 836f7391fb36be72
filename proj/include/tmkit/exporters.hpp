#pragma once

#include <stdexcept>
#include <string>

#include "tmkit/model.hpp"

namespace tmkit {

// Graphviz document: one cluster per machine (nested), one node per
// declared stage named "<machine path>.<stage>", solid edges for flow
// edges labeled with the thing name and colored per thing declaration
// index, dashed edges for triggers labeled with name plus guard/delay.
// Output is canonical: declaration order only.
std::string export_dot(const Model& model);

class JsonImportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Canonical JSON (sorted keys, declaration-ordered arrays) with a
// "tm_schema": 1 version field. See docs/schema.md.
std::string export_json(const Model& model);

// Strict: schema-version mismatch, missing fields, and dangling references
// throw JsonImportError with the offending JSON path.
Model import_json(const std::string& text);

// Regenerates DSL text that parses back to an equal model.
std::string render_dsl(const Model& model);

}  // namespace tmkit
