#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tmkit/model.hpp"

namespace tmkit {

struct Fixture {
  std::string name;
  std::string path;            // model file
  std::string source;          // model text
  Model model;                 // parsed (all fixtures parse cleanly)
  std::map<std::string, std::string> scenarios;             // name -> text
  std::map<std::string, std::vector<std::string>> expected_events;
  std::vector<std::string> expected_codes;  // for invalid_* fixtures
  std::optional<std::string> expected_dot;
};

// Root of the bundled fixture corpus: $TM_CORPUS_DIR if set, else the
// build-time default.
std::string corpus_dir();

// Loads "<name>.tm" plus sidecar "<name>.<scenario>.scenario" and
// "<name>[.<scenario>].expected.*" files. Throws std::runtime_error for an
// unknown name or an unparseable fixture.
Fixture load_fixture(const std::string& name);

// Fixture names present in the corpus directory, sorted.
std::vector<std::string> list_fixtures();

}  // namespace tmkit
