#include "tmkit/corpus.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "tmkit/parser.hpp"

namespace fs = std::filesystem;

namespace tmkit {

namespace {

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

// One whitespace-separated token list per file line; blank lines skipped.
std::vector<std::string> words(const std::string& text) {
  std::istringstream in(text);
  std::vector<std::string> out;
  std::string w;
  while (in >> w) out.push_back(w);
  return out;
}

std::vector<std::string> lines(const std::string& text) {
  std::istringstream in(text);
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' '))
      line.pop_back();
    if (!line.empty()) out.push_back(line);
  }
  return out;
}

}  // namespace

std::string corpus_dir() {
  if (const char* env = std::getenv("TM_CORPUS_DIR"); env && *env) return env;
  return TMKIT_CORPUS_DIR;
}

Fixture load_fixture(const std::string& name) {
  fs::path dir = corpus_dir();
  fs::path model_path = dir / (name + ".tm");
  if (!fs::exists(model_path))
    throw std::runtime_error("no fixture named '" + name + "' in " +
                             dir.string());

  Fixture f;
  f.name = name;
  f.path = model_path.string();
  f.source = slurp(model_path);
  ParseResult parsed = parse_model(f.source);
  if (!parsed.ok())
    throw std::runtime_error("fixture '" + name + "' does not parse:\n" +
                             format_diagnostics(parsed.diagnostics));
  f.model = std::move(*parsed.model);

  std::string prefix = name + ".";
  for (const auto& entry : fs::directory_iterator(dir)) {
    std::string file = entry.path().filename().string();
    if (file.rfind(prefix, 0) != 0) continue;
    std::string rest = file.substr(prefix.size());
    if (rest == "expected.codes") {
      f.expected_codes = lines(slurp(entry.path()));
    } else if (rest == "expected.dot") {
      f.expected_dot = slurp(entry.path());
    } else if (auto dot = rest.rfind(".scenario");
               dot != std::string::npos && dot + 9 == rest.size() && dot > 0) {
      f.scenarios[rest.substr(0, dot)] = slurp(entry.path());
    } else if (auto ev = rest.rfind(".expected.events");
               ev != std::string::npos && ev + 16 == rest.size() && ev > 0) {
      f.expected_events[rest.substr(0, ev)] = words(slurp(entry.path()));
    }
  }
  return f;
}

std::vector<std::string> list_fixtures() {
  fs::path dir = corpus_dir();
  std::vector<std::string> names;
  if (!fs::exists(dir)) return names;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().extension() != ".tm") continue;
    names.push_back(entry.path().stem().string());
  }
  std::sort(names.begin(), names.end());
  return names;
}

}  // namespace tmkit
