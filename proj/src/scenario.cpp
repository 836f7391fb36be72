#include "tmkit/scenario.hpp"

#include <algorithm>
#include <cctype>
#include <string>

namespace tmkit {

namespace {

const Attribute* declared_attribute(const Model& m, const std::string& thing,
                                    const std::string& attr) {
  for (const auto& t : m.ancestry(thing)) {
    const ThingType* tt = m.find_thing(t);
    if (!tt) continue;
    for (const auto& a : tt->attributes)
      if (a.name == attr) return &a;
  }
  return nullptr;
}

class LineCursor {
 public:
  LineCursor(std::string_view line, int line_no,
             std::vector<ParseDiagnostic>& diags)
      : line_(line), line_no_(line_no), diags_(diags) {}

  void skip_space() {
    while (i_ < line_.size() &&
           std::isspace(static_cast<unsigned char>(line_[i_])))
      ++i_;
  }

  bool done() {
    skip_space();
    return i_ >= line_.size();
  }

  SourcePosition here() const {
    return {line_no_, static_cast<int>(i_) + 1};
  }

  bool peek_is(char c) {
    skip_space();
    return i_ < line_.size() && line_[i_] == c;
  }

  bool eat(char c) {
    if (!peek_is(c)) return false;
    ++i_;
    return true;
  }

  std::string word() {
    skip_space();
    std::string w;
    while (i_ < line_.size() &&
           (std::isalnum(static_cast<unsigned char>(line_[i_])) ||
            line_[i_] == '_'))
      w += line_[i_++];
    return w;
  }

  std::optional<std::int64_t> integer() {
    skip_space();
    size_t start = i_;
    std::string digits;
    if (i_ < line_.size() && line_[i_] == '-') digits += line_[i_++];
    while (i_ < line_.size() &&
           std::isdigit(static_cast<unsigned char>(line_[i_])))
      digits += line_[i_++];
    if (digits.empty() || digits == "-") {
      i_ = start;
      return std::nullopt;
    }
    return std::stoll(digits);
  }

  std::optional<std::string> quoted() {
    skip_space();
    if (i_ >= line_.size() || line_[i_] != '"') return std::nullopt;
    ++i_;
    std::string out;
    while (i_ < line_.size() && line_[i_] != '"') {
      char c = line_[i_++];
      if (c == '\\' && i_ < line_.size()) {
        char esc = line_[i_++];
        if (esc == 'n')
          out += '\n';
        else
          out += esc;
      } else {
        out += c;
      }
    }
    if (i_ >= line_.size()) {
      error("unterminated string");
      return std::nullopt;
    }
    ++i_;
    return out;
  }

  std::optional<StageRef> stage_ref() {
    std::vector<std::string> parts;
    parts.push_back(word());
    if (parts.back().empty()) {
      error("expected stage reference");
      return std::nullopt;
    }
    while (eat('.')) {
      parts.push_back(word());
      if (parts.back().empty()) {
        error("expected identifier after '.'");
        return std::nullopt;
      }
    }
    if (parts.size() < 2) {
      error("stage reference needs a machine path");
      return std::nullopt;
    }
    auto kind = stage_kind_from(parts.back());
    if (!kind) {
      error("expected stage kind (create, process, release, transfer, "
            "receive), got '" + parts.back() + "'");
      return std::nullopt;
    }
    StageRef ref;
    ref.stage = *kind;
    parts.pop_back();
    ref.machine_path = std::move(parts);
    return ref;
  }

  void error(std::string msg) {
    diags_.push_back({Severity::error, std::move(msg), here()});
  }

 private:
  std::string_view line_;
  int line_no_;
  size_t i_ = 0;
  std::vector<ParseDiagnostic>& diags_;
};

}  // namespace

ScenarioParseResult parse_scenario(std::string_view source,
                                   const Model& model) {
  ScenarioParseResult result;
  Scenario scenario;
  bool saw_max_ticks = false;

  int line_no = 0;
  size_t pos = 0;
  while (pos <= source.size()) {
    size_t nl = source.find('\n', pos);
    std::string_view line = source.substr(
        pos, nl == std::string_view::npos ? source.size() - pos : nl - pos);
    pos = nl == std::string_view::npos ? source.size() + 1 : nl + 1;
    ++line_no;

    if (auto slash = line.find("//"); slash != std::string_view::npos)
      line = line.substr(0, slash);

    LineCursor cur(line, line_no, result.diagnostics);
    if (cur.done()) continue;
    std::string head = cur.word();
    if (head == "max_ticks") {
      auto n = cur.integer();
      if (!n || *n < 0) {
        cur.error("max_ticks needs a non-negative tick count");
        continue;
      }
      if (saw_max_ticks) {
        cur.error("duplicate max_ticks line");
        continue;
      }
      saw_max_ticks = true;
      scenario.max_ticks = *n;
    } else if (head == "inject") {
      Injection inj;
      auto tick = cur.integer();
      if (!tick || *tick < 0) {
        cur.error("inject needs a non-negative tick");
        continue;
      }
      inj.tick = *tick;
      inj.thing = cur.word();
      if (inj.thing.empty()) {
        cur.error("inject needs a thing name");
        continue;
      }
      const ThingType* tt = model.find_thing(inj.thing);
      if (!tt) {
        cur.error("unknown thing '" + inj.thing + "'");
        continue;
      }
      if (cur.word() != "at") {
        cur.error("expected 'at' after the thing name");
        continue;
      }
      auto at = cur.stage_ref();
      if (!at) continue;
      inj.at = *at;
      StageResolution res = resolve_stage(model, inj.at);
      if (!res.ok()) {
        cur.error(res.error);
        continue;
      }
      if (inj.at.stage != StageKind::create &&
          inj.at.stage != StageKind::transfer) {
        cur.error("things can only be injected at a create or transfer "
                  "stage, not '" + std::string(to_string(inj.at.stage)) + "'");
        continue;
      }
      if (cur.eat('{')) {
        bool bad = false;
        while (!cur.peek_is('}') && !cur.done()) {
          std::string name = cur.word();
          if (name.empty() || !cur.eat('=')) {
            cur.error("expected attr=value");
            bad = true;
            break;
          }
          const Attribute* decl = declared_attribute(model, inj.thing, name);
          if (!decl) {
            cur.error("thing '" + inj.thing + "' has no attribute '" + name +
                      "'");
            bad = true;
            break;
          }
          if (decl->kind == AttrKind::integer) {
            auto v = cur.integer();
            if (!v) {
              cur.error("attribute '" + name + "' needs an integer value");
              bad = true;
              break;
            }
            inj.attributes.emplace_back(name, AttrValue{*v});
          } else {
            auto v = cur.quoted();
            if (!v) {
              cur.error("attribute '" + name + "' needs a quoted text value");
              bad = true;
              break;
            }
            inj.attributes.emplace_back(name, AttrValue{*v});
          }
          if (!cur.eat(',')) break;
        }
        if (bad) continue;
        if (!cur.eat('}')) {
          cur.error("expected '}' after attributes");
          continue;
        }
      }
      if (!cur.done()) {
        cur.error("trailing input after injection");
        continue;
      }
      scenario.injections.push_back(std::move(inj));
    } else {
      cur.error("expected 'max_ticks' or 'inject', got '" + head + "'");
    }
  }

  for (const auto& d : result.diagnostics)
    if (d.severity == Severity::error) return result;

  std::stable_sort(scenario.injections.begin(), scenario.injections.end(),
                   [](const Injection& a, const Injection& b) {
                     return a.tick < b.tick;
                   });
  result.scenario = std::move(scenario);
  return result;
}

}  // namespace tmkit
