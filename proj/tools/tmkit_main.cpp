#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "tmkit/corpus.hpp"
#include "tmkit/events.hpp"
#include "tmkit/exporters.hpp"
#include "tmkit/parser.hpp"
#include "tmkit/scenario.hpp"
#include "tmkit/simulator.hpp"
#include "tmkit/validator.hpp"

namespace {

bool use_color() {
  const char* c = std::getenv("TM_COLOR");
  return c && std::string(c) == "1";
}

std::string paint(const std::string& text, const char* code) {
  if (!use_color()) return text;
  return std::string("\033[") + code + "m" + text + "\033[0m";
}

bool read_file(const std::string& path, std::string& out) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return false;
  std::ostringstream buf;
  buf << in.rdbuf();
  out = buf.str();
  return true;
}

bool write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) return false;
  out << content;
  return static_cast<bool>(out.flush());
}

void print_diagnostics(const std::vector<tmkit::ParseDiagnostic>& diags) {
  for (const auto& d : diags) {
    const char* sev = tmkit::to_string(d.severity);
    std::cout << d.position.line << ':' << d.position.column << ": "
              << paint(sev, d.severity == tmkit::Severity::error ? "31" : "33")
              << ": " << d.message << '\n';
  }
}

void print_report(const tmkit::ValidationReport& report) {
  for (const auto& v : report.violations)
    std::cout << paint(v.code, "33") << ' ' << v.element << ": " << v.message
              << '\n';
  if (report.ok()) std::cout << paint("ok", "32") << '\n';
}

int load_model(const std::string& path, tmkit::Model& model) {
  std::string src;
  if (!read_file(path, src)) {
    std::cerr << "tmkit: cannot read " << path << '\n';
    return 4;
  }
  tmkit::ParseResult parsed = tmkit::parse_model(src);
  if (!parsed.ok()) {
    print_diagnostics(parsed.diagnostics);
    return 2;
  }
  model = std::move(*parsed.model);
  return 0;
}

int emit(const std::string& content, const std::string& out_path) {
  if (out_path.empty() || out_path == "-") {
    std::cout << content;
    return 0;
  }
  if (!write_file(out_path, content)) {
    std::cerr << "tmkit: cannot write " << out_path << '\n';
    return 4;
  }
  return 0;
}

std::string chronology_line(const tmkit::Model& model,
                            const std::vector<std::string>& sequence,
                            bool& violated) {
  violated = false;
  if (model.chronology.empty()) return "chronology: none";
  tmkit::ChronologyCheck check = tmkit::check_chronology(model, sequence);
  if (check.ok) return "chronology: ok";
  violated = true;
  return "chronology: violation at (" + check.violation->first + "," +
         check.violation->second + ")";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Thinging Machine toolkit"};
  app.require_subcommand(1);

  std::string model_path;
  std::string check_format = "text";
  std::string render_format = "dot";
  std::string scenario_path;
  std::string trace_path;
  std::string trace_json_path;
  std::string out_path;
  bool want_events = false;

  CLI::App* check = app.add_subcommand("check", "Parse and validate a model");
  check->add_option("model", model_path, "model file")->required();
  check->add_option("--format", check_format, "text or json")
      ->check(CLI::IsMember({"text", "json"}));

  CLI::App* render = app.add_subcommand("render", "Export a model");
  render->add_option("model", model_path, "model file")->required();
  render->add_option("--format", render_format, "dot, json or dsl")
      ->check(CLI::IsMember({"dot", "json", "dsl"}));
  render->add_option("--out", out_path, "output file, default stdout");

  CLI::App* simulate = app.add_subcommand("simulate", "Run a scenario");
  simulate->add_option("model", model_path, "model file")->required();
  simulate->add_option("--scenario", scenario_path, "scenario file")
      ->required();
  simulate->add_option("--trace", trace_path, "write a TSV trace ('-' for stdout)");
  simulate->add_option("--trace-json", trace_json_path, "write a JSON trace");
  simulate->add_flag("--events", want_events,
                     "append the recognized event sequence");

  CLI::App* events =
      app.add_subcommand("events", "List declared events and chronology");
  events->add_option("model", model_path, "model file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 4;
  }

  tmkit::Model model;
  if (int rc = load_model(model_path, model); rc != 0) return rc;

  if (check->parsed()) {
    tmkit::ValidationReport report = tmkit::validate_model(model);
    if (check_format == "json")
      std::cout << tmkit::report_to_json(report);
    else
      print_report(report);
    return report.ok() ? 0 : 1;
  }

  if (render->parsed()) {
    std::string content;
    if (render_format == "dot")
      content = tmkit::export_dot(model);
    else if (render_format == "json")
      content = tmkit::export_json(model);
    else
      content = tmkit::render_dsl(model);
    return emit(content, out_path);
  }

  if (simulate->parsed()) {
    tmkit::ValidationReport report = tmkit::validate_model(model);
    if (!report.ok()) {
      print_report(report);
      std::cerr << "tmkit: model does not validate; not simulating\n";
      return 1;
    }
    std::string scenario_src;
    if (!read_file(scenario_path, scenario_src)) {
      std::cerr << "tmkit: cannot read " << scenario_path << '\n';
      return 4;
    }
    tmkit::ScenarioParseResult sc = tmkit::parse_scenario(scenario_src, model);
    if (!sc.ok()) {
      print_diagnostics(sc.diagnostics);
      return 2;
    }
    tmkit::Trace trace;
    try {
      trace = tmkit::simulate(model, *sc.scenario);
    } catch (const tmkit::SimulationError& e) {
      std::cout << paint("error", "31") << ": " << e.what() << '\n';
      return 3;
    }
    if (!trace_path.empty())
      if (int rc = emit(tmkit::trace_to_tsv(trace), trace_path); rc != 0)
        return rc;
    if (!trace_json_path.empty())
      if (int rc = emit(tmkit::trace_to_json(trace), trace_json_path); rc != 0)
        return rc;
    for (const auto& [thing, c] : tmkit::token_census(trace))
      std::cout << thing << ": created=" << c.created
                << " deleted=" << c.deleted << " exited=" << c.exited
                << " live=" << c.live << '\n';
    if (want_events) {
      std::vector<std::string> seq = tmkit::recognize_events(trace, model);
      std::cout << "events:";
      for (const auto& id : seq) std::cout << ' ' << id;
      std::cout << '\n';
      bool violated = false;
      std::cout << chronology_line(model, seq, violated) << '\n';
      if (violated) return 1;
    }
    return 0;
  }

  // events listing
  for (const auto& ev : model.events) {
    std::cout << ev.id;
    if (!ev.label.empty()) std::cout << ": " << ev.label;
    std::cout << '\n';
    for (const auto& el : ev.elements)
      std::cout << "  " << tmkit::event_element_to_string(el)
                << (el == ev.anchor ? "  (anchor)" : "") << '\n';
  }
  for (const auto& [from, to] : model.chronology.edges)
    std::cout << from << " -> " << to << '\n';
  for (const auto& br : model.chronology.branches) {
    std::cout << br.from << " -> {";
    for (size_t i = 0; i < br.alternatives.size(); ++i)
      std::cout << (i ? " | " : " ") << br.alternatives[i];
    std::cout << " }\n";
  }
  return 0;
}
