#include <string>

#include "doctest.h"
#include "json.hpp"
#include "tmkit/corpus.hpp"
#include "tmkit/exporters.hpp"
#include "tmkit/parser.hpp"

using namespace tmkit;

namespace {

Model parse_ok(const std::string& src) {
  ParseResult r = parse_model(src);
  INFO(format_diagnostics(r.diagnostics));
  REQUIRE(r.ok());
  return *r.model;
}

size_t count_of(const std::string& hay, const std::string& needle) {
  size_t n = 0;
  for (size_t pos = hay.find(needle); pos != std::string::npos;
       pos = hay.find(needle, pos + needle.size()))
    ++n;
  return n;
}

}  // namespace

TEST_CASE("dot export draws one solid edge per flow edge, dashed per trigger") {
  for (const std::string& name : list_fixtures()) {
    Fixture f = load_fixture(name);
    std::string dot = export_dot(f.model);
    INFO(name);
    CHECK(count_of(dot, "style=solid") == f.model.flows.size());
    CHECK(count_of(dot, "style=dashed") == f.model.triggers.size());
  }
}

TEST_CASE("dot export nests clusters and marks stores") {
  Fixture f = load_fixture("ordering");
  std::string dot = export_dot(f.model);

  CHECK(dot.rfind("digraph \"Ordering\" {", 0) == 0);
  CHECK(dot.find("rankdir=LR") != std::string::npos);
  CHECK(dot.find("compound=true") != std::string::npos);
  // nested cluster paths
  CHECK(dot.find("subgraph \"cluster_Customer\"") != std::string::npos);
  CHECK(dot.find("subgraph \"cluster_Customer.Orders\"") != std::string::npos);
  // one node per declared stage, full-path ids
  CHECK(dot.find("\"Customer.Orders.create\" [label=\"create\"]") !=
        std::string::npos);
  // the three stores get double borders
  CHECK(count_of(dot, "peripheries=2") == 3);
  CHECK(dot.find("\"OrderingSystem.Fulfillment.process\" [label=\"process\", "
                 "peripheries=2]") != std::string::npos);
}

TEST_CASE("dashed edges land on sensible targets") {
  Fixture f = load_fixture("ordering");
  std::string dot = export_dot(f.model);

  // create points at its create stage
  CHECK(dot.find("\"OrderingSystem.OrderDesk.process\" -> "
                 "\"OrderingSystem.Billing.create\" [style=dashed, "
                 "label=\"issue_invoice\"]") != std::string::npos);
  // cancel points at the cancelled trigger's source
  CHECK(dot.find("\"OrderingSystem.PaymentDesk.receive\" -> "
                 "\"OrderingSystem.Billing.transfer\" [style=dashed, "
                 "label=\"stop_deadline\"]") != std::string::npos);
  // delete points at the last stop of the type's flow
  CHECK(dot.find("\"OrderingSystem.Billing.transfer\" -> "
                 "\"OrderingSystem.OrderDesk.process\" [style=dashed, "
                 "label=\"payment_deadline\\nafter 5\"]") != std::string::npos);
  // guards ride along on a second label line
  CHECK(dot.find("label=\"backorder\\nwhen Stock.count < Item.quantity\"") !=
        std::string::npos);
}

TEST_CASE("dot escapes quotes in names") {
  Model m = parse_ok("model M { machine A { stage create; } event E \"x\" { A.create } }");
  // nothing to escape here; labels with quotes only arise from events, which
  // dot export does not draw, so check the escaping helper via the digraph name
  Model weird = m;
  weird.name = "a\"b";
  std::string dot = export_dot(weird);
  CHECK(dot.find("digraph \"a\\\"b\"") != std::string::npos);
}

TEST_CASE("json export carries the schema version and sorts keys") {
  Fixture f = load_fixture("sun_warmth");
  std::string text = export_json(f.model);
  nlohmann::json j = nlohmann::json::parse(text);
  CHECK(j["tm_schema"] == 1);
  CHECK(j["model"] == "SunWarmth");
  CHECK(j["things"][0]["supertype"].is_null());
  CHECK(j["flows"][0]["name"] == "warmth_flow");
  CHECK(j["flows"][0]["path"].size() == 6);
  CHECK(text.back() == '\n');
}

TEST_CASE("json export and import round-trip byte-identically") {
  for (const std::string& name : list_fixtures()) {
    Fixture f = load_fixture(name);
    std::string once = export_json(f.model);
    Model back = import_json(once);
    std::string twice = export_json(back);
    INFO(name);
    CHECK(once == twice);
    CHECK(back == f.model);
  }
}

TEST_CASE("json import rejects wrong schema versions with a path") {
  Fixture f = load_fixture("sun_warmth");
  nlohmann::json j = nlohmann::json::parse(export_json(f.model));
  j["tm_schema"] = 99;
  try {
    import_json(j.dump());
    FAIL("expected JsonImportError");
  } catch (const JsonImportError& e) {
    CHECK(std::string(e.what()).find("$.tm_schema") != std::string::npos);
  }
}

TEST_CASE("json import pinpoints structural problems") {
  Fixture f = load_fixture("sun_warmth");
  nlohmann::json good = nlohmann::json::parse(export_json(f.model));

  nlohmann::json no_things = good;
  no_things.erase("things");
  CHECK_THROWS_AS(import_json(no_things.dump()), JsonImportError);

  nlohmann::json bad_stage = good;
  bad_stage["flows"][0]["path"][0] = "Sun.banana";
  try {
    import_json(bad_stage.dump());
    FAIL("expected JsonImportError");
  } catch (const JsonImportError& e) {
    CHECK(std::string(e.what()).find("$.flows[0]") != std::string::npos);
  }

  nlohmann::json bad_delay = good;
  bad_delay["triggers"] = nlohmann::json::array();
  bad_delay["triggers"].push_back(
      {{"name", "t"},
       {"source", "Sun.create"},
       {"guard", nullptr},
       {"delay", "soon"},
       {"action", {{"kind", "delete"}, {"thing", "Warmth"}}}});
  CHECK_THROWS_AS(import_json(bad_delay.dump()), JsonImportError);

  CHECK_THROWS_AS(import_json("{ not json"), JsonImportError);
}

TEST_CASE("render_dsl emits a reparsable canonical form") {
  for (const std::string& name : list_fixtures()) {
    Fixture f = load_fixture(name);
    std::string text = render_dsl(f.model);
    ParseResult r = parse_model(text);
    INFO(name << "\n" << text);
    REQUIRE(r.ok());
    // structure preserving and a fixpoint on the second pass
    CHECK(*r.model == f.model);
    CHECK(render_dsl(*r.model) == text);
  }
}

TEST_CASE("render_dsl of an empty model") {
  Model m;
  m.name = "M";
  CHECK(render_dsl(m) == "model M {\n}\n");
}

TEST_CASE("render_dsl keeps stores, guards, delays and anchors") {
  Fixture f = load_fixture("ordering");
  std::string text = render_dsl(f.model);
  CHECK(text.find("store after process hold;") != std::string::npos);
  CHECK(text.find("when Stock.count >= Item.quantity") != std::string::npos);
  CHECK(text.find("after 5;") != std::string::npos);
  CHECK(text.find("E2 -> { E3 | E4 };") != std::string::npos);
  // E2's anchor is its stage, rendered after the other elements
  size_t fpos = text.find("trigger payment_deadline\n");
  size_t apos = text.find("OrderingSystem.Billing.transfer\n  }");
  CHECK(fpos != std::string::npos);
  CHECK(apos != std::string::npos);
}

TEST_CASE("render_dsl quotes label escapes") {
  Model m = parse_ok(
      "model M { machine A { stage create; }\n"
      "  event E \"a\\\"b\\\\c\\nd\" { A.create } }");
  std::string text = render_dsl(m);
  ParseResult r = parse_model(text);
  REQUIRE(r.ok());
  CHECK(r.model->events[0].label == "a\"b\\c\nd");
}
