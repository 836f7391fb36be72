#include <random>
#include <string>

#include "doctest.h"
#include "tmkit/parser.hpp"

using namespace tmkit;

namespace {

Model parse_ok(const std::string& src) {
  ParseResult r = parse_model(src);
  INFO(format_diagnostics(r.diagnostics));
  REQUIRE(r.ok());
  return *r.model;
}

std::vector<ParseDiagnostic> parse_errors(const std::string& src) {
  ParseResult r = parse_model(src);
  REQUIRE_FALSE(r.ok());
  return r.diagnostics;
}

bool any_message_contains(const std::vector<ParseDiagnostic>& diags,
                          const std::string& needle) {
  for (const auto& d : diags)
    if (d.message.find(needle) != std::string::npos) return true;
  return false;
}

}  // namespace

TEST_CASE("empty model parses") {
  Model m = parse_ok("model M {}");
  CHECK(m.name == "M");
  CHECK(m.things.empty());
  CHECK(m.machines.empty());
  CHECK(m.flows.empty());
  CHECK(m.events.empty());
  CHECK(m.chronology.empty());
}

TEST_CASE("things, attributes and supertypes") {
  Model m = parse_ok(
      "model M {\n"
      "  thing Number;\n"
      "  thing Integer is Number { value: int; note: text; };\n"
      "}");
  REQUIRE(m.things.size() == 2);
  CHECK(m.things[0].name == "Number");
  CHECK_FALSE(m.things[0].supertype.has_value());
  CHECK(m.things[1].supertype == std::optional<std::string>("Number"));
  REQUIRE(m.things[1].attributes.size() == 2);
  CHECK(m.things[1].attributes[0].name == "value");
  CHECK(m.things[1].attributes[0].kind == AttrKind::integer);
  CHECK(m.things[1].attributes[1].kind == AttrKind::text);
}

TEST_CASE("machines nest and carry stores") {
  Model m = parse_ok(
      "model M {\n"
      "  machine Outer {\n"
      "    stage create;\n"
      "    store after create;\n"
      "    machine Inner { stage process; store after process hold; }\n"
      "  }\n"
      "}");
  REQUIRE(m.machines.size() == 1);
  const Machine& outer = m.machines[0];
  CHECK(outer.stages == std::vector<StageKind>{StageKind::create});
  REQUIRE(outer.stores.size() == 1);
  CHECK_FALSE(outer.stores[0].hold);
  REQUIRE(outer.submachines.size() == 1);
  const Machine& inner = outer.submachines[0];
  REQUIRE(inner.stores.size() == 1);
  CHECK(inner.stores[0].stage == StageKind::process);
  CHECK(inner.stores[0].hold);
}

TEST_CASE("flow paths become edges with ordinals") {
  Model m = parse_ok(
      "model M {\n"
      "  thing T;\n"
      "  machine A { stage create; stage release; stage transfer; }\n"
      "  machine B { stage transfer; }\n"
      "  flow f of T: A.create -> A.release -> A.transfer -> B.transfer;\n"
      "}");
  REQUIRE(m.flows.size() == 3);
  for (int i = 0; i < 3; ++i) {
    CHECK(m.flows[static_cast<size_t>(i)].flow_name == "f");
    CHECK(m.flows[static_cast<size_t>(i)].thing == "T");
    CHECK(m.flows[static_cast<size_t>(i)].ordinal == i);
  }
  CHECK(m.flows[0].from.key() == "A.create");
  CHECK(m.flows[2].to.key() == "B.transfer");
}

TEST_CASE("trigger with guard and delay") {
  Model m = parse_ok(
      "model M {\n"
      "  thing T { n: int; };\n"
      "  machine A { stage create; }\n"
      "  machine B { stage create; }\n"
      "  trigger t: A.create -> create T at B.create when T.n >= 3 after 7;\n"
      "}");
  REQUIRE(m.triggers.size() == 1);
  const TriggerEdge& t = m.triggers[0];
  CHECK(t.source.key() == "A.create");
  CHECK(t.action.kind == ActionKind::create_thing);
  CHECK(t.action.thing == "T");
  REQUIRE(t.guard.has_value());
  CHECK(t.guard->op == CmpOp::ge);
  CHECK(t.delay == 7);
}

TEST_CASE("delay defaults to zero") {
  Model m = parse_ok(
      "model M {\n"
      "  thing T;\n"
      "  machine A { stage create; }\n"
      "  trigger t: A.create -> delete T;\n"
      "}");
  CHECK(m.triggers[0].delay == 0);
  CHECK_FALSE(m.triggers[0].guard.has_value());
}

TEST_CASE("all six action kinds parse") {
  Model m = parse_ok(
      "model M {\n"
      "  thing T { n: int; };\n"
      "  machine A { stage create; stage process; }\n"
      "  trigger t1: A.create -> activate A.process;\n"
      "  trigger t2: A.create -> create T at A.create;\n"
      "  trigger t3: A.create -> delete T;\n"
      "  trigger t4: A.create -> set T.n = T.n + 1;\n"
      "  trigger t5: A.create -> cancel t1;\n"
      "  trigger t6: A.create -> resume T at A.process;\n"
      "}");
  REQUIRE(m.triggers.size() == 6);
  CHECK(m.triggers[0].action.kind == ActionKind::activate);
  CHECK(m.triggers[1].action.kind == ActionKind::create_thing);
  CHECK(m.triggers[2].action.kind == ActionKind::delete_thing);
  CHECK(m.triggers[3].action.kind == ActionKind::set_attr);
  CHECK(m.triggers[4].action.kind == ActionKind::cancel_trigger);
  CHECK(m.triggers[4].action.trigger == "t1");
  CHECK(m.triggers[5].action.kind == ActionKind::resume_thing);
  CHECK(m.triggers[5].action.stage.key() == "A.process");
}

TEST_CASE("set expressions honor precedence") {
  Model m = parse_ok(
      "model M {\n"
      "  thing T { a: int; b: int; };\n"
      "  machine A { stage create; }\n"
      "  trigger t: A.create -> set T.a = T.a + T.b * 2 - 1;\n"
      "}");
  // (T.a + (T.b * 2)) - 1
  ExprPtr want = make_binary_expr(
      ExprOp::sub,
      make_binary_expr(ExprOp::add, make_attr_expr({"T", "a"}),
                       make_binary_expr(ExprOp::mul, make_attr_expr({"T", "b"}),
                                        make_int_expr(2))),
      make_int_expr(1));
  CHECK(expr_equal(m.triggers[0].action.expr, want));
}

TEST_CASE("parentheses override precedence") {
  Model m = parse_ok(
      "model M {\n"
      "  thing T { a: int; };\n"
      "  machine A { stage create; }\n"
      "  trigger t: A.create -> set T.a = (T.a + 1) * 2;\n"
      "}");
  ExprPtr want = make_binary_expr(
      ExprOp::mul,
      make_binary_expr(ExprOp::add, make_attr_expr({"T", "a"}),
                       make_int_expr(1)),
      make_int_expr(2));
  CHECK(expr_equal(m.triggers[0].action.expr, want));
}

TEST_CASE("events keep element order and anchor the last one") {
  Model m = parse_ok(
      "model M {\n"
      "  thing T;\n"
      "  machine A { stage create; }\n"
      "  flow f of T: A.create -> A.create;\n"
      "  trigger t: A.create -> delete T;\n"
      "  event E \"label text\" { flow f trigger t A.create }\n"
      "}");
  REQUIRE(m.events.size() == 1);
  const Event& e = m.events[0];
  CHECK(e.label == "label text");
  REQUIRE(e.elements.size() == 3);
  CHECK(std::holds_alternative<FlowElementRef>(e.elements[0]));
  CHECK(std::holds_alternative<TriggerElementRef>(e.elements[1]));
  CHECK(e.anchor == e.elements[2]);
}

TEST_CASE("event without label gets an empty one") {
  Model m = parse_ok(
      "model M { machine A { stage create; } event E { A.create } }");
  CHECK(m.events[0].label.empty());
}

TEST_CASE("string escapes in labels") {
  Model m = parse_ok(
      "model M { machine A { stage create; }\n"
      "  event E \"a\\\"b\\\\c\\nd\" { A.create } }");
  CHECK(m.events[0].label == "a\"b\\c\nd");
}

TEST_CASE("chronology edges and branches") {
  Model m = parse_ok(
      "model M {\n"
      "  machine A { stage create; }\n"
      "  event E1 { A.create }\n"
      "  event E2 { A.create }\n"
      "  event E3 { A.create }\n"
      "  chronology { E1 -> E2; E1 -> { E2 | E3 }; }\n"
      "}");
  REQUIRE(m.chronology.edges.size() == 1);
  CHECK(m.chronology.edges[0] == std::make_pair(std::string("E1"),
                                                std::string("E2")));
  REQUIRE(m.chronology.branches.size() == 1);
  CHECK(m.chronology.branches[0].alternatives ==
        std::vector<std::string>{"E2", "E3"});
}

TEST_CASE("stage kind error names all five kinds") {
  auto diags = parse_errors("model M { machine A { stage banana; } }");
  CHECK(any_message_contains(
      diags,
      "expected stage kind (create, process, release, transfer, receive), "
      "got 'banana'"));
  // position points at the bad word, 1-based
  bool found = false;
  for (const auto& d : diags)
    if (d.position.line == 1 && d.position.column == 29) found = true;
  CHECK(found);
}

TEST_CASE("diagnostics format and order") {
  auto diags = parse_errors(
      "model M {\n"
      "  thing ;\n"
      "  flow of T: A.create -> B.create;\n"
      "}");
  REQUIRE(diags.size() >= 2);
  for (size_t i = 1; i < diags.size(); ++i) {
    CHECK(diags[i - 1].position.line <= diags[i].position.line);
  }
  std::string text = format_diagnostics(diags);
  CHECK(text.find("2:") != std::string::npos);
  CHECK(text.find(": error: ") != std::string::npos);
}

TEST_CASE("recovery reaches later statements") {
  // the bad flow is skipped up to its ';', the trigger after it still parses
  ParseResult r = parse_model(
      "model M {\n"
      "  thing T;\n"
      "  machine A { stage create; }\n"
      "  flow f of T: nonsense !! ;\n"
      "  trigger t: A.create -> delete T;\n"
      "}");
  CHECK_FALSE(r.ok());
  CHECK(r.diagnostics.size() >= 1);
  // errors in both earlier and later statements would all be reported; here
  // only the flow is bad, so exactly the one region complains
  for (const auto& d : r.diagnostics) CHECK(d.position.line == 4);
}

TEST_CASE("duplicate declarations are rejected") {
  CHECK(any_message_contains(
      parse_errors("model M { thing T; thing T; }"), "duplicate thing"));
  CHECK(any_message_contains(
      parse_errors("model M { machine A { stage create; } machine A { stage create; } }"),
      "duplicate machine"));
  CHECK(any_message_contains(
      parse_errors("model M { machine A { stage create; stage create; } }"),
      "duplicate stage"));
  CHECK(any_message_contains(
      parse_errors("model M { thing T { a: int; a: int; }; }"),
      "duplicate attribute"));
  CHECK(any_message_contains(
      parse_errors("model M { machine A { stage create; }\n"
                   "  thing T;\n"
                   "  flow f of T: A.create -> A.create;\n"
                   "  flow f of T: A.create -> A.create;\n"
                   "}"),
      "duplicate flow"));
  CHECK(any_message_contains(
      parse_errors("model M { machine A { stage create; } thing T;\n"
                   "  trigger t: A.create -> delete T;\n"
                   "  trigger t: A.create -> delete T;\n"
                   "}"),
      "duplicate trigger"));
  CHECK(any_message_contains(
      parse_errors("model M { machine A { stage create; }\n"
                   "  event E { A.create }\n"
                   "  event E { A.create }\n"
                   "}"),
      "duplicate event"));
  CHECK(any_message_contains(
      parse_errors("model M { machine A { stage create; }\n"
                   "  event E1 { A.create }\n"
                   "  event E2 { A.create }\n"
                   "  chronology { E1 -> E2; }\n"
                   "  chronology { E2 -> E1; }\n"
                   "}"),
      "duplicate chronology"));
}

TEST_CASE("stage references need a machine path") {
  auto diags = parse_errors(
      "model M { thing T; machine A { stage create; }\n"
      "  flow f of T: create -> A.create;\n"
      "}");
  CHECK_FALSE(diags.empty());
}

TEST_CASE("an event needs at least one element") {
  CHECK(any_message_contains(
      parse_errors("model M { event E { } }"), "at least one element"));
}

TEST_CASE("a branch needs two alternatives") {
  CHECK(any_message_contains(
      parse_errors("model M { machine A { stage create; }\n"
                   "  event E1 { A.create }\n"
                   "  event E2 { A.create }\n"
                   "  chronology { E1 -> { E2 }; }\n"
                   "}"),
      "at least two alternatives"));
}

TEST_CASE("oversized integers are rejected, not wrapped") {
  auto diags = parse_errors(
      "model M { thing T { a: int; }; machine A { stage create; }\n"
      "  trigger t: A.create -> set T.a = 99999999999999999999999;\n"
      "}");
  CHECK_FALSE(diags.empty());
}

TEST_CASE("the parser does no semantic checking") {
  // dangling names parse fine; validate_model owns those complaints
  Model m = parse_ok(
      "model M {\n"
      "  machine A { stage create; }\n"
      "  flow f of Ghost: A.create -> Haunted.create;\n"
      "  trigger t: Phantom.create -> delete Spectre;\n"
      "}");
  CHECK(m.flows.size() == 1);
  CHECK(m.triggers.size() == 1);
}

TEST_CASE("parsing the same source twice gives equal models") {
  std::string src =
      "model M {\n"
      "  thing T { a: int; };\n"
      "  machine A { stage create; stage process; store after process hold; }\n"
      "  flow f of T: A.create -> A.process;\n"
      "  trigger t: A.create -> set T.a = T.a * 2 when T.a < 10 after 1;\n"
      "  event E \"e\" { flow f A.process }\n"
      "}";
  CHECK(parse_ok(src) == parse_ok(src));
}

TEST_CASE("total on noise: random bytes never crash the parser") {
  std::mt19937 rng(20260814);
  std::uniform_int_distribution<int> len(0, 160);
  std::uniform_int_distribution<int> ch(32, 126);
  for (int i = 0; i < 300; ++i) {
    std::string s;
    int n = len(rng);
    for (int j = 0; j < n; ++j) {
      int c = ch(rng);
      if (c == 34 && j % 7 == 0) c = 10;  // sprinkle newlines
      s += static_cast<char>(c);
    }
    ParseResult r = parse_model(s);
    if (!r.ok()) CHECK_FALSE(r.diagnostics.empty());
  }
}

TEST_CASE("total on token soup: shuffled vocabulary never crashes") {
  static const char* kWords[] = {
      "model",  "thing",   "machine", "stage",  "store", "after", "hold",
      "flow",   "of",      "trigger", "event",  "chronology", "when",
      "create", "process", "release", "transfer", "receive", "is",
      "activate", "delete", "set", "cancel", "resume", "at",
      "A", "B", "T", "E1", "{", "}", "(", ")", ";", ":", ".", ",", "->",
      "|", "=", "==", "<=", ">=", "!=", "<", ">", "+", "-", "*", "7",
      "\"x\"", "//c\n"};
  std::mt19937 rng(7);
  std::uniform_int_distribution<size_t> pick(0, std::size(kWords) - 1);
  std::uniform_int_distribution<int> len(1, 60);
  for (int i = 0; i < 300; ++i) {
    std::string s = "model M {";
    int n = len(rng);
    for (int j = 0; j < n; ++j) {
      s += kWords[pick(rng)];
      s += ' ';
    }
    s += "}";
    parse_model(s);  // must terminate without crashing
  }
}
