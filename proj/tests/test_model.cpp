#include <stdexcept>

#include "doctest.h"
#include "tmkit/corpus.hpp"
#include "tmkit/parser.hpp"

using namespace tmkit;

namespace {

Model numbers_model() {
  ParseResult r = parse_model(
      "model Numbers {\n"
      "  thing Number;\n"
      "  thing Integer is Number { value: int; };\n"
      "  thing Real is Number;\n"
      "  machine Src { stage create; stage release; }\n"
      "  machine Sink { stage receive; stage process; }\n"
      "  flow integer_flow of Integer: Src.create -> Src.release;\n"
      "  flow real_flow of Real: Src.create -> Src.release;\n"
      "  flow number_flow of Number: Sink.receive -> Sink.process;\n"
      "}");
  REQUIRE(r.ok());
  return *r.model;
}

}  // namespace

TEST_CASE("stage keys join the machine path and kind") {
  StageRef ref{{"Customer", "Orders"}, StageKind::create};
  CHECK(ref.key() == "Customer.Orders.create");
}

TEST_CASE("resolve_stage walks nested machines") {
  ParseResult r = parse_model(
      "model M {\n"
      "  machine Outer {\n"
      "    machine Inner { stage process; }\n"
      "    stage create;\n"
      "  }\n"
      "}");
  REQUIRE(r.ok());
  const Model& m = *r.model;

  StageResolution ok = resolve_stage(m, {{"Outer", "Inner"}, StageKind::process});
  REQUIRE(ok.ok());
  CHECK(ok.machine->name == "Inner");

  StageResolution root = resolve_stage(m, {{"Outer"}, StageKind::create});
  CHECK(root.ok());

  StageResolution miss = resolve_stage(m, {{"Outer", "Wrong"}, StageKind::create});
  CHECK_FALSE(miss.ok());
  CHECK(miss.error.find("no machine named 'Wrong'") != std::string::npos);

  StageResolution badstage = resolve_stage(m, {{"Outer"}, StageKind::receive});
  CHECK_FALSE(badstage.ok());
  CHECK(badstage.error.find("does not declare stage 'receive'") !=
        std::string::npos);

  StageResolution empty = resolve_stage(m, {{}, StageKind::create});
  CHECK_FALSE(empty.ok());
}

TEST_CASE("ancestry lists self first and follows supertypes") {
  Model m = numbers_model();
  CHECK(m.ancestry("Integer") == std::vector<std::string>{"Integer", "Number"});
  CHECK(m.ancestry("Number") == std::vector<std::string>{"Number"});
  CHECK(m.is_a("Integer", "Integer"));
  CHECK(m.is_a("Integer", "Number"));
  CHECK_FALSE(m.is_a("Number", "Integer"));
  CHECK_FALSE(m.is_a("Integer", "Real"));
}

TEST_CASE("ancestry tolerates supertype cycles before validation") {
  ParseResult r = parse_model("model M { thing A is B; thing B is A; }");
  REQUIRE(r.ok());
  CHECK(r.model->ancestry("A") == std::vector<std::string>{"A", "B"});
  CHECK(r.model->is_a("B", "A"));
}

TEST_CASE("flow_subgraph includes edges of subtypes") {
  Model m = numbers_model();
  CHECK(flow_subgraph(m, "Integer").size() == 1);
  CHECK(flow_subgraph(m, "Real").size() == 1);
  // Number picks up its own flow plus both subtype flows
  CHECK(flow_subgraph(m, "Number").size() == 3);
  CHECK_THROWS_AS(flow_subgraph(m, "Ghost"), std::invalid_argument);
}

TEST_CASE("corpus flow subgraph sizes") {
  Fixture ordering = load_fixture("ordering");
  CHECK(flow_subgraph(ordering.model, "Order").size() == 5);
  CHECK(flow_subgraph(ordering.model, "Supply").size() == 4);

  Fixture numbers = load_fixture("number_machine");
  CHECK(flow_subgraph(numbers.model, "Number").size() == 9);
  CHECK(flow_subgraph(numbers.model, "Integer").size() == 4);
}

TEST_CASE("machine declares and store_for") {
  ParseResult r = parse_model(
      "model M { machine A { stage create; store after create hold; } }");
  REQUIRE(r.ok());
  const Machine& a = r.model->machines[0];
  CHECK(a.declares(StageKind::create));
  CHECK_FALSE(a.declares(StageKind::process));
  REQUIRE(a.store_for(StageKind::create) != nullptr);
  CHECK(a.store_for(StageKind::create)->hold);
  CHECK(a.store_for(StageKind::process) == nullptr);
}

TEST_CASE("model lookup helpers") {
  Fixture f = load_fixture("ordering");
  const Model& m = f.model;
  CHECK(m.find_thing("Order") != nullptr);
  CHECK(m.find_thing("Nothing") == nullptr);
  CHECK(m.find_trigger("backorder") != nullptr);
  CHECK(m.find_event("E7") != nullptr);
  CHECK(m.has_flow("supply_flow"));
  CHECK_FALSE(m.has_flow("lava_flow"));
  std::vector<std::string> names = m.flow_names();
  REQUIRE(names.size() == 6);
  CHECK(names.front() == "order_flow");
  CHECK(names.back() == "supply_flow");
}

TEST_CASE("event element text forms") {
  CHECK(event_element_to_string(EventElement{FlowElementRef{"f"}}) == "flow f");
  CHECK(event_element_to_string(EventElement{TriggerElementRef{"t"}}) ==
        "trigger t");
  CHECK(event_element_to_string(
            EventElement{StageRef{{"A", "B"}, StageKind::receive}}) ==
        "A.B.receive");
}

TEST_CASE("stage kind names round-trip") {
  for (StageKind k : {StageKind::create, StageKind::process, StageKind::release,
                      StageKind::transfer, StageKind::receive}) {
    auto back = stage_kind_from(to_string(k));
    REQUIRE(back.has_value());
    CHECK(*back == k);
  }
  CHECK_FALSE(stage_kind_from("banana").has_value());
}
