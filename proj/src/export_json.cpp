#include <string>

#include "json.hpp"
#include "tmkit/exporters.hpp"

namespace tmkit {

namespace {

using nlohmann::json;

// ---- export ----

json operand_json(const Operand& op) {
  if (const auto* i = std::get_if<std::int64_t>(&op))
    return json{{"int", *i}};
  const auto& ref = std::get<AttrRef>(op);
  return json{{"attr", {{"thing", ref.thing}, {"attribute", ref.attribute}}}};
}

json guard_json(const GuardExpr& g) {
  return json{{"left", operand_json(g.left)},
              {"op", to_string(g.op)},
              {"right", operand_json(g.right)}};
}

json expr_json(const ExprPtr& e) {
  if (!e) return nullptr;
  if (const auto* i = std::get_if<std::int64_t>(&e->value))
    return json{{"int", *i}};
  if (const auto* ref = std::get_if<AttrRef>(&e->value))
    return json{
        {"attr", {{"thing", ref->thing}, {"attribute", ref->attribute}}}};
  const auto& bin = std::get<BinaryExpr>(e->value);
  const char* op = bin.op == ExprOp::add   ? "add"
                   : bin.op == ExprOp::sub ? "sub"
                                           : "mul";
  return json{
      {"op", op}, {"left", expr_json(bin.left)}, {"right", expr_json(bin.right)}};
}

json action_json(const ActionSpec& a) {
  switch (a.kind) {
    case ActionKind::activate:
      return json{{"kind", "activate"}, {"stage", a.stage.key()}};
    case ActionKind::create_thing:
      return json{
          {"kind", "create"}, {"thing", a.thing}, {"stage", a.stage.key()}};
    case ActionKind::delete_thing:
      return json{{"kind", "delete"}, {"thing", a.thing}};
    case ActionKind::set_attr:
      return json{{"kind", "set"},
                  {"thing", a.thing},
                  {"attribute", a.attribute},
                  {"expr", expr_json(a.expr)}};
    case ActionKind::cancel_trigger:
      return json{{"kind", "cancel"}, {"trigger", a.trigger}};
    case ActionKind::resume_thing:
      return json{
          {"kind", "resume"}, {"thing", a.thing}, {"stage", a.stage.key()}};
  }
  return nullptr;
}

json element_json(const EventElement& el) {
  if (const auto* f = std::get_if<FlowElementRef>(&el))
    return json{{"kind", "flow"}, {"flow", f->flow}};
  if (const auto* t = std::get_if<TriggerElementRef>(&el))
    return json{{"kind", "trigger"}, {"trigger", t->trigger}};
  return json{{"kind", "stage"}, {"stage", std::get<StageRef>(el).key()}};
}

json machine_json(const Machine& mach) {
  json stages = json::array();
  for (StageKind s : mach.stages) stages.push_back(to_string(s));
  json stores = json::array();
  for (const auto& st : mach.stores)
    stores.push_back({{"after", to_string(st.stage)}, {"hold", st.hold}});
  json subs = json::array();
  for (const auto& sub : mach.submachines) subs.push_back(machine_json(sub));
  return json{{"name", mach.name},
              {"stages", stages},
              {"stores", stores},
              {"machines", subs}};
}

// ---- import ----

[[noreturn]] void bad(const std::string& path, const std::string& what) {
  throw JsonImportError(path + ": " + what);
}

const json& need(const json& j, const char* field, const std::string& path) {
  if (!j.is_object()) bad(path, "expected an object");
  auto it = j.find(field);
  if (it == j.end()) bad(path, "missing field '" + std::string(field) + "'");
  return *it;
}

std::string need_string(const json& j, const char* field,
                        const std::string& path) {
  const json& v = need(j, field, path);
  if (!v.is_string()) bad(path + "." + field, "expected a string");
  return v.get<std::string>();
}

const json& need_array(const json& j, const char* field,
                       const std::string& path) {
  const json& v = need(j, field, path);
  if (!v.is_array()) bad(path + "." + field, "expected an array");
  return v;
}

StageRef parse_key(const std::string& key, const std::string& path) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : key) {
    if (c == '.') {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  parts.push_back(cur);
  if (parts.size() < 2) bad(path, "'" + key + "' has no machine path");
  auto kind = stage_kind_from(parts.back());
  if (!kind) bad(path, "'" + key + "' does not end in a stage kind");
  StageRef ref;
  ref.stage = *kind;
  parts.pop_back();
  ref.machine_path = std::move(parts);
  return ref;
}

StageKind parse_stage_kind(const std::string& text, const std::string& path) {
  auto kind = stage_kind_from(text);
  if (!kind) bad(path, "'" + text + "' is not a stage kind");
  return *kind;
}

Operand parse_operand(const json& j, const std::string& path) {
  if (!j.is_object()) bad(path, "expected an object");
  if (auto it = j.find("int"); it != j.end()) {
    if (!it->is_number_integer()) bad(path + ".int", "expected an integer");
    return Operand{it->get<std::int64_t>()};
  }
  if (auto it = j.find("attr"); it != j.end()) {
    AttrRef ref;
    ref.thing = need_string(*it, "thing", path + ".attr");
    ref.attribute = need_string(*it, "attribute", path + ".attr");
    return Operand{ref};
  }
  bad(path, "expected 'int' or 'attr'");
}

CmpOp parse_cmp(const std::string& text, const std::string& path) {
  if (text == "<") return CmpOp::lt;
  if (text == "<=") return CmpOp::le;
  if (text == "==") return CmpOp::eq;
  if (text == ">=") return CmpOp::ge;
  if (text == ">") return CmpOp::gt;
  if (text == "!=") return CmpOp::ne;
  bad(path, "'" + text + "' is not a comparison operator");
}

ExprPtr parse_expr(const json& j, const std::string& path) {
  if (!j.is_object()) bad(path, "expected an object");
  if (auto it = j.find("int"); it != j.end()) {
    if (!it->is_number_integer()) bad(path + ".int", "expected an integer");
    return make_int_expr(it->get<std::int64_t>());
  }
  if (auto it = j.find("attr"); it != j.end()) {
    AttrRef ref;
    ref.thing = need_string(*it, "thing", path + ".attr");
    ref.attribute = need_string(*it, "attribute", path + ".attr");
    return make_attr_expr(ref);
  }
  if (j.contains("op")) {
    std::string op = need_string(j, "op", path);
    ExprOp kind;
    if (op == "add")
      kind = ExprOp::add;
    else if (op == "sub")
      kind = ExprOp::sub;
    else if (op == "mul")
      kind = ExprOp::mul;
    else
      bad(path + ".op", "'" + op + "' is not an operator");
    return make_binary_expr(kind, parse_expr(need(j, "left", path), path + ".left"),
                            parse_expr(need(j, "right", path), path + ".right"));
  }
  bad(path, "expected 'int', 'attr' or 'op'");
}

ActionSpec parse_action(const json& j, const std::string& path) {
  ActionSpec a;
  std::string kind = need_string(j, "kind", path);
  if (kind == "activate") {
    a.kind = ActionKind::activate;
    a.stage = parse_key(need_string(j, "stage", path), path + ".stage");
  } else if (kind == "create") {
    a.kind = ActionKind::create_thing;
    a.thing = need_string(j, "thing", path);
    a.stage = parse_key(need_string(j, "stage", path), path + ".stage");
  } else if (kind == "delete") {
    a.kind = ActionKind::delete_thing;
    a.thing = need_string(j, "thing", path);
  } else if (kind == "set") {
    a.kind = ActionKind::set_attr;
    a.thing = need_string(j, "thing", path);
    a.attribute = need_string(j, "attribute", path);
    a.expr = parse_expr(need(j, "expr", path), path + ".expr");
  } else if (kind == "cancel") {
    a.kind = ActionKind::cancel_trigger;
    a.trigger = need_string(j, "trigger", path);
  } else if (kind == "resume") {
    a.kind = ActionKind::resume_thing;
    a.thing = need_string(j, "thing", path);
    a.stage = parse_key(need_string(j, "stage", path), path + ".stage");
  } else {
    bad(path + ".kind", "'" + kind + "' is not an action kind");
  }
  return a;
}

EventElement parse_element(const json& j, const std::string& path) {
  std::string kind = need_string(j, "kind", path);
  if (kind == "flow") return FlowElementRef{need_string(j, "flow", path)};
  if (kind == "trigger")
    return TriggerElementRef{need_string(j, "trigger", path)};
  if (kind == "stage")
    return parse_key(need_string(j, "stage", path), path + ".stage");
  bad(path + ".kind", "'" + kind + "' is not an element kind");
}

Machine parse_machine(const json& j, const std::string& path) {
  Machine mach;
  mach.name = need_string(j, "name", path);
  const json& stages = need_array(j, "stages", path);
  for (size_t i = 0; i < stages.size(); ++i) {
    std::string p = path + ".stages[" + std::to_string(i) + "]";
    if (!stages[i].is_string()) bad(p, "expected a string");
    mach.stages.push_back(parse_stage_kind(stages[i].get<std::string>(), p));
  }
  const json& stores = need_array(j, "stores", path);
  for (size_t i = 0; i < stores.size(); ++i) {
    std::string p = path + ".stores[" + std::to_string(i) + "]";
    StoreDecl st;
    st.stage = parse_stage_kind(need_string(stores[i], "after", p), p);
    const json& hold = need(stores[i], "hold", p);
    if (!hold.is_boolean()) bad(p + ".hold", "expected a boolean");
    st.hold = hold.get<bool>();
    mach.stores.push_back(st);
  }
  const json& subs = need_array(j, "machines", path);
  for (size_t i = 0; i < subs.size(); ++i)
    mach.submachines.push_back(
        parse_machine(subs[i], path + ".machines[" + std::to_string(i) + "]"));
  return mach;
}

}  // namespace

std::string export_json(const Model& model) {
  json out;
  out["tm_schema"] = 1;
  out["model"] = model.name;

  json things = json::array();
  for (const auto& t : model.things) {
    json attrs = json::array();
    for (const auto& a : t.attributes)
      attrs.push_back({{"name", a.name},
                       {"kind", a.kind == AttrKind::integer ? "int" : "text"}});
    things.push_back({{"name", t.name},
                      {"supertype", t.supertype ? json(*t.supertype) : json()},
                      {"attributes", attrs}});
  }
  out["things"] = things;

  json machines = json::array();
  for (const auto& mach : model.machines) machines.push_back(machine_json(mach));
  out["machines"] = machines;

  json flows = json::array();
  for (const auto& e : model.flows) {
    if (e.ordinal == 0 || flows.empty())
      flows.push_back({{"name", e.flow_name},
                       {"thing", e.thing},
                       {"path", json::array({e.from.key()})}});
    flows.back()["path"].push_back(e.to.key());
  }
  out["flows"] = flows;

  json triggers = json::array();
  for (const auto& t : model.triggers)
    triggers.push_back({{"name", t.name},
                        {"source", t.source.key()},
                        {"action", action_json(t.action)},
                        {"guard", t.guard ? guard_json(*t.guard) : json()},
                        {"delay", t.delay}});
  out["triggers"] = triggers;

  json events = json::array();
  for (const auto& ev : model.events) {
    json elements = json::array();
    for (const auto& el : ev.elements) elements.push_back(element_json(el));
    events.push_back({{"id", ev.id},
                      {"label", ev.label},
                      {"elements", elements},
                      {"anchor", element_json(ev.anchor)}});
  }
  out["events"] = events;

  json edges = json::array();
  for (const auto& [from, to] : model.chronology.edges)
    edges.push_back(json::array({from, to}));
  json branches = json::array();
  for (const auto& br : model.chronology.branches)
    branches.push_back({{"from", br.from}, {"alternatives", br.alternatives}});
  out["chronology"] = {{"edges", edges}, {"branches", branches}};

  return out.dump(2) + "\n";
}

Model import_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw JsonImportError(std::string("invalid JSON: ") + e.what());
  }
  const json& schema = need(j, "tm_schema", "$");
  if (!schema.is_number_integer() || schema.get<int>() != 1)
    bad("$.tm_schema", "unsupported schema version " + schema.dump());

  Model m;
  m.name = need_string(j, "model", "$");

  const json& things = need_array(j, "things", "$");
  for (size_t i = 0; i < things.size(); ++i) {
    std::string p = "$.things[" + std::to_string(i) + "]";
    ThingType t;
    t.name = need_string(things[i], "name", p);
    const json& super = need(things[i], "supertype", p);
    if (super.is_string())
      t.supertype = super.get<std::string>();
    else if (!super.is_null())
      bad(p + ".supertype", "expected a string or null");
    const json& attrs = need_array(things[i], "attributes", p);
    for (size_t k = 0; k < attrs.size(); ++k) {
      std::string ap = p + ".attributes[" + std::to_string(k) + "]";
      Attribute a;
      a.name = need_string(attrs[k], "name", ap);
      std::string kind = need_string(attrs[k], "kind", ap);
      if (kind == "int")
        a.kind = AttrKind::integer;
      else if (kind == "text")
        a.kind = AttrKind::text;
      else
        bad(ap + ".kind", "'" + kind + "' is not an attribute kind");
      t.attributes.push_back(std::move(a));
    }
    m.things.push_back(std::move(t));
  }

  const json& machines = need_array(j, "machines", "$");
  for (size_t i = 0; i < machines.size(); ++i)
    m.machines.push_back(
        parse_machine(machines[i], "$.machines[" + std::to_string(i) + "]"));

  const json& flows = need_array(j, "flows", "$");
  for (size_t i = 0; i < flows.size(); ++i) {
    std::string p = "$.flows[" + std::to_string(i) + "]";
    std::string name = need_string(flows[i], "name", p);
    std::string thing = need_string(flows[i], "thing", p);
    const json& path = need_array(flows[i], "path", p);
    if (path.size() < 2) bad(p + ".path", "needs at least two stops");
    std::vector<StageRef> refs;
    for (size_t k = 0; k < path.size(); ++k) {
      std::string sp = p + ".path[" + std::to_string(k) + "]";
      if (!path[k].is_string()) bad(sp, "expected a string");
      refs.push_back(parse_key(path[k].get<std::string>(), sp));
    }
    for (size_t k = 0; k + 1 < refs.size(); ++k)
      m.flows.push_back(
          {name, thing, refs[k], refs[k + 1], static_cast<int>(k)});
  }

  const json& triggers = need_array(j, "triggers", "$");
  for (size_t i = 0; i < triggers.size(); ++i) {
    std::string p = "$.triggers[" + std::to_string(i) + "]";
    TriggerEdge t;
    t.name = need_string(triggers[i], "name", p);
    t.source = parse_key(need_string(triggers[i], "source", p), p + ".source");
    t.action = parse_action(need(triggers[i], "action", p), p + ".action");
    const json& guard = need(triggers[i], "guard", p);
    if (!guard.is_null()) {
      GuardExpr g;
      g.left = parse_operand(need(guard, "left", p + ".guard"),
                             p + ".guard.left");
      g.op = parse_cmp(need_string(guard, "op", p + ".guard"), p + ".guard.op");
      g.right = parse_operand(need(guard, "right", p + ".guard"),
                              p + ".guard.right");
      t.guard = g;
    }
    const json& delay = need(triggers[i], "delay", p);
    if (!delay.is_number_integer()) bad(p + ".delay", "expected an integer");
    t.delay = delay.get<std::int64_t>();
    m.triggers.push_back(std::move(t));
  }

  const json& events = need_array(j, "events", "$");
  for (size_t i = 0; i < events.size(); ++i) {
    std::string p = "$.events[" + std::to_string(i) + "]";
    Event ev;
    ev.id = need_string(events[i], "id", p);
    ev.label = need_string(events[i], "label", p);
    const json& elements = need_array(events[i], "elements", p);
    for (size_t k = 0; k < elements.size(); ++k)
      ev.elements.push_back(parse_element(
          elements[k], p + ".elements[" + std::to_string(k) + "]"));
    ev.anchor = parse_element(need(events[i], "anchor", p), p + ".anchor");
    m.events.push_back(std::move(ev));
  }

  const json& chron = need(j, "chronology", "$");
  const json& edges = need_array(chron, "edges", "$.chronology");
  for (size_t i = 0; i < edges.size(); ++i) {
    std::string p = "$.chronology.edges[" + std::to_string(i) + "]";
    if (!edges[i].is_array() || edges[i].size() != 2 ||
        !edges[i][0].is_string() || !edges[i][1].is_string())
      bad(p, "expected a pair of event ids");
    m.chronology.edges.emplace_back(edges[i][0].get<std::string>(),
                                    edges[i][1].get<std::string>());
  }
  const json& branches = need_array(chron, "branches", "$.chronology");
  for (size_t i = 0; i < branches.size(); ++i) {
    std::string p = "$.chronology.branches[" + std::to_string(i) + "]";
    ChronologyBranch br;
    br.from = need_string(branches[i], "from", p);
    const json& alts = need_array(branches[i], "alternatives", p);
    for (size_t k = 0; k < alts.size(); ++k) {
      if (!alts[k].is_string())
        bad(p + ".alternatives[" + std::to_string(k) + "]",
            "expected a string");
      br.alternatives.push_back(alts[k].get<std::string>());
    }
    m.chronology.branches.push_back(std::move(br));
  }

  return m;
}

}  // namespace tmkit
