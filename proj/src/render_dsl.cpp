#include <sstream>

#include "tmkit/exporters.hpp"

namespace tmkit {

namespace {

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\')
      out += std::string("\\") + c;
    else if (c == '\n')
      out += "\\n";
    else
      out += c;
  }
  return out + "\"";
}

std::string operand_text(const Operand& op) {
  if (const auto* i = std::get_if<std::int64_t>(&op))
    return std::to_string(*i);
  const auto& ref = std::get<AttrRef>(op);
  return ref.thing + "." + ref.attribute;
}

std::string action_text(const ActionSpec& a) {
  switch (a.kind) {
    case ActionKind::activate:
      return "activate " + a.stage.key();
    case ActionKind::create_thing:
      return "create " + a.thing + " at " + a.stage.key();
    case ActionKind::delete_thing:
      return "delete " + a.thing;
    case ActionKind::set_attr:
      return "set " + a.thing + "." + a.attribute + " = " +
             expr_to_string(a.expr);
    case ActionKind::cancel_trigger:
      return "cancel " + a.trigger;
    case ActionKind::resume_thing:
      return "resume " + a.thing + " at " + a.stage.key();
  }
  return "?";
}

std::string element_text(const EventElement& el) {
  if (const auto* f = std::get_if<FlowElementRef>(&el)) return "flow " + f->flow;
  if (const auto* t = std::get_if<TriggerElementRef>(&el))
    return "trigger " + t->trigger;
  return std::get<StageRef>(el).key();
}

void render_machine(std::ostringstream& out, const Machine& mach, int depth) {
  std::string ind(static_cast<size_t>(depth) * 2, ' ');
  out << ind << "machine " << mach.name << " {\n";
  for (StageKind s : mach.stages) {
    out << ind << "  stage " << to_string(s) << ";\n";
    if (const StoreDecl* st = mach.store_for(s))
      out << ind << "  store after " << to_string(s)
          << (st->hold ? " hold" : "") << ";\n";
  }
  // stores attached to stages the machine does not declare still round-trip
  for (const auto& st : mach.stores)
    if (!mach.declares(st.stage))
      out << ind << "  store after " << to_string(st.stage)
          << (st.hold ? " hold" : "") << ";\n";
  for (const auto& sub : mach.submachines) render_machine(out, sub, depth + 1);
  out << ind << "}\n";
}

}  // namespace

std::string render_dsl(const Model& model) {
  std::ostringstream out;
  out << "model " << model.name << " {\n";

  for (const auto& t : model.things) {
    out << "  thing " << t.name;
    if (t.supertype) out << " is " << *t.supertype;
    if (!t.attributes.empty()) {
      out << " {\n";
      for (const auto& a : t.attributes)
        out << "    " << a.name << ": "
            << (a.kind == AttrKind::integer ? "int" : "text") << ";\n";
      out << "  }";
    }
    out << ";\n";
  }

  for (const auto& mach : model.machines) render_machine(out, mach, 1);

  std::string current_flow;
  for (const auto& e : model.flows) {
    if (e.ordinal == 0 || current_flow.empty()) {
      if (!current_flow.empty()) out << ";\n";
      current_flow = e.flow_name;
      out << "  flow " << e.flow_name << " of " << e.thing << ": "
          << e.from.key();
    }
    out << " -> " << e.to.key();
  }
  if (!current_flow.empty()) out << ";\n";

  for (const auto& t : model.triggers) {
    out << "  trigger " << t.name << ": " << t.source.key() << " -> "
        << action_text(t.action);
    if (t.guard)
      out << " when " << operand_text(t.guard->left) << " "
          << to_string(t.guard->op) << " " << operand_text(t.guard->right);
    if (t.delay) out << " after " << t.delay;
    out << ";\n";
  }

  for (const auto& ev : model.events) {
    out << "  event " << ev.id;
    if (!ev.label.empty()) out << " " << quote(ev.label);
    out << " {\n";
    // the anchor is positional: render it last, once
    size_t anchor_at = ev.elements.size();
    for (size_t i = ev.elements.size(); i-- > 0;)
      if (ev.elements[i] == ev.anchor) {
        anchor_at = i;
        break;
      }
    for (size_t i = 0; i < ev.elements.size(); ++i)
      if (i != anchor_at) out << "    " << element_text(ev.elements[i]) << "\n";
    out << "    " << element_text(ev.anchor) << "\n";
    out << "  }\n";
  }

  if (!model.chronology.empty()) {
    out << "  chronology {\n";
    for (const auto& [from, to] : model.chronology.edges)
      out << "    " << from << " -> " << to << ";\n";
    for (const auto& br : model.chronology.branches) {
      out << "    " << br.from << " -> { ";
      for (size_t i = 0; i < br.alternatives.size(); ++i) {
        if (i) out << " | ";
        out << br.alternatives[i];
      }
      out << " };\n";
    }
    out << "  }\n";
  }

  out << "}\n";
  return out.str();
}

}  // namespace tmkit
