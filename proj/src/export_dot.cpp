#include <sstream>

#include "tmkit/exporters.hpp"

namespace tmkit {

namespace {

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#e377c2", "#17becf",
                          "#bcbd22", "#7f7f7f"};

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out;
}

std::string operand_text(const Operand& op) {
  if (const auto* i = std::get_if<std::int64_t>(&op))
    return std::to_string(*i);
  const auto& ref = std::get<AttrRef>(op);
  return ref.thing + "." + ref.attribute;
}

std::string guard_text(const GuardExpr& g) {
  return operand_text(g.left) + " " + to_string(g.op) + " " +
         operand_text(g.right);
}

void emit_cluster(std::ostringstream& out, const Machine& mach,
                  const std::string& prefix, int depth) {
  std::string path = prefix.empty() ? mach.name : prefix + "." + mach.name;
  std::string ind(static_cast<size_t>(depth) * 2, ' ');
  out << ind << "subgraph \"cluster_" << escape(path) << "\" {\n";
  out << ind << "  label=\"" << escape(mach.name) << "\";\n";
  for (StageKind stage : mach.stages) {
    out << ind << "  \"" << escape(path) << "." << to_string(stage)
        << "\" [label=\"" << to_string(stage) << "\"";
    if (mach.store_for(stage)) out << ", peripheries=2";
    out << "];\n";
  }
  for (const auto& sub : mach.submachines)
    emit_cluster(out, sub, path, depth + 1);
  out << ind << "}\n";
}

std::string thing_color(const Model& m, const std::string& thing) {
  for (size_t i = 0; i < m.things.size(); ++i)
    if (m.things[i].name == thing)
      return kPalette[i % (sizeof(kPalette) / sizeof(kPalette[0]))];
  return "#000000";
}

// Where a dashed edge should point for actions without a stage of their own:
// the last stop of the affected type's flows, or back to the source.
std::string action_target(const Model& m, const TriggerEdge& t) {
  if (const StageRef* s = t.action.target_stage()) return s->key();
  if (t.action.kind == ActionKind::cancel_trigger) {
    if (const TriggerEdge* other = m.find_trigger(t.action.trigger))
      return other->source.key();
    return t.source.key();
  }
  std::string last;
  for (const auto& e : m.flows)
    if (m.is_a(t.action.thing, e.thing)) last = e.to.key();
  return last.empty() ? t.source.key() : last;
}

}  // namespace

std::string export_dot(const Model& model) {
  std::ostringstream out;
  out << "digraph \"" << escape(model.name) << "\" {\n";
  out << "  compound=true;\n";
  out << "  rankdir=LR;\n";
  out << "  node [shape=box, style=rounded];\n";
  for (const auto& mach : model.machines) emit_cluster(out, mach, "", 1);
  for (const auto& e : model.flows)
    out << "  \"" << escape(e.from.key()) << "\" -> \"" << escape(e.to.key())
        << "\" [style=solid, color=\"" << thing_color(model, e.thing)
        << "\", label=\"" << escape(e.thing) << "\"];\n";
  for (const auto& t : model.triggers) {
    std::string label = escape(t.name);
    if (t.guard) label += "\\nwhen " + escape(guard_text(*t.guard));
    if (t.delay) label += "\\nafter " + std::to_string(t.delay);
    out << "  \"" << escape(t.source.key()) << "\" -> \""
        << escape(action_target(model, t)) << "\" [style=dashed, label=\""
        << label << "\"];\n";
  }
  out << "}\n";
  return out.str();
}

}  // namespace tmkit
