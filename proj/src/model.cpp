#include "tmkit/model.hpp"

#include <algorithm>
#include <set>
#include <sstream>
#include <stdexcept>

namespace tmkit {

const char* to_string(StageKind k) {
  switch (k) {
    case StageKind::create: return "create";
    case StageKind::process: return "process";
    case StageKind::release: return "release";
    case StageKind::transfer: return "transfer";
    case StageKind::receive: return "receive";
  }
  return "?";
}

std::optional<StageKind> stage_kind_from(const std::string& word) {
  if (word == "create") return StageKind::create;
  if (word == "process") return StageKind::process;
  if (word == "release") return StageKind::release;
  if (word == "transfer") return StageKind::transfer;
  if (word == "receive") return StageKind::receive;
  return std::nullopt;
}

const char* to_string(CmpOp op) {
  switch (op) {
    case CmpOp::lt: return "<";
    case CmpOp::le: return "<=";
    case CmpOp::eq: return "==";
    case CmpOp::ge: return ">=";
    case CmpOp::gt: return ">";
    case CmpOp::ne: return "!=";
  }
  return "?";
}

bool Machine::declares(StageKind k) const {
  return std::find(stages.begin(), stages.end(), k) != stages.end();
}

const StoreDecl* Machine::store_for(StageKind k) const {
  for (const auto& s : stores)
    if (s.stage == k) return &s;
  return nullptr;
}

std::string StageRef::key() const {
  std::string out;
  for (const auto& part : machine_path) {
    out += part;
    out += '.';
  }
  out += to_string(stage);
  return out;
}

ExprPtr make_int_expr(std::int64_t v) {
  auto n = std::make_shared<ExprNode>();
  n->value = v;
  return n;
}

ExprPtr make_attr_expr(AttrRef ref) {
  auto n = std::make_shared<ExprNode>();
  n->value = std::move(ref);
  return n;
}

ExprPtr make_binary_expr(ExprOp op, ExprPtr left, ExprPtr right) {
  auto n = std::make_shared<ExprNode>();
  n->value = BinaryExpr{op, std::move(left), std::move(right)};
  return n;
}

bool expr_equal(const ExprPtr& a, const ExprPtr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  if (a->value.index() != b->value.index()) return false;
  if (const auto* ai = std::get_if<std::int64_t>(&a->value))
    return *ai == std::get<std::int64_t>(b->value);
  if (const auto* ar = std::get_if<AttrRef>(&a->value))
    return *ar == std::get<AttrRef>(b->value);
  const auto& ab = std::get<BinaryExpr>(a->value);
  const auto& bb = std::get<BinaryExpr>(b->value);
  return ab.op == bb.op && expr_equal(ab.left, bb.left) &&
         expr_equal(ab.right, bb.right);
}

namespace {

const char* op_text(ExprOp op) {
  switch (op) {
    case ExprOp::add: return "+";
    case ExprOp::sub: return "-";
    case ExprOp::mul: return "*";
  }
  return "?";
}

int precedence(ExprOp op) { return op == ExprOp::mul ? 2 : 1; }

void expr_text(const ExprPtr& e, std::ostringstream& out, int parent_prec) {
  if (!e) return;
  if (const auto* i = std::get_if<std::int64_t>(&e->value)) {
    out << *i;
    return;
  }
  if (const auto* r = std::get_if<AttrRef>(&e->value)) {
    out << r->thing << '.' << r->attribute;
    return;
  }
  const auto& b = std::get<BinaryExpr>(e->value);
  int prec = precedence(b.op);
  bool paren = prec < parent_prec;
  if (paren) out << '(';
  expr_text(b.left, out, prec);
  out << ' ' << op_text(b.op) << ' ';
  // Right operand of - needs a tighter context so a - (b - c) keeps parens.
  expr_text(b.right, out, b.op == ExprOp::mul ? prec : prec + 1);
  if (paren) out << ')';
}

}  // namespace

std::string expr_to_string(const ExprPtr& e) {
  std::ostringstream out;
  expr_text(e, out, 0);
  return out.str();
}

bool ActionSpec::operator==(const ActionSpec& other) const {
  return kind == other.kind && stage == other.stage && thing == other.thing &&
         attribute == other.attribute && trigger == other.trigger &&
         expr_equal(expr, other.expr);
}

const StageRef* ActionSpec::target_stage() const {
  switch (kind) {
    case ActionKind::activate:
    case ActionKind::create_thing:
    case ActionKind::resume_thing:
      return &stage;
    default:
      return nullptr;
  }
}

std::string event_element_to_string(const EventElement& e) {
  if (const auto* f = std::get_if<FlowElementRef>(&e)) return "flow " + f->flow;
  if (const auto* t = std::get_if<TriggerElementRef>(&e))
    return "trigger " + t->trigger;
  return std::get<StageRef>(e).key();
}

const ThingType* Model::find_thing(const std::string& n) const {
  for (const auto& t : things)
    if (t.name == n) return &t;
  return nullptr;
}

const TriggerEdge* Model::find_trigger(const std::string& n) const {
  for (const auto& t : triggers)
    if (t.name == n) return &t;
  return nullptr;
}

const Event* Model::find_event(const std::string& id) const {
  for (const auto& e : events)
    if (e.id == id) return &e;
  return nullptr;
}

bool Model::has_flow(const std::string& n) const {
  for (const auto& e : flows)
    if (e.flow_name == n) return true;
  return false;
}

std::vector<std::string> Model::flow_names() const {
  std::vector<std::string> out;
  for (const auto& e : flows)
    if (std::find(out.begin(), out.end(), e.flow_name) == out.end())
      out.push_back(e.flow_name);
  return out;
}

std::vector<std::string> Model::ancestry(const std::string& thing) const {
  std::vector<std::string> chain;
  std::set<std::string> seen;
  std::string cur = thing;
  while (seen.insert(cur).second) {
    chain.push_back(cur);
    const ThingType* t = find_thing(cur);
    if (!t || !t->supertype) break;
    cur = *t->supertype;
  }
  return chain;
}

bool Model::is_a(const std::string& thing, const std::string& ancestor) const {
  auto chain = ancestry(thing);
  return std::find(chain.begin(), chain.end(), ancestor) != chain.end();
}

StageResolution resolve_stage(const Model& model, const StageRef& ref) {
  if (ref.machine_path.empty())
    return {nullptr, "empty machine path; model roots are machines, not stages"};
  const std::vector<Machine>* level = &model.machines;
  const Machine* found = nullptr;
  std::string walked;
  for (const auto& part : ref.machine_path) {
    found = nullptr;
    for (const auto& m : *level) {
      if (m.name == part) {
        found = &m;
        break;
      }
    }
    if (!found) {
      std::string where = walked.empty() ? "model root" : walked;
      return {nullptr, "no machine named '" + part + "' under " + where};
    }
    walked = walked.empty() ? part : walked + "." + part;
    level = &found->submachines;
  }
  if (!found->declares(ref.stage))
    return {nullptr, "machine '" + walked + "' does not declare stage '" +
                         to_string(ref.stage) + "'"};
  return {found, ""};
}

std::vector<FlowEdge> flow_subgraph(const Model& model, const std::string& thing) {
  if (!model.find_thing(thing))
    throw std::invalid_argument("unknown thing type '" + thing + "'");
  std::vector<FlowEdge> out;
  for (const auto& e : model.flows)
    if (model.is_a(e.thing, thing)) out.push_back(e);
  return out;
}

}  // namespace tmkit
