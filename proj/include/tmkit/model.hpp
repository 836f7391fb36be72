#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace tmkit {

// The five generic stages a machine may declare. Storage and deletion are
// deliberately not stages: a store attaches to a declared stage, and
// deletion happens through a trigger action.
enum class StageKind { create, process, release, transfer, receive };

const char* to_string(StageKind k);
std::optional<StageKind> stage_kind_from(const std::string& word);

enum class AttrKind { integer, text };

using AttrValue = std::variant<std::int64_t, std::string>;

struct Attribute {
  std::string name;
  AttrKind kind = AttrKind::integer;
  bool operator==(const Attribute&) const = default;
};

struct ThingType {
  std::string name;
  std::optional<std::string> supertype;
  std::vector<Attribute> attributes;
  bool operator==(const ThingType&) const = default;
};

struct StoreDecl {
  StageKind stage = StageKind::create;
  // Tokens entering a held store always park and leave only via resume.
  bool hold = false;
  bool operator==(const StoreDecl&) const = default;
};

struct Machine {
  std::string name;
  std::vector<StageKind> stages;  // declaration order, at most one per kind
  std::vector<StoreDecl> stores;
  std::vector<Machine> submachines;

  bool declares(StageKind k) const;
  const StoreDecl* store_for(StageKind k) const;
  bool operator==(const Machine&) const = default;
};

// Path-addressed stage: machine path from the model root plus a stage kind.
struct StageRef {
  std::vector<std::string> machine_path;
  StageKind stage = StageKind::create;

  std::string key() const;  // "Customer.Orders.create"
  bool operator==(const StageRef&) const = default;
};

struct FlowEdge {
  std::string flow_name;
  std::string thing;
  StageRef from;
  StageRef to;
  int ordinal = 0;  // position within the declared path
  bool operator==(const FlowEdge&) const = default;
};

struct AttrRef {
  std::string thing;
  std::string attribute;
  bool operator==(const AttrRef&) const = default;
};

enum class CmpOp { lt, le, eq, ge, gt, ne };
const char* to_string(CmpOp op);

using Operand = std::variant<std::int64_t, AttrRef>;

struct GuardExpr {
  Operand left;
  CmpOp op = CmpOp::eq;
  Operand right;
  bool operator==(const GuardExpr&) const = default;
};

// Integer arithmetic over attribute references, used by set actions.
enum class ExprOp { add, sub, mul };

struct ExprNode;
using ExprPtr = std::shared_ptr<const ExprNode>;

struct BinaryExpr {
  ExprOp op = ExprOp::add;
  ExprPtr left;
  ExprPtr right;
};

struct ExprNode {
  std::variant<std::int64_t, AttrRef, BinaryExpr> value;
};

ExprPtr make_int_expr(std::int64_t v);
ExprPtr make_attr_expr(AttrRef ref);
ExprPtr make_binary_expr(ExprOp op, ExprPtr left, ExprPtr right);
bool expr_equal(const ExprPtr& a, const ExprPtr& b);
std::string expr_to_string(const ExprPtr& e);

enum class ActionKind {
  activate,       // re-enter the oldest token at a stage
  create_thing,   // materialize a new instance at a create stage
  delete_thing,   // remove the oldest live instance of a type
  set_attr,       // assign an integer expression to an attribute
  cancel_trigger, // cancel the oldest pending delayed trigger by name
  resume_thing    // release the oldest parked instance at a stage
};

struct ActionSpec {
  ActionKind kind = ActionKind::activate;
  StageRef stage;         // activate / create / resume target
  std::string thing;      // create / delete / set / resume
  std::string attribute;  // set
  ExprPtr expr;           // set
  std::string trigger;    // cancel

  bool operator==(const ActionSpec& other) const;
  // The stage the action points at, if it has one.
  const StageRef* target_stage() const;
};

struct TriggerEdge {
  std::string name;
  StageRef source;
  ActionSpec action;
  std::optional<GuardExpr> guard;
  std::int64_t delay = 0;  // ticks; zero fires immediately
  bool operator==(const TriggerEdge&) const = default;
};

struct FlowElementRef {
  std::string flow;
  bool operator==(const FlowElementRef&) const = default;
};

struct TriggerElementRef {
  std::string trigger;
  bool operator==(const TriggerElementRef&) const = default;
};

using EventElement = std::variant<FlowElementRef, StageRef, TriggerElementRef>;

std::string event_element_to_string(const EventElement& e);

// A named region of the static model; the anchor is the element whose
// activation in a trace marks an occurrence of the event.
struct Event {
  std::string id;
  std::string label;
  std::vector<EventElement> elements;  // anchor listed last
  EventElement anchor;
  bool operator==(const Event&) const = default;
};

struct ChronologyBranch {
  std::string from;
  std::vector<std::string> alternatives;  // >= 2, mutually exclusive
  bool operator==(const ChronologyBranch&) const = default;
};

struct Chronology {
  std::vector<std::pair<std::string, std::string>> edges;
  std::vector<ChronologyBranch> branches;

  bool empty() const { return edges.empty() && branches.empty(); }
  bool operator==(const Chronology&) const = default;
};

struct Model {
  std::string name;
  std::vector<ThingType> things;
  std::vector<Machine> machines;  // roots
  std::vector<FlowEdge> flows;    // flow-declaration order, then ordinal
  std::vector<TriggerEdge> triggers;
  std::vector<Event> events;
  Chronology chronology;

  const ThingType* find_thing(const std::string& name) const;
  const TriggerEdge* find_trigger(const std::string& name) const;
  const Event* find_event(const std::string& id) const;
  bool has_flow(const std::string& name) const;
  std::vector<std::string> flow_names() const;  // declaration order, unique

  // Ancestry of a thing type, self first; tolerates undeclared supertypes
  // and cycles (stops at first repeat) so it is safe pre-validation.
  std::vector<std::string> ancestry(const std::string& thing) const;
  bool is_a(const std::string& thing, const std::string& ancestor) const;

  bool operator==(const Model&) const = default;
};

struct StageResolution {
  const Machine* machine = nullptr;
  std::string error;
  bool ok() const { return machine != nullptr; }
};

// Resolves a stage reference to the unique machine owning the stage.
StageResolution resolve_stage(const Model& model, const StageRef& ref);

// Edges labeled with `thing` or one of its subtypes, in declaration order.
// Throws std::invalid_argument for an undeclared name.
std::vector<FlowEdge> flow_subgraph(const Model& model, const std::string& thing);

}  // namespace tmkit
