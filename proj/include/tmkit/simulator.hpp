#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "tmkit/model.hpp"
#include "tmkit/scenario.hpp"

namespace tmkit {

enum class RecordKind {
  enter_stage,
  park,
  resume,
  trigger_fired,
  create,
  delete_thing,
  set_attr,
  schedule,
  cancel,
  exit_model,
  truncated
};

const char* to_string(RecordKind k);

struct TraceRecord {
  std::int64_t tick = 0;
  RecordKind kind = RecordKind::enter_stage;
  std::string subject;  // decimal instance id, trigger name, or "-"
  std::string at;       // stage key or "-"
  std::string detail;
  // Recognition metadata; folded into detail for serialization.
  std::string thing;
  std::string flow;
  bool operator==(const TraceRecord&) const = default;
};

enum class TokenState { at_stage, parked, exited, deleted };

struct ThingInstance {
  std::int64_t id = 0;
  std::string thing;
  std::map<std::string, AttrValue> attributes;
  TokenState state = TokenState::at_stage;
  StageRef location;                // meaningful while at_stage or parked
  std::set<std::string> visited;    // stage keys since creation/last resume
  bool operator==(const ThingInstance&) const = default;
};

struct Trace {
  std::vector<TraceRecord> records;
  std::vector<ThingInstance> final_population;  // id order
};

struct TokenCensus {
  std::int64_t created = 0;
  std::int64_t deleted = 0;
  std::int64_t exited = 0;
  std::int64_t live = 0;
  bool operator==(const TokenCensus&) const = default;
};

class SimulationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Deterministic token walk over a validated model, tick 0 until max_ticks
// or quiescence (no live tokens, no pending triggers, no injections left).
// Per tick: (1) fire due pending triggers in schedule order, (2) inject
// scenario tokens, (3) advance live unparked tokens one edge each in
// creation order taking the first matching edge in flow-declaration order,
// with stage entry recording enter_stage, parking, and evaluating the
// stage's triggers in declaration order, (4) a token at a transfer stage
// with no successor edge exits the model. Guard failures against missing
// attributes and runaway activation chains throw SimulationError.
Trace simulate(const Model& model, const Scenario& scenario);

// Maps a trace to the event-id sequence of anchor activations. An
// activation is skipped while its event is the most recently emitted id.
std::vector<std::string> recognize_events(const Trace& trace, const Model& model);

// Per-thing-type counts over create/delete/exit records; live is derived
// (created - deleted - exited). No-op records never count.
std::map<std::string, TokenCensus> token_census(const Trace& trace);

// One record per line: tick, kind, subject, at, detail separated by tabs.
std::string trace_to_tsv(const Trace& trace);
// JSON array mirroring the same five fields.
std::string trace_to_json(const Trace& trace);

}  // namespace tmkit
