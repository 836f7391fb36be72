#pragma once

#include <string>
#include <vector>

#include "tmkit/model.hpp"

namespace tmkit {

// Codes:
//   E_ADJ           intra-machine edge outside the allowed stage pairs
//   E_XMACHINE      inter-machine edge that is not transfer -> transfer
//   E_BACKWARD      a per-thing-type flow subgraph (or the chronology) has a cycle
//   E_MIXED         two types without a common supertype share a stage
//   E_TRIG_SAMEFLOW trigger source and action target on the same flow
//   E_RESOLVE       dangling name or ill-kinded attribute reference
//   E_STORE         store attached to a stage the machine does not declare
//   E_EVENT_SUBSET  event or chronology references an element absent from the model
struct Violation {
  std::string code;
  std::string message;
  std::string element;  // offending flow/trigger/event/stage path
  bool operator==(const Violation&) const = default;
};

struct ValidationReport {
  std::vector<Violation> violations;  // sorted by (code, declaration order)
  bool ok() const { return violations.empty(); }
};

// Pure and idempotent; all problems are report entries, never exceptions.
ValidationReport validate_model(const Model& model);

// True iff the thing's flow subgraph is acyclic. Throws
// std::invalid_argument for an undeclared thing.
bool check_forward_flow(const Model& model, const std::string& thing);

// Intra-machine adjacency table: create->process, create->release,
// receive->process, receive->release, process->release, release->transfer,
// transfer->receive.
bool intra_edge_allowed(StageKind from, StageKind to);

std::string report_to_json(const ValidationReport& report);

}  // namespace tmkit
