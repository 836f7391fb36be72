#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "tmkit/model.hpp"

namespace tmkit {

class EventError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Builds an event after checking that every element resolves in the model,
// the element set is non-empty, and the anchor is among the elements.
// Throws EventError otherwise.
Event carve_event(const Model& model, std::string id, std::string label,
                  std::vector<EventElement> elements, EventElement anchor);

struct ChronologyCheck {
  bool ok = true;
  // First adjacent pair that is neither a declared edge nor a branch
  // alternative, or that pairs two alternatives of one branch group.
  std::optional<std::pair<std::string, std::string>> violation;
};

// Checks a recognized event-id sequence against the model's chronology.
// Every consecutive pair must be a declared edge or a branch alternative
// rooted at the first id, and no two alternatives of the same branch group
// may both appear anywhere in the sequence. Unknown ids throw EventError.
ChronologyCheck check_chronology(const Model& model,
                                 const std::vector<std::string>& sequence);

// True iff the chronology's plain edges plus branch alternatives form a DAG.
bool chronology_is_acyclic(const Chronology& chron);

}  // namespace tmkit
