#include "tmkit/events.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace tmkit {

namespace {

std::string element_missing(const Model& m, const EventElement& el) {
  if (const auto* f = std::get_if<FlowElementRef>(&el)) {
    if (!m.has_flow(f->flow)) return "unknown flow '" + f->flow + "'";
  } else if (const auto* t = std::get_if<TriggerElementRef>(&el)) {
    if (!m.find_trigger(t->trigger))
      return "unknown trigger '" + t->trigger + "'";
  } else if (const auto* s = std::get_if<StageRef>(&el)) {
    StageResolution r = resolve_stage(m, *s);
    if (!r.ok()) return r.error;
  }
  return "";
}

}  // namespace

Event carve_event(const Model& model, std::string id, std::string label,
                  std::vector<EventElement> elements, EventElement anchor) {
  if (elements.empty())
    throw EventError("event '" + id + "' needs at least one element");
  for (const auto& el : elements) {
    std::string err = element_missing(model, el);
    if (!err.empty())
      throw EventError("event '" + id + "': " + err);
  }
  if (std::find(elements.begin(), elements.end(), anchor) == elements.end())
    throw EventError("event '" + id + "': anchor " +
                     event_element_to_string(anchor) +
                     " is not one of its elements");
  Event e;
  e.id = std::move(id);
  e.label = std::move(label);
  e.elements = std::move(elements);
  e.anchor = std::move(anchor);
  return e;
}

ChronologyCheck check_chronology(const Model& model,
                                 const std::vector<std::string>& sequence) {
  for (const auto& id : sequence)
    if (!model.find_event(id))
      throw EventError("unknown event '" + id + "' in sequence");

  const Chronology& chron = model.chronology;
  std::map<std::string, std::set<std::string>> allowed;
  for (const auto& [from, to] : chron.edges) allowed[from].insert(to);
  for (const auto& br : chron.branches)
    for (const auto& alt : br.alternatives) allowed[br.from].insert(alt);

  // branch group index -> alternative already seen in this sequence
  std::map<size_t, std::string> seen_alt;
  ChronologyCheck result;
  for (size_t i = 0; i < sequence.size(); ++i) {
    const std::string& id = sequence[i];
    if (i > 0) {
      const std::string& prev = sequence[i - 1];
      auto it = allowed.find(prev);
      if (it == allowed.end() || !it->second.count(id)) {
        result.ok = false;
        result.violation = {prev, id};
        return result;
      }
    }
    for (size_t g = 0; g < chron.branches.size(); ++g) {
      const auto& alts = chron.branches[g].alternatives;
      if (std::find(alts.begin(), alts.end(), id) == alts.end()) continue;
      auto it = seen_alt.find(g);
      if (it != seen_alt.end() && it->second != id) {
        result.ok = false;
        result.violation = {it->second, id};
        return result;
      }
      seen_alt.emplace(g, id);
    }
  }
  return result;
}

bool chronology_is_acyclic(const Chronology& chron) {
  std::map<std::string, std::vector<std::string>> adj;
  std::vector<std::string> order;
  auto touch = [&](const std::string& id) {
    if (!adj.count(id)) order.push_back(id);
    adj[id];
  };
  for (const auto& [from, to] : chron.edges) {
    touch(from);
    touch(to);
    adj[from].push_back(to);
  }
  for (const auto& br : chron.branches) {
    touch(br.from);
    for (const auto& alt : br.alternatives) {
      touch(alt);
      adj[br.from].push_back(alt);
    }
  }
  std::map<std::string, int> color;
  for (const auto& start : order) {
    if (color[start] != 0) continue;
    std::vector<std::pair<std::string, size_t>> stack{{start, 0}};
    color[start] = 1;
    while (!stack.empty()) {
      auto& [node, next] = stack.back();
      const auto& succs = adj[node];
      if (next >= succs.size()) {
        color[node] = 2;
        stack.pop_back();
        continue;
      }
      const std::string& succ = succs[next++];
      if (color[succ] == 1) return false;
      if (color[succ] == 0) {
        color[succ] = 1;
        stack.emplace_back(succ, 0);
      }
    }
  }
  return true;
}

}  // namespace tmkit
