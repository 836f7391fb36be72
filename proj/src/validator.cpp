#include "tmkit/validator.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>

#include "json.hpp"
#include "tmkit/events.hpp"

namespace tmkit {

namespace {

using StageGraph = std::map<std::string, std::vector<std::string>>;

bool graph_has_cycle(const std::vector<std::string>& order,
                     const StageGraph& adj) {
  // 0 = unseen, 1 = on stack, 2 = done
  std::map<std::string, int> color;
  for (const auto& start : order) {
    if (color[start] != 0) continue;
    std::vector<std::pair<std::string, size_t>> stack{{start, 0}};
    color[start] = 1;
    while (!stack.empty()) {
      auto& [node, next] = stack.back();
      auto it = adj.find(node);
      if (it == adj.end() || next >= it->second.size()) {
        color[node] = 2;
        stack.pop_back();
        continue;
      }
      const std::string& succ = it->second[next++];
      if (color[succ] == 1) return true;
      if (color[succ] == 0) {
        color[succ] = 1;
        stack.emplace_back(succ, 0);
      }
    }
  }
  return false;
}

const Attribute* find_attribute(const Model& m, const std::string& thing,
                                const std::string& attr) {
  for (const auto& t : m.ancestry(thing)) {
    const ThingType* tt = m.find_thing(t);
    if (!tt) continue;
    for (const auto& a : tt->attributes)
      if (a.name == attr) return &a;
  }
  return nullptr;
}

class Checker {
 public:
  explicit Checker(const Model& m) : m_(m) {}

  ValidationReport run() {
    check_things();
    check_flow_references();
    check_flow_shape();
    check_backward();
    check_mixed();
    check_triggers();
    check_stores();
    check_events();
    check_chronology_refs();
    std::stable_sort(report_.violations.begin(), report_.violations.end(),
                     [](const Violation& a, const Violation& b) {
                       return a.code < b.code;
                     });
    return std::move(report_);
  }

 private:
  void add(std::string code, std::string element, std::string message) {
    report_.violations.push_back(
        {std::move(code), std::move(message), std::move(element)});
  }

  void check_things() {
    for (const auto& t : m_.things) {
      if (t.supertype && !m_.find_thing(*t.supertype))
        add("E_RESOLVE", t.name,
            "thing '" + t.name + "' extends unknown thing '" + *t.supertype +
                "'");
    }
  }

  void check_ref(const StageRef& ref, const std::string& owner_kind,
                 const std::string& owner) {
    StageResolution r = resolve_stage(m_, ref);
    if (!r.ok())
      add("E_RESOLVE", owner, owner_kind + " '" + owner + "': " + r.error);
  }

  void check_flow_references() {
    for (const auto& e : m_.flows) {
      if (e.ordinal == 0) {
        if (!m_.find_thing(e.thing))
          add("E_RESOLVE", e.flow_name,
              "flow '" + e.flow_name + "' carries unknown thing '" + e.thing +
                  "'");
        check_ref(e.from, "flow", e.flow_name);
      }
      check_ref(e.to, "flow", e.flow_name);
    }
  }

  void check_flow_shape() {
    for (const auto& e : m_.flows) {
      if (e.from.machine_path == e.to.machine_path) {
        if (!intra_edge_allowed(e.from.stage, e.to.stage))
          add("E_ADJ", e.flow_name,
              "flow '" + e.flow_name + "': '" +
                  std::string(to_string(e.from.stage)) +
                  "' cannot precede '" + std::string(to_string(e.to.stage)) +
                  "' inside machine '" + join(e.from.machine_path) + "'");
      } else {
        if (e.from.stage != StageKind::transfer ||
            e.to.stage != StageKind::transfer)
          add("E_XMACHINE", e.flow_name,
              "flow '" + e.flow_name + "' crosses machines with '" +
                  std::string(to_string(e.from.stage)) + " -> " +
                  std::string(to_string(e.to.stage)) +
                  "': only transfer -> transfer may cross");
      }
    }
  }

  void check_backward() {
    for (const auto& t : m_.things) {
      StageGraph adj;
      std::vector<std::string> order;
      for (const auto& e : m_.flows) {
        if (!m_.is_a(t.name, e.thing)) continue;
        std::string from = e.from.key();
        std::string to = e.to.key();
        if (!adj.count(from)) order.push_back(from);
        if (!adj.count(to)) order.push_back(to);
        adj[from].push_back(to);
        adj[to];
      }
      if (graph_has_cycle(order, adj))
        add("E_BACKWARD", t.name,
            "things of type '" + t.name +
                "' can revisit a stage: flow graph has a cycle");
    }
    if (!m_.chronology.empty() && !chronology_is_acyclic(m_.chronology))
      add("E_BACKWARD", "chronology", "chronology has a cycle");
  }

  void check_mixed() {
    // stage key -> thing types touching it via flow edges, in first-touch order
    std::map<std::string, std::vector<std::string>> touch;
    std::vector<std::string> stage_order;
    auto note = [&](const StageRef& ref, const std::string& thing) {
      std::string key = ref.key();
      auto& list = touch[key];
      if (list.empty()) stage_order.push_back(key);
      if (std::find(list.begin(), list.end(), thing) == list.end())
        list.push_back(thing);
    };
    for (const auto& e : m_.flows) {
      note(e.from, e.thing);
      note(e.to, e.thing);
    }
    for (const auto& key : stage_order) {
      const auto& list = touch[key];
      for (size_t i = 0; i < list.size(); ++i) {
        for (size_t j = i + 1; j < list.size(); ++j) {
          auto anc_a = m_.ancestry(list[i]);
          auto anc_b = m_.ancestry(list[j]);
          bool common = false;
          for (const auto& a : anc_a)
            if (std::find(anc_b.begin(), anc_b.end(), a) != anc_b.end())
              common = true;
          if (!common)
            add("E_MIXED", key,
                "stage " + key + " mixes '" + list[i] + "' and '" + list[j] +
                    "' which share no supertype");
        }
      }
    }
  }

  void check_expr_refs(const ExprPtr& expr, const std::string& trigger) {
    if (!expr) return;
    if (const auto* ref = std::get_if<AttrRef>(&expr->value)) {
      check_attr_ref(*ref, trigger);
    } else if (const auto* bin = std::get_if<BinaryExpr>(&expr->value)) {
      check_expr_refs(bin->left, trigger);
      check_expr_refs(bin->right, trigger);
    }
  }

  void check_attr_ref(const AttrRef& ref, const std::string& trigger) {
    if (!m_.find_thing(ref.thing)) {
      add("E_RESOLVE", trigger,
          "trigger '" + trigger + "' references unknown thing '" + ref.thing +
              "'");
      return;
    }
    if (!find_attribute(m_, ref.thing, ref.attribute))
      add("E_RESOLVE", trigger,
          "trigger '" + trigger + "': thing '" + ref.thing +
              "' has no attribute '" + ref.attribute + "'");
  }

  void check_triggers() {
    for (const auto& t : m_.triggers) {
      check_ref(t.source, "trigger", t.name);
      if (const StageRef* target = t.action.target_stage())
        check_ref(*target, "trigger", t.name);
      switch (t.action.kind) {
        case ActionKind::create_thing:
        case ActionKind::delete_thing:
        case ActionKind::resume_thing:
          if (!m_.find_thing(t.action.thing))
            add("E_RESOLVE", t.name,
                "trigger '" + t.name + "' references unknown thing '" +
                    t.action.thing + "'");
          break;
        case ActionKind::set_attr:
          check_attr_ref({t.action.thing, t.action.attribute}, t.name);
          check_expr_refs(t.action.expr, t.name);
          break;
        case ActionKind::cancel_trigger:
          if (!m_.find_trigger(t.action.trigger))
            add("E_RESOLVE", t.name,
                "trigger '" + t.name + "' cancels unknown trigger '" +
                    t.action.trigger + "'");
          break;
        case ActionKind::activate:
          break;
      }
      if (t.guard) {
        if (const auto* ref = std::get_if<AttrRef>(&t.guard->left))
          check_attr_ref(*ref, t.name);
        if (const auto* ref = std::get_if<AttrRef>(&t.guard->right))
          check_attr_ref(*ref, t.name);
      }
      check_same_flow(t);
    }
  }

  void check_same_flow(const TriggerEdge& t) {
    const StageRef* target = t.action.target_stage();
    if (!target) return;
    std::string src = t.source.key();
    std::string dst = target->key();
    // stage sets per flow declaration
    std::map<std::string, std::set<std::string>> stages;
    std::vector<std::string> flow_order;
    for (const auto& e : m_.flows) {
      if (e.ordinal == 0) flow_order.push_back(e.flow_name);
      stages[e.flow_name].insert(e.from.key());
      stages[e.flow_name].insert(e.to.key());
    }
    for (const auto& f : flow_order) {
      const auto& set = stages[f];
      if (set.count(src) && set.count(dst)) {
        add("E_TRIG_SAMEFLOW", t.name,
            "trigger '" + t.name + "' source and target both lie on flow '" +
                f + "': triggering must cross flows");
        return;
      }
    }
  }

  void check_stores() {
    walk_stores(m_.machines, "");
  }

  void walk_stores(const std::vector<Machine>& machines,
                   const std::string& prefix) {
    for (const auto& mach : machines) {
      std::string path = prefix.empty() ? mach.name : prefix + "." + mach.name;
      for (const auto& st : mach.stores) {
        if (!mach.declares(st.stage))
          add("E_STORE", path,
              "machine '" + path + "' stores after '" +
                  std::string(to_string(st.stage)) +
                  "' but does not declare that stage");
      }
      walk_stores(mach.submachines, path);
    }
  }

  void check_events() {
    auto flow_names = m_.flow_names();
    for (const auto& ev : m_.events) {
      for (const auto& el : ev.elements) {
        if (const auto* f = std::get_if<FlowElementRef>(&el)) {
          if (std::find(flow_names.begin(), flow_names.end(), f->flow) ==
              flow_names.end())
            add("E_EVENT_SUBSET", ev.id,
                "event '" + ev.id + "' references unknown flow '" + f->flow +
                    "'");
        } else if (const auto* t = std::get_if<TriggerElementRef>(&el)) {
          if (!m_.find_trigger(t->trigger))
            add("E_EVENT_SUBSET", ev.id,
                "event '" + ev.id + "' references unknown trigger '" +
                    t->trigger + "'");
        } else if (const auto* s = std::get_if<StageRef>(&el)) {
          if (!resolve_stage(m_, *s).ok())
            add("E_EVENT_SUBSET", ev.id,
                "event '" + ev.id + "' references unknown stage '" + s->key() +
                    "'");
        }
      }
    }
  }

  void check_chronology_refs() {
    auto known = [&](const std::string& id) {
      return m_.find_event(id) != nullptr;
    };
    std::vector<std::string> missing;
    auto note = [&](const std::string& id) {
      if (!known(id) &&
          std::find(missing.begin(), missing.end(), id) == missing.end())
        missing.push_back(id);
    };
    for (const auto& [from, to] : m_.chronology.edges) {
      note(from);
      note(to);
    }
    for (const auto& br : m_.chronology.branches) {
      note(br.from);
      for (const auto& alt : br.alternatives) note(alt);
    }
    for (const auto& id : missing)
      add("E_RESOLVE", "chronology",
          "chronology references unknown event '" + id + "'");
  }

  static std::string join(const std::vector<std::string>& parts) {
    std::string out;
    for (const auto& p : parts) {
      if (!out.empty()) out += '.';
      out += p;
    }
    return out;
  }

  const Model& m_;
  ValidationReport report_;
};

}  // namespace

bool intra_edge_allowed(StageKind from, StageKind to) {
  switch (from) {
    case StageKind::create:
      return to == StageKind::process || to == StageKind::release;
    case StageKind::receive:
      return to == StageKind::process || to == StageKind::release;
    case StageKind::process:
      return to == StageKind::release;
    case StageKind::release:
      return to == StageKind::transfer;
    case StageKind::transfer:
      return to == StageKind::receive;
  }
  return false;
}

ValidationReport validate_model(const Model& model) {
  return Checker(model).run();
}

bool check_forward_flow(const Model& model, const std::string& thing) {
  if (!model.find_thing(thing))
    throw std::invalid_argument("unknown thing '" + thing + "'");
  StageGraph adj;
  std::vector<std::string> order;
  for (const auto& e : model.flows) {
    if (!model.is_a(thing, e.thing)) continue;
    std::string from = e.from.key();
    std::string to = e.to.key();
    if (!adj.count(from)) order.push_back(from);
    if (!adj.count(to)) order.push_back(to);
    adj[from].push_back(to);
    adj[to];
  }
  return !graph_has_cycle(order, adj);
}

std::string report_to_json(const ValidationReport& report) {
  nlohmann::json out;
  out["ok"] = report.ok();
  out["violations"] = nlohmann::json::array();
  for (const auto& v : report.violations)
    out["violations"].push_back(
        {{"code", v.code}, {"element", v.element}, {"message", v.message}});
  return out.dump(2) + "\n";
}

}  // namespace tmkit
