#include "tmkit/simulator.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

#include "json.hpp"

namespace tmkit {

const char* to_string(RecordKind k) {
  switch (k) {
    case RecordKind::enter_stage: return "enter_stage";
    case RecordKind::park: return "park";
    case RecordKind::resume: return "resume";
    case RecordKind::trigger_fired: return "trigger_fired";
    case RecordKind::create: return "create";
    case RecordKind::delete_thing: return "delete";
    case RecordKind::set_attr: return "set_attr";
    case RecordKind::schedule: return "schedule";
    case RecordKind::cancel: return "cancel";
    case RecordKind::exit_model: return "exit";
    case RecordKind::truncated: return "truncated";
  }
  return "?";
}

namespace {

std::string value_text(const AttrValue& v) {
  if (const auto* i = std::get_if<std::int64_t>(&v)) return std::to_string(*i);
  return std::get<std::string>(v);
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

struct Pending {
  std::int64_t seq = 0;
  std::int64_t due = 0;
  std::string trigger;
  std::int64_t bound = 0;
};

struct Tok {
  ThingInstance inst;
  std::int64_t movable_at = 0;
};

class Sim {
 public:
  Sim(const Model& m, const Scenario& sc) : m_(m), sc_(sc) {}

  Trace run() {
    while (true) {
      bool work = next_injection_ < sc_.injections.size() || !pending_.empty();
      for (const auto& t : toks_)
        if (is_live(t.inst)) work = true;
      if (!work) break;
      if (tick_ >= sc_.max_ticks) {
        record(RecordKind::truncated, "-", "-",
               "max_ticks=" + std::to_string(sc_.max_ticks) + " reached");
        break;
      }
      fire_due();
      inject();
      advance();
      ++tick_;
    }
    for (const auto& t : toks_) trace_.final_population.push_back(t.inst);
    return std::move(trace_);
  }

 private:
  // ---- bookkeeping ----

  Tok* find(std::int64_t id) {
    if (id < 1 || id > static_cast<std::int64_t>(toks_.size())) return nullptr;
    return &toks_[static_cast<size_t>(id - 1)];
  }

  static bool is_live(const ThingInstance& inst) {
    return inst.state == TokenState::at_stage ||
           inst.state == TokenState::parked;
  }

  void record(RecordKind kind, std::string subject, std::string at,
              std::string detail, std::string thing = "",
              std::string flow = "") {
    trace_.records.push_back({tick_, kind, std::move(subject), std::move(at),
                              std::move(detail), std::move(thing),
                              std::move(flow)});
  }

  std::string attrs_text(const Tok& tok) const {
    std::string out = "{";
    bool first = true;
    auto anc = m_.ancestry(tok.inst.thing);
    for (auto it = anc.rbegin(); it != anc.rend(); ++it) {
      const ThingType* tt = m_.find_thing(*it);
      if (!tt) continue;
      for (const auto& a : tt->attributes) {
        auto v = tok.inst.attributes.find(a.name);
        if (v == tok.inst.attributes.end()) continue;
        if (!first) out += ',';
        first = false;
        out += a.name + "=" + value_text(v->second);
      }
    }
    return out + "}";
  }

  [[noreturn]] void fail(const std::string& trigger, const std::string& what) {
    throw SimulationError("trigger '" + trigger + "': " + what + " (tick " +
                          std::to_string(tick_) + ")");
  }

  // ---- guard and expression evaluation ----

  Tok* resolve_instance(const std::string& thing, std::int64_t bound) {
    if (Tok* b = find(bound); b && is_live(b->inst) &&
                              m_.is_a(b->inst.thing, thing))
      return b;
    for (auto it = toks_.rbegin(); it != toks_.rend(); ++it)
      if (is_live(it->inst) && m_.is_a(it->inst.thing, thing)) return &*it;
    return nullptr;
  }

  // nullopt when no live instance of the referenced type exists
  std::optional<AttrValue> read_attr(const AttrRef& ref, std::int64_t bound,
                                     const std::string& trigger) {
    Tok* tok = resolve_instance(ref.thing, bound);
    if (!tok) return std::nullopt;
    auto it = tok->inst.attributes.find(ref.attribute);
    if (it == tok->inst.attributes.end())
      fail(trigger, ref.thing + "#" + std::to_string(tok->inst.id) +
                        " has no attribute '" + ref.attribute + "'");
    return it->second;
  }

  bool guard_met(const GuardExpr& g, std::int64_t bound,
                 const std::string& trigger) {
    auto side = [&](const Operand& op) -> std::optional<AttrValue> {
      if (const auto* i = std::get_if<std::int64_t>(&op))
        return AttrValue{*i};
      return read_attr(std::get<AttrRef>(op), bound, trigger);
    };
    auto left = side(g.left);
    auto right = side(g.right);
    if (!left || !right) return false;
    const auto* li = std::get_if<std::int64_t>(&*left);
    const auto* ri = std::get_if<std::int64_t>(&*right);
    if (li && ri) {
      switch (g.op) {
        case CmpOp::lt: return *li < *ri;
        case CmpOp::le: return *li <= *ri;
        case CmpOp::eq: return *li == *ri;
        case CmpOp::ge: return *li >= *ri;
        case CmpOp::gt: return *li > *ri;
        case CmpOp::ne: return *li != *ri;
      }
    }
    const auto* ls = std::get_if<std::string>(&*left);
    const auto* rs = std::get_if<std::string>(&*right);
    if (ls && rs) {
      if (g.op == CmpOp::eq) return *ls == *rs;
      if (g.op == CmpOp::ne) return *ls != *rs;
      fail(trigger, "guard orders text values");
    }
    if (g.op == CmpOp::eq) return false;
    if (g.op == CmpOp::ne) return true;
    fail(trigger, "guard compares text with an integer");
  }

  // nullopt when some referenced type has no live instance; missing names it
  std::optional<std::int64_t> eval(const ExprPtr& e, std::int64_t bound,
                                   const std::string& trigger,
                                   std::string& missing) {
    if (!e) fail(trigger, "missing expression");
    if (const auto* i = std::get_if<std::int64_t>(&e->value)) return *i;
    if (const auto* ref = std::get_if<AttrRef>(&e->value)) {
      Tok* tok = resolve_instance(ref->thing, bound);
      if (!tok) {
        missing = ref->thing;
        return std::nullopt;
      }
      auto it = tok->inst.attributes.find(ref->attribute);
      if (it == tok->inst.attributes.end())
        fail(trigger, ref->thing + "#" + std::to_string(tok->inst.id) +
                          " has no attribute '" + ref->attribute + "'");
      const auto* v = std::get_if<std::int64_t>(&it->second);
      if (!v) fail(trigger, "arithmetic on text attribute '" + ref->attribute +
                                "'");
      return *v;
    }
    const auto& bin = std::get<BinaryExpr>(e->value);
    auto l = eval(bin.left, bound, trigger, missing);
    if (!l) return std::nullopt;
    auto r = eval(bin.right, bound, trigger, missing);
    if (!r) return std::nullopt;
    switch (bin.op) {
      case ExprOp::add: return *l + *r;
      case ExprOp::sub: return *l - *r;
      case ExprOp::mul: return *l * *r;
    }
    return std::nullopt;
  }

  // ---- stage entry ----

  bool should_park(const Tok& tok) {
    StageResolution res = resolve_stage(m_, tok.inst.location);
    if (res.ok()) {
      const StoreDecl* st = res.machine->store_for(tok.inst.location.stage);
      if (st && st->hold) return true;
    }
    std::string key = tok.inst.location.key();
    for (const auto& t : m_.triggers) {
      if (t.source.key() != key) continue;
      if (t.action.kind != ActionKind::resume_thing) continue;
      if (!m_.is_a(tok.inst.thing, t.action.thing)) continue;
      if (t.guard && !guard_met(*t.guard, tok.inst.id, t.name)) return true;
    }
    return false;
  }

  // Park check plus trigger evaluation for a token already located and
  // recorded at its stage.
  void entry_core(std::int64_t id) {
    if (depth_ > 100)
      fail(current_trigger_, "runaway activation chain (depth over 100)");
    ++depth_;
    Tok* tok = find(id);
    std::string key = tok->inst.location.key();
    tok->inst.visited.insert(key);
    if (tok->inst.state == TokenState::at_stage && should_park(*tok)) {
      tok->inst.state = TokenState::parked;
      record(RecordKind::park, std::to_string(id), key,
             tok->inst.thing + " held", tok->inst.thing);
    }
    for (const auto& t : m_.triggers) {
      if (t.source.key() != key) continue;
      if (t.guard && !guard_met(*t.guard, id, t.name)) continue;
      if (t.delay) {
        std::int64_t due = tick_ + t.delay;
        pending_.push_back({next_seq_++, due, t.name, id});
        record(RecordKind::schedule, t.name, t.source.key(),
               "due=" + std::to_string(due) + " bound=" + std::to_string(id));
      } else {
        fire(t, id);
      }
    }
    --depth_;
  }

  void fire(const TriggerEdge& t, std::int64_t bound) {
    std::string outer = current_trigger_;
    current_trigger_ = t.name;
    record(RecordKind::trigger_fired, t.name, t.source.key(),
           action_text(t.action));
    apply(t, bound);
    current_trigger_ = outer;
  }

  void apply(const TriggerEdge& t, std::int64_t bound) {
    const ActionSpec& a = t.action;
    switch (a.kind) {
      case ActionKind::activate: {
        std::string key = a.stage.key();
        Tok* oldest = nullptr;
        for (auto& tok : toks_)
          if (is_live(tok.inst) && tok.inst.location.key() == key) {
            oldest = &tok;
            break;
          }
        if (!oldest) return;
        record(RecordKind::enter_stage, std::to_string(oldest->inst.id), key,
               oldest->inst.thing + " reactivated by " + t.name,
               oldest->inst.thing);
        entry_core(oldest->inst.id);
        return;
      }
      case ActionKind::create_thing: {
        Tok tok;
        tok.inst.id = static_cast<std::int64_t>(toks_.size()) + 1;
        tok.inst.thing = a.thing;
        tok.inst.location = a.stage;
        tok.inst.visited.insert(a.stage.key());
        tok.movable_at = tick_ + 1;
        std::int64_t id = tok.inst.id;
        std::string attrs = attrs_text(tok);
        toks_.push_back(std::move(tok));
        record(RecordKind::create, std::to_string(id), a.stage.key(),
               a.thing + " " + attrs + " by " + t.name, a.thing);
        return;
      }
      case ActionKind::delete_thing: {
        for (auto& tok : toks_) {
          if (!is_live(tok.inst) || !m_.is_a(tok.inst.thing, a.thing))
            continue;
          tok.inst.state = TokenState::deleted;
          record(RecordKind::delete_thing, std::to_string(tok.inst.id),
                 tok.inst.location.key(),
                 tok.inst.thing + " deleted by " + t.name, tok.inst.thing);
          return;
        }
        record(RecordKind::delete_thing, t.name, "-",
               "no live " + a.thing + "; no-op");
        return;
      }
      case ActionKind::set_attr: {
        Tok* target = resolve_instance(a.thing, bound);
        if (!target) {
          record(RecordKind::set_attr, t.name, "-",
                 "no live " + a.thing + "; no-op");
          return;
        }
        std::string missing;
        auto value = eval(a.expr, bound, t.name, missing);
        if (!value) {
          record(RecordKind::set_attr, t.name, "-",
                 "no live " + missing + "; no-op");
          return;
        }
        target->inst.attributes[a.attribute] = AttrValue{*value};
        record(RecordKind::set_attr, std::to_string(target->inst.id),
               target->inst.location.key(),
               a.thing + "." + a.attribute + "=" + std::to_string(*value) +
                   " by " + t.name,
               target->inst.thing);
        return;
      }
      case ActionKind::cancel_trigger: {
        auto it = std::find_if(pending_.begin(), pending_.end(),
                               [&](const Pending& p) {
                                 return p.trigger == a.trigger;
                               });
        if (it == pending_.end()) {
          record(RecordKind::cancel, t.name, "-",
                 "no pending " + a.trigger + "; no-op");
          return;
        }
        record(RecordKind::cancel, it->trigger, "-",
               "by " + t.name + " bound=" + std::to_string(it->bound));
        pending_.erase(it);
        return;
      }
      case ActionKind::resume_thing: {
        Tok* oldest = nullptr;
        for (auto& tok : toks_)
          if (tok.inst.state == TokenState::parked &&
              m_.is_a(tok.inst.thing, a.thing)) {
            oldest = &tok;
            break;
          }
        if (!oldest) {
          record(RecordKind::resume, t.name, "-",
                 "no parked " + a.thing + "; no-op");
          return;
        }
        oldest->inst.state = TokenState::at_stage;
        oldest->inst.location = a.stage;
        oldest->inst.visited.clear();
        record(RecordKind::resume, std::to_string(oldest->inst.id),
               a.stage.key(),
               oldest->inst.thing + " resumed by " + t.name,
               oldest->inst.thing);
        entry_core(oldest->inst.id);
        return;
      }
    }
  }

  // ---- tick phases ----

  void fire_due() {
    std::vector<Pending> due;
    auto it = pending_.begin();
    while (it != pending_.end()) {
      if (it->due <= tick_) {
        due.push_back(*it);
        it = pending_.erase(it);
      } else {
        ++it;
      }
    }
    std::sort(due.begin(), due.end(),
              [](const Pending& a, const Pending& b) { return a.seq < b.seq; });
    for (const auto& p : due) {
      const TriggerEdge* t = m_.find_trigger(p.trigger);
      if (!t) continue;
      fire(*t, p.bound);
    }
  }

  void inject() {
    while (next_injection_ < sc_.injections.size() &&
           sc_.injections[next_injection_].tick == tick_) {
      const Injection& inj = sc_.injections[next_injection_++];
      Tok tok;
      tok.inst.id = static_cast<std::int64_t>(toks_.size()) + 1;
      tok.inst.thing = inj.thing;
      tok.inst.location = inj.at;
      for (const auto& [name, value] : inj.attributes)
        tok.inst.attributes[name] = value;
      tok.movable_at = tick_;
      std::int64_t id = tok.inst.id;
      std::string attrs = attrs_text(tok);
      toks_.push_back(std::move(tok));
      record(RecordKind::create, std::to_string(id), inj.at.key(),
             inj.thing + " " + attrs + " injected", inj.thing);
      entry_core(id);
    }
  }

  void advance() {
    std::vector<std::int64_t> snapshot;
    for (const auto& tok : toks_) snapshot.push_back(tok.inst.id);
    for (std::int64_t id : snapshot) {
      Tok* tok = find(id);
      if (tok->inst.state != TokenState::at_stage) continue;
      if (tok->movable_at > tick_) continue;
      std::string key = tok->inst.location.key();
      const FlowEdge* edge = nullptr;
      for (const auto& e : m_.flows)
        if (e.from.key() == key && m_.is_a(tok->inst.thing, e.thing)) {
          edge = &e;
          break;
        }
      if (edge) {
        tok->inst.location = edge->to;
        record(RecordKind::enter_stage, std::to_string(id), edge->to.key(),
               tok->inst.thing + " via " + edge->flow_name, tok->inst.thing,
               edge->flow_name);
        entry_core(id);
      } else if (tok->inst.location.stage == StageKind::transfer) {
        tok->inst.state = TokenState::exited;
        record(RecordKind::exit_model, std::to_string(id), key,
               tok->inst.thing + " exported", tok->inst.thing);
      }
    }
  }

  const Model& m_;
  const Scenario& sc_;
  Trace trace_;
  std::vector<Tok> toks_;
  std::vector<Pending> pending_;
  std::int64_t next_seq_ = 1;
  std::int64_t tick_ = 0;
  size_t next_injection_ = 0;
  int depth_ = 0;
  std::string current_trigger_;
};

bool all_digits(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  return true;
}

}  // namespace

Trace simulate(const Model& model, const Scenario& scenario) {
  return Sim(model, scenario).run();
}

std::vector<std::string> recognize_events(const Trace& trace,
                                          const Model& model) {
  std::vector<std::string> out;
  std::string last;
  for (const auto& rec : trace.records) {
    for (const auto& ev : model.events) {
      bool hit = false;
      if (const auto* s = std::get_if<StageRef>(&ev.anchor)) {
        hit = (rec.kind == RecordKind::enter_stage ||
               rec.kind == RecordKind::resume) &&
              rec.at == s->key();
      } else if (const auto* t = std::get_if<TriggerElementRef>(&ev.anchor)) {
        hit = rec.kind == RecordKind::trigger_fired && rec.subject == t->trigger;
      } else if (const auto* f = std::get_if<FlowElementRef>(&ev.anchor)) {
        hit = rec.kind == RecordKind::enter_stage && rec.flow == f->flow;
      }
      if (hit && ev.id != last) {
        out.push_back(ev.id);
        last = ev.id;
      }
    }
  }
  return out;
}

std::map<std::string, TokenCensus> token_census(const Trace& trace) {
  std::map<std::string, TokenCensus> out;
  for (const auto& rec : trace.records) {
    if (!all_digits(rec.subject)) continue;
    if (rec.kind == RecordKind::create)
      ++out[rec.thing].created;
    else if (rec.kind == RecordKind::delete_thing)
      ++out[rec.thing].deleted;
    else if (rec.kind == RecordKind::exit_model)
      ++out[rec.thing].exited;
  }
  for (auto& [thing, c] : out) c.live = c.created - c.deleted - c.exited;
  return out;
}

std::string trace_to_tsv(const Trace& trace) {
  std::ostringstream out;
  for (const auto& r : trace.records)
    out << r.tick << '\t' << to_string(r.kind) << '\t' << r.subject << '\t'
        << r.at << '\t' << r.detail << '\n';
  return out.str();
}

std::string trace_to_json(const Trace& trace) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : trace.records)
    arr.push_back({{"tick", r.tick},
                   {"kind", to_string(r.kind)},
                   {"subject", r.subject},
                   {"at", r.at},
                   {"detail", r.detail}});
  return arr.dump(2) + "\n";
}

}  // namespace tmkit
