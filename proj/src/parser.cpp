#include "tmkit/parser.hpp"

#include <cctype>
#include <cstdlib>
#include <set>
#include <sstream>

namespace tmkit {

const char* to_string(Severity s) {
  return s == Severity::error ? "error" : "warning";
}

std::string format_diagnostics(const std::vector<ParseDiagnostic>& diags) {
  std::ostringstream out;
  for (const auto& d : diags) {
    out << d.position.line << ':' << d.position.column << ": "
        << to_string(d.severity) << ": " << d.message << '\n';
  }
  return out.str();
}

namespace {

enum class Tok {
  ident,
  integer,
  string,
  lbrace,
  rbrace,
  lparen,
  rparen,
  semi,
  colon,
  dot,
  comma,
  arrow,
  assign,
  eq,
  ne,
  lt,
  le,
  gt,
  ge,
  plus,
  minus,
  star,
  pipe,
  eof,
  bad
};

struct Token {
  Tok kind = Tok::eof;
  std::string text;
  std::int64_t value = 0;
  SourcePosition pos;
};

class Lexer {
 public:
  Lexer(std::string_view src, std::vector<ParseDiagnostic>& diags)
      : src_(src), diags_(diags) {}

  Token next() {
    skip_space();
    Token t;
    t.pos = {line_, col_};
    if (at_end()) {
      t.kind = Tok::eof;
      return t;
    }
    char c = peek();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      while (!at_end() && (std::isalnum(static_cast<unsigned char>(peek())) ||
                           peek() == '_'))
        t.text += take();
      t.kind = Tok::ident;
      return t;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::string digits;
      while (!at_end() && std::isdigit(static_cast<unsigned char>(peek())))
        digits += take();
      errno = 0;
      t.value = std::strtoll(digits.c_str(), nullptr, 10);
      if (errno == ERANGE) {
        error(t.pos, "integer literal out of range");
        t.kind = Tok::bad;
        return t;
      }
      t.kind = Tok::integer;
      t.text = digits;
      return t;
    }
    if (c == '"') {
      take();
      while (!at_end() && peek() != '"' && peek() != '\n') {
        char ch = take();
        if (ch == '\\' && !at_end()) {
          char esc = take();
          if (esc == 'n')
            t.text += '\n';
          else if (esc == '"' || esc == '\\')
            t.text += esc;
          else {
            error(t.pos, std::string("unknown escape '\\") + esc + "' in string");
            t.text += esc;
          }
        } else {
          t.text += ch;
        }
      }
      if (at_end() || peek() != '"') {
        error(t.pos, "unterminated string literal");
        t.kind = Tok::bad;
        return t;
      }
      take();
      t.kind = Tok::string;
      return t;
    }
    take();
    switch (c) {
      case '{': t.kind = Tok::lbrace; return t;
      case '}': t.kind = Tok::rbrace; return t;
      case '(': t.kind = Tok::lparen; return t;
      case ')': t.kind = Tok::rparen; return t;
      case ';': t.kind = Tok::semi; return t;
      case ':': t.kind = Tok::colon; return t;
      case '.': t.kind = Tok::dot; return t;
      case ',': t.kind = Tok::comma; return t;
      case '+': t.kind = Tok::plus; return t;
      case '*': t.kind = Tok::star; return t;
      case '|': t.kind = Tok::pipe; return t;
      case '-':
        if (!at_end() && peek() == '>') {
          take();
          t.kind = Tok::arrow;
        } else {
          t.kind = Tok::minus;
        }
        return t;
      case '=':
        if (!at_end() && peek() == '=') {
          take();
          t.kind = Tok::eq;
        } else {
          t.kind = Tok::assign;
        }
        return t;
      case '!':
        if (!at_end() && peek() == '=') {
          take();
          t.kind = Tok::ne;
          return t;
        }
        break;
      case '<':
        if (!at_end() && peek() == '=') {
          take();
          t.kind = Tok::le;
        } else {
          t.kind = Tok::lt;
        }
        return t;
      case '>':
        if (!at_end() && peek() == '=') {
          take();
          t.kind = Tok::ge;
        } else {
          t.kind = Tok::gt;
        }
        return t;
      default: break;
    }
    error(t.pos, std::string("illegal character '") + c + "'");
    t.kind = Tok::bad;
    return t;
  }

 private:
  bool at_end() const { return i_ >= src_.size(); }
  char peek() const { return src_[i_]; }

  char take() {
    char c = src_[i_++];
    if (c == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    return c;
  }

  void skip_space() {
    while (!at_end()) {
      char c = peek();
      if (c == '/' && i_ + 1 < src_.size() && src_[i_ + 1] == '/') {
        while (!at_end() && peek() != '\n') take();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        take();
      } else {
        break;
      }
    }
  }

  void error(SourcePosition pos, std::string msg) {
    diags_.push_back({Severity::error, std::move(msg), pos});
  }

  std::string_view src_;
  std::vector<ParseDiagnostic>& diags_;
  size_t i_ = 0;
  int line_ = 1;
  int col_ = 1;
};

const char* tok_name(Tok k) {
  switch (k) {
    case Tok::ident: return "identifier";
    case Tok::integer: return "integer";
    case Tok::string: return "string";
    case Tok::lbrace: return "'{'";
    case Tok::rbrace: return "'}'";
    case Tok::lparen: return "'('";
    case Tok::rparen: return "')'";
    case Tok::semi: return "';'";
    case Tok::colon: return "':'";
    case Tok::dot: return "'.'";
    case Tok::comma: return "','";
    case Tok::arrow: return "'->'";
    case Tok::assign: return "'='";
    case Tok::eq: return "'=='";
    case Tok::ne: return "'!='";
    case Tok::lt: return "'<'";
    case Tok::le: return "'<='";
    case Tok::gt: return "'>'";
    case Tok::ge: return "'>='";
    case Tok::plus: return "'+'";
    case Tok::minus: return "'-'";
    case Tok::star: return "'*'";
    case Tok::pipe: return "'|'";
    case Tok::eof: return "end of input";
    case Tok::bad: return "bad token";
  }
  return "?";
}

class Parser {
 public:
  explicit Parser(std::string_view src) : lexer_(src, diags_) {
    cur_ = lexer_.next();
  }

  ParseResult run() {
    Model m = parse_model_decl();
    ParseResult r;
    r.diagnostics = std::move(diags_);
    bool failed = false;
    for (const auto& d : r.diagnostics)
      if (d.severity == Severity::error) failed = true;
    if (!failed) r.model = std::move(m);
    return r;
  }

 private:
  // ---- token plumbing ----

  const Token& cur() const { return cur_; }

  Token advance() {
    Token prev = cur_;
    cur_ = lexer_.next();
    return prev;
  }

  bool at(Tok k) const { return cur_.kind == k; }

  bool at_word(const char* w) const {
    return cur_.kind == Tok::ident && cur_.text == w;
  }

  bool eat(Tok k) {
    if (!at(k)) return false;
    advance();
    return true;
  }

  bool eat_word(const char* w) {
    if (!at_word(w)) return false;
    advance();
    return true;
  }

  void error_here(const std::string& msg) {
    diags_.push_back({Severity::error, msg, cur_.pos});
  }

  void error_at(SourcePosition pos, const std::string& msg) {
    diags_.push_back({Severity::error, msg, pos});
  }

  bool expect(Tok k, const char* what) {
    if (eat(k)) return true;
    error_here(std::string("expected ") + what + ", got " + describe(cur_));
    return false;
  }

  bool expect_word(const char* w) {
    if (eat_word(w)) return true;
    error_here(std::string("expected '") + w + "', got " + describe(cur_));
    return false;
  }

  static std::string describe(const Token& t) {
    if (t.kind == Tok::ident || t.kind == Tok::integer)
      return "'" + t.text + "'";
    return tok_name(t.kind);
  }

  std::string expect_ident(const char* what) {
    if (at(Tok::ident)) return advance().text;
    error_here(std::string("expected ") + what + ", got " + describe(cur_));
    return "";
  }

  // Skip to just past the next ';', or stop before '}' / end of input.
  void sync_to_semi() {
    while (!at(Tok::eof)) {
      if (at(Tok::semi)) {
        advance();
        return;
      }
      if (at(Tok::rbrace)) return;
      advance();
    }
  }

  // ---- grammar ----

  Model parse_model_decl() {
    Model m;
    expect_word("model");
    m.name = expect_ident("model name");
    expect(Tok::lbrace, "'{'");
    while (!at(Tok::rbrace) && !at(Tok::eof)) {
      if (at_word("thing"))
        parse_thing(m);
      else if (at_word("machine")) {
        SourcePosition pos = cur_.pos;
        Machine mach = parse_machine(m, "");
        bool dup = false;
        for (const auto& other : m.machines)
          if (other.name == mach.name) dup = true;
        if (dup)
          error_at(pos, "duplicate machine '" + mach.name + "' at model root");
        else
          m.machines.push_back(std::move(mach));
      } else if (at_word("flow"))
        parse_flow(m);
      else if (at_word("trigger"))
        parse_trigger(m);
      else if (at_word("event"))
        parse_event(m);
      else if (at_word("chronology"))
        parse_chronology(m);
      else {
        error_here("expected thing, machine, flow, trigger, event or "
                   "chronology, got " + describe(cur_));
        sync_to_semi();
        if (at(Tok::rbrace)) break;
      }
    }
    expect(Tok::rbrace, "'}'");
    if (!at(Tok::eof)) error_here("trailing input after model");
    return m;
  }

  void parse_thing(Model& m) {
    advance();  // thing
    ThingType t;
    SourcePosition pos = cur_.pos;
    t.name = expect_ident("thing name");
    if (eat_word("is")) t.supertype = expect_ident("supertype name");
    if (eat(Tok::lbrace)) {
      std::set<std::string> names;
      while (!at(Tok::rbrace) && !at(Tok::eof)) {
        Attribute a;
        SourcePosition apos = cur_.pos;
        a.name = expect_ident("attribute name");
        if (a.name.empty()) {
          sync_to_semi();
          continue;
        }
        expect(Tok::colon, "':'");
        if (eat_word("int"))
          a.kind = AttrKind::integer;
        else if (eat_word("text"))
          a.kind = AttrKind::text;
        else {
          error_here("expected attribute kind (int or text), got " +
                     describe(cur_));
          sync_to_semi();
          continue;
        }
        expect(Tok::semi, "';'");
        if (!names.insert(a.name).second)
          error_at(apos, "duplicate attribute '" + a.name + "' in thing '" +
                             t.name + "'");
        else
          t.attributes.push_back(std::move(a));
      }
      expect(Tok::rbrace, "'}'");
    }
    expect(Tok::semi, "';'");
    if (m.find_thing(t.name)) {
      error_at(pos, "duplicate thing '" + t.name + "'");
      return;
    }
    if (!t.name.empty()) m.things.push_back(std::move(t));
  }

  Machine parse_machine(Model& m, const std::string& parent_path) {
    advance();  // machine
    Machine mach;
    mach.name = expect_ident("machine name");
    std::string path =
        parent_path.empty() ? mach.name : parent_path + "." + mach.name;
    expect(Tok::lbrace, "'{'");
    while (!at(Tok::rbrace) && !at(Tok::eof)) {
      if (at_word("stage")) {
        SourcePosition pos = cur_.pos;
        advance();
        auto kind = parse_stage_kind();
        expect(Tok::semi, "';'");
        if (kind) {
          if (mach.declares(*kind))
            error_at(pos, "duplicate stage '" + std::string(to_string(*kind)) +
                              "' in machine '" + path + "'");
          else
            mach.stages.push_back(*kind);
        }
      } else if (at_word("store")) {
        SourcePosition pos = cur_.pos;
        advance();
        expect_word("after");
        auto kind = parse_stage_kind();
        StoreDecl st;
        if (eat_word("hold")) st.hold = true;
        expect(Tok::semi, "';'");
        if (kind) {
          st.stage = *kind;
          if (mach.store_for(st.stage))
            error_at(pos, "duplicate store after '" +
                              std::string(to_string(st.stage)) +
                              "' in machine '" + path + "'");
          else
            mach.stores.push_back(st);
        }
      } else if (at_word("machine")) {
        SourcePosition pos = cur_.pos;
        Machine sub = parse_machine(m, path);
        bool dup = false;
        for (const auto& s : mach.submachines)
          if (s.name == sub.name) dup = true;
        if (dup)
          error_at(pos, "duplicate machine '" + sub.name + "' under '" + path +
                            "'");
        else
          mach.submachines.push_back(std::move(sub));
      } else {
        error_here("expected stage, store or machine, got " + describe(cur_));
        sync_to_semi();
        if (at(Tok::rbrace)) break;
      }
    }
    expect(Tok::rbrace, "'}'");
    return mach;
  }

  std::optional<StageKind> parse_stage_kind() {
    if (at(Tok::ident)) {
      auto k = stage_kind_from(cur_.text);
      if (k) {
        advance();
        return k;
      }
    }
    error_here("expected stage kind (create, process, release, transfer, "
               "receive), got " + describe(cur_));
    if (at(Tok::ident)) advance();
    return std::nullopt;
  }

  std::optional<StageRef> parse_stage_ref() {
    StageRef ref;
    std::vector<std::pair<std::string, SourcePosition>> parts;
    if (!at(Tok::ident)) {
      error_here("expected stage reference, got " + describe(cur_));
      return std::nullopt;
    }
    parts.emplace_back(cur_.text, cur_.pos);
    advance();
    while (eat(Tok::dot)) {
      if (!at(Tok::ident)) {
        error_here("expected identifier after '.', got " + describe(cur_));
        return std::nullopt;
      }
      parts.emplace_back(cur_.text, cur_.pos);
      advance();
    }
    if (parts.size() < 2) {
      error_at(parts[0].second,
               "stage reference needs a machine path, e.g. A." +
                   parts[0].first);
      return std::nullopt;
    }
    auto kind = stage_kind_from(parts.back().first);
    if (!kind) {
      error_at(parts.back().second,
               "expected stage kind (create, process, release, transfer, "
               "receive), got '" + parts.back().first + "'");
      return std::nullopt;
    }
    ref.stage = *kind;
    for (size_t i = 0; i + 1 < parts.size(); ++i)
      ref.machine_path.push_back(parts[i].first);
    return ref;
  }

  void parse_flow(Model& m) {
    advance();  // flow
    SourcePosition pos = cur_.pos;
    std::string name = expect_ident("flow name");
    for (const auto& e : m.flows)
      if (e.flow_name == name) {
        error_at(pos, "duplicate flow '" + name + "'");
        break;
      }
    if (!expect_word("of")) {
      sync_to_semi();
      return;
    }
    std::string thing = expect_ident("thing name");
    if (!expect(Tok::colon, "':'")) {
      sync_to_semi();
      return;
    }
    std::vector<StageRef> path;
    auto first = parse_stage_ref();
    if (!first) {
      sync_to_semi();
      return;
    }
    path.push_back(*first);
    while (eat(Tok::arrow)) {
      auto next = parse_stage_ref();
      if (!next) {
        sync_to_semi();
        return;
      }
      path.push_back(*next);
    }
    if (path.size() < 2)
      error_here("flow needs at least one '->' step");
    expect(Tok::semi, "';'");
    bool dup = m.has_flow(name);
    if (!dup && !name.empty())
      for (size_t i = 0; i + 1 < path.size(); ++i)
        m.flows.push_back(
            {name, thing, path[i], path[i + 1], static_cast<int>(i)});
  }

  std::optional<AttrRef> parse_attr_ref() {
    AttrRef r;
    r.thing = expect_ident("thing name");
    if (r.thing.empty()) return std::nullopt;
    if (!expect(Tok::dot, "'.'")) return std::nullopt;
    r.attribute = expect_ident("attribute name");
    if (r.attribute.empty()) return std::nullopt;
    return r;
  }

  ExprPtr parse_expr() { return parse_additive(); }

  ExprPtr parse_additive() {
    ExprPtr left = parse_multiplicative();
    while (left && (at(Tok::plus) || at(Tok::minus))) {
      ExprOp op = at(Tok::plus) ? ExprOp::add : ExprOp::sub;
      advance();
      ExprPtr right = parse_multiplicative();
      if (!right) return nullptr;
      left = make_binary_expr(op, left, right);
    }
    return left;
  }

  ExprPtr parse_multiplicative() {
    ExprPtr left = parse_primary();
    while (left && at(Tok::star)) {
      advance();
      ExprPtr right = parse_primary();
      if (!right) return nullptr;
      left = make_binary_expr(ExprOp::mul, left, right);
    }
    return left;
  }

  ExprPtr parse_primary() {
    if (at(Tok::integer)) return make_int_expr(advance().value);
    if (eat(Tok::lparen)) {
      ExprPtr inner = parse_expr();
      expect(Tok::rparen, "')'");
      return inner;
    }
    if (at(Tok::ident)) {
      auto ref = parse_attr_ref();
      if (!ref) return nullptr;
      return make_attr_expr(*ref);
    }
    error_here("expected integer, attribute reference or '(', got " +
               describe(cur_));
    return nullptr;
  }

  std::optional<Operand> parse_operand() {
    if (at(Tok::integer)) return Operand{advance().value};
    if (at(Tok::ident)) {
      auto ref = parse_attr_ref();
      if (!ref) return std::nullopt;
      return Operand{*ref};
    }
    error_here("expected integer or attribute reference, got " +
               describe(cur_));
    return std::nullopt;
  }

  std::optional<GuardExpr> parse_guard() {
    GuardExpr g;
    auto left = parse_operand();
    if (!left) return std::nullopt;
    g.left = *left;
    switch (cur_.kind) {
      case Tok::lt: g.op = CmpOp::lt; break;
      case Tok::le: g.op = CmpOp::le; break;
      case Tok::eq: g.op = CmpOp::eq; break;
      case Tok::ge: g.op = CmpOp::ge; break;
      case Tok::gt: g.op = CmpOp::gt; break;
      case Tok::ne: g.op = CmpOp::ne; break;
      default:
        error_here("expected comparison operator, got " + describe(cur_));
        return std::nullopt;
    }
    advance();
    auto right = parse_operand();
    if (!right) return std::nullopt;
    g.right = *right;
    return g;
  }

  void parse_trigger(Model& m) {
    advance();  // trigger
    TriggerEdge t;
    SourcePosition pos = cur_.pos;
    t.name = expect_ident("trigger name");
    if (!expect(Tok::colon, "':'")) {
      sync_to_semi();
      return;
    }
    auto src = parse_stage_ref();
    if (!src) {
      sync_to_semi();
      return;
    }
    t.source = *src;
    if (!expect(Tok::arrow, "'->'")) {
      sync_to_semi();
      return;
    }
    bool ok = parse_action(t.action);
    if (!ok) {
      sync_to_semi();
      return;
    }
    if (eat_word("when")) {
      auto g = parse_guard();
      if (!g) {
        sync_to_semi();
        return;
      }
      t.guard = *g;
    }
    if (eat_word("after")) {
      if (at(Tok::integer)) {
        t.delay = advance().value;
      } else {
        error_here("expected tick count after 'after', got " + describe(cur_));
        sync_to_semi();
        return;
      }
    }
    expect(Tok::semi, "';'");
    if (m.find_trigger(t.name)) {
      error_at(pos, "duplicate trigger '" + t.name + "'");
      return;
    }
    if (!t.name.empty()) m.triggers.push_back(std::move(t));
  }

  bool parse_action(ActionSpec& a) {
    if (eat_word("activate")) {
      a.kind = ActionKind::activate;
      auto s = parse_stage_ref();
      if (!s) return false;
      a.stage = *s;
      return true;
    }
    if (eat_word("create")) {
      a.kind = ActionKind::create_thing;
      a.thing = expect_ident("thing name");
      if (a.thing.empty()) return false;
      if (!expect_word("at")) return false;
      auto s = parse_stage_ref();
      if (!s) return false;
      a.stage = *s;
      return true;
    }
    if (eat_word("delete")) {
      a.kind = ActionKind::delete_thing;
      a.thing = expect_ident("thing name");
      return !a.thing.empty();
    }
    if (eat_word("set")) {
      a.kind = ActionKind::set_attr;
      auto ref = parse_attr_ref();
      if (!ref) return false;
      a.thing = ref->thing;
      a.attribute = ref->attribute;
      if (!expect(Tok::assign, "'='")) return false;
      a.expr = parse_expr();
      return a.expr != nullptr;
    }
    if (eat_word("cancel")) {
      a.kind = ActionKind::cancel_trigger;
      a.trigger = expect_ident("trigger name");
      return !a.trigger.empty();
    }
    if (eat_word("resume")) {
      a.kind = ActionKind::resume_thing;
      a.thing = expect_ident("thing name");
      if (a.thing.empty()) return false;
      if (!expect_word("at")) return false;
      auto s = parse_stage_ref();
      if (!s) return false;
      a.stage = *s;
      return true;
    }
    error_here("expected action (activate, create, delete, set, cancel or "
               "resume), got " + describe(cur_));
    return false;
  }

  void parse_event(Model& m) {
    advance();  // event
    Event e;
    SourcePosition pos = cur_.pos;
    e.id = expect_ident("event id");
    if (at(Tok::string)) e.label = advance().text;
    if (!expect(Tok::lbrace, "'{'")) {
      sync_to_semi();
      return;
    }
    while (!at(Tok::rbrace) && !at(Tok::eof)) {
      if (at_word("flow")) {
        advance();
        std::string f = expect_ident("flow name");
        if (f.empty()) break;
        e.elements.push_back(FlowElementRef{f});
      } else if (at_word("trigger")) {
        advance();
        std::string t = expect_ident("trigger name");
        if (t.empty()) break;
        e.elements.push_back(TriggerElementRef{t});
      } else if (at(Tok::ident)) {
        auto s = parse_stage_ref();
        if (!s) break;
        e.elements.push_back(*s);
      } else {
        error_here("expected event element (flow NAME, trigger NAME or a "
                   "stage reference), got " + describe(cur_));
        break;
      }
    }
    expect(Tok::rbrace, "'}'");
    if (e.elements.empty()) {
      error_at(pos, "event '" + e.id + "' needs at least one element");
      return;
    }
    e.anchor = e.elements.back();
    if (m.find_event(e.id)) {
      error_at(pos, "duplicate event '" + e.id + "'");
      return;
    }
    if (!e.id.empty()) m.events.push_back(std::move(e));
  }

  void parse_chronology(Model& m) {
    SourcePosition pos = cur_.pos;
    advance();  // chronology
    if (seen_chronology_)
      error_at(pos, "duplicate chronology block");
    seen_chronology_ = true;
    expect(Tok::lbrace, "'{'");
    while (!at(Tok::rbrace) && !at(Tok::eof)) {
      std::string from = expect_ident("event id");
      if (from.empty()) {
        sync_to_semi();
        continue;
      }
      if (!expect(Tok::arrow, "'->'")) {
        sync_to_semi();
        continue;
      }
      if (eat(Tok::lbrace)) {
        ChronologyBranch br;
        br.from = from;
        std::string alt = expect_ident("event id");
        if (!alt.empty()) br.alternatives.push_back(alt);
        while (eat(Tok::pipe)) {
          alt = expect_ident("event id");
          if (!alt.empty()) br.alternatives.push_back(alt);
        }
        expect(Tok::rbrace, "'}'");
        expect(Tok::semi, "';'");
        if (br.alternatives.size() < 2) {
          error_at(pos, "branch from '" + from +
                            "' needs at least two alternatives");
          continue;
        }
        m.chronology.branches.push_back(std::move(br));
      } else {
        std::string to = expect_ident("event id");
        expect(Tok::semi, "';'");
        if (!to.empty()) m.chronology.edges.emplace_back(from, to);
      }
    }
    expect(Tok::rbrace, "'}'");
  }

  std::vector<ParseDiagnostic> diags_;
  Lexer lexer_;
  Token cur_;
  bool seen_chronology_ = false;
};

}  // namespace

ParseResult parse_model(std::string_view source) {
  Parser p(source);
  return p.run();
}

}  // namespace tmkit
