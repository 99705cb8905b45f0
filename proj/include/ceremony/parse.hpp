#pragma once

#include <cctype>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ceremony/spec.hpp"

namespace ceremony {

struct ParseResult {
  std::optional<CeremonySpec> spec;
  std::vector<Diagnostic> diagnostics;

  bool ok() const { return spec.has_value() && !has_errors(diagnostics); }
};

namespace detail {

struct Token {
  std::string text;
  int line = 0;
  int column = 0;
  bool is_word = false;  // identifier or keyword, as opposed to punctuation
};

// Lexes one physical line. `#` starts a comment. `requires-before` is the
// only word token that may contain a hyphen.
inline std::vector<Token> lex_line(const std::string& text, int line_no) {
  std::vector<Token> out;
  size_t i = 0;
  while (i < text.size()) {
    char c = text[i];
    if (c == '#') break;
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    int col = static_cast<int>(i) + 1;
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      size_t j = i;
      while (j < text.size() &&
             (std::isalnum(static_cast<unsigned char>(text[j])) ||
              text[j] == '_')) {
        ++j;
      }
      std::string word = text.substr(i, j - i);
      if (word == "requires" && text.compare(j, 7, "-before") == 0) {
        word = "requires-before";
        j += 7;
      }
      out.push_back({word, line_no, col, true});
      i = j;
    } else {
      out.push_back({std::string(1, c), line_no, col, false});
      ++i;
    }
  }
  return out;
}

class Parser {
 public:
  explicit Parser(const std::string& source) {
    std::istringstream in(source);
    std::string line;
    int n = 0;
    while (std::getline(in, line)) {
      ++n;
      auto toks = lex_line(line, n);
      if (!toks.empty()) lines_.push_back(std::move(toks));
    }
  }

  ParseResult run() {
    if (lines_.empty()) {
      error(0, 0, "no ceremony declared");
      return {std::nullopt, diags_};
    }
    parse_ceremony_line();
    parse_agents_line();
    while (at_keyword("messages")) parse_messages_line();
    if (!at_keyword("role"))
      error_here("expected 'role' after agent declarations");
    while (at_keyword("role")) parse_role();
    while (at_keyword("property")) parse_property();
    if (pos_ < lines_.size()) error_here("unexpected statement");
    if (has_errors(diags_)) return {std::nullopt, diags_};
    resolve_dependencies();
    return {std::move(spec_), diags_};
  }

 private:
  std::vector<std::vector<Token>> lines_;
  size_t pos_ = 0;
  CeremonySpec spec_;
  std::vector<Diagnostic> diags_;

  const std::vector<Token>* current() const {
    return pos_ < lines_.size() ? &lines_[pos_] : nullptr;
  }

  bool at_keyword(const std::string& kw) const {
    const auto* l = current();
    return l && !l->empty() && (*l)[0].is_word && (*l)[0].text == kw;
  }

  void error(int line, int col, const std::string& msg) {
    diags_.push_back({Severity::error, line, col, msg});
  }

  void error_here(const std::string& msg) {
    if (const auto* l = current())
      error((*l)[0].line, (*l)[0].column, msg);
    else if (!lines_.empty())
      error(lines_.back()[0].line, 0, msg);
    else
      error(0, 0, msg);
  }

  // --- per-line cursor helpers ---

  struct Cursor {
    const std::vector<Token>* toks;
    size_t i = 0;

    const Token* peek() const { return i < toks->size() ? &(*toks)[i] : nullptr; }
    const Token* next() { return i < toks->size() ? &(*toks)[i++] : nullptr; }
    bool done() const { return i >= toks->size(); }
    int end_line() const { return toks->empty() ? 0 : (*toks)[0].line; }
  };

  Cursor take_line() {
    Cursor c{current()};
    ++pos_;
    return c;
  }

  bool expect_word(Cursor& c, const std::string& what, std::string* out) {
    const Token* t = c.next();
    if (!t || !t->is_word) {
      error(t ? t->line : c.end_line(), t ? t->column : 0,
            "expected " + what);
      return false;
    }
    *out = t->text;
    return true;
  }

  bool expect_punct(Cursor& c, char p) {
    const Token* t = c.next();
    if (!t || t->is_word || t->text[0] != p) {
      error(t ? t->line : c.end_line(), t ? t->column : 0,
            std::string("expected '") + p + "'");
      return false;
    }
    return true;
  }

  void expect_line_end(Cursor& c) {
    if (const Token* t = c.peek())
      error(t->line, t->column, "unexpected trailing token '" + t->text + "'");
  }

  bool parse_atom(Cursor& c, MessageAtom* out) {
    const Token* t = c.peek();
    std::string name;
    if (!expect_word(c, "message name", &name)) return false;
    if (!is_valid_atom_name(name)) {
      error(t->line, t->column,
            "message name must not begin with the negation marker 'not_'");
      return false;
    }
    *out = MessageAtom{name, false};
    return true;
  }

  // --- statements ---

  void parse_ceremony_line() {
    if (!at_keyword("ceremony")) {
      error_here("no ceremony declared");
      pos_ = lines_.size();
      return;
    }
    Cursor c = take_line();
    c.next();
    expect_word(c, "ceremony name", &spec_.name);
    expect_line_end(c);
  }

  void parse_agents_line() {
    if (!at_keyword("agents")) {
      error_here("expected 'agents:' declaration");
      return;
    }
    Cursor c = take_line();
    c.next();
    if (!expect_punct(c, ':')) return;
    while (true) {
      const Token* t = c.peek();
      std::string name;
      if (!expect_word(c, "agent name", &name)) return;
      AgentId agent{name};
      if (spec_.has_agent(agent))
        error(t->line, t->column, "duplicate agent '" + name + "'");
      else
        spec_.agents.push_back(agent);
      if (c.done()) break;
      if (!expect_punct(c, ',')) return;
    }
  }

  void parse_messages_line() {
    Cursor c = take_line();
    const Token* kw = c.next();
    if (!expect_punct(c, ':')) return;
    const Token* at = c.peek();
    std::string agent_name, dir;
    if (!expect_word(c, "agent name", &agent_name)) return;
    AgentId agent{agent_name};
    if (!spec_.has_agent(agent)) {
      error(at->line, at->column, "unknown agent '" + agent_name + "'");
      return;
    }
    if (!expect_word(c, "'sends' or 'recvs'", &dir)) return;
    if (dir != "sends" && dir != "recvs") {
      error(kw->line, kw->column, "expected 'sends' or 'recvs'");
      return;
    }
    std::set<MessageAtom> atoms;
    while (true) {
      MessageAtom m;
      if (!parse_atom(c, &m)) return;
      atoms.insert(m);
      if (c.done()) break;
      if (!expect_punct(c, ',')) return;
    }
    auto& dst = dir == "sends" ? spec_.pinned_sends : spec_.pinned_recvs;
    dst[agent] = std::move(atoms);
  }

  void parse_role() {
    Cursor c = take_line();
    const Token* kw = c.next();
    std::string agent_name;
    if (!expect_word(c, "agent name", &agent_name)) return;
    if (!expect_punct(c, ':')) return;
    expect_line_end(c);
    AgentId agent{agent_name};
    if (!spec_.has_agent(agent))
      error(kw->line, kw->column, "unknown agent '" + agent_name + "'");
    if (spec_.script_for(agent))
      error(kw->line, kw->column, "duplicate role for agent '" + agent_name + "'");
    RoleScript script{agent, {}};
    while (pos_ < lines_.size() && !at_keyword("role") &&
           !at_keyword("property")) {
      parse_event(agent, &script);
    }
    spec_.scripts.push_back(std::move(script));
  }

  void parse_event(const AgentId& agent, RoleScript* script) {
    Cursor c = take_line();
    const Token* kw = c.next();
    if (!kw->is_word) {
      error(kw->line, kw->column, "expected an event");
      return;
    }
    if (kw->text == "start") {
      expect_line_end(c);
      script->events.push_back(StartEvent{agent, kw->line});
    } else if (kw->text == "action") {
      std::string verb, object;
      if (!expect_word(c, "action verb", &verb)) return;
      if (!expect_punct(c, '(')) return;
      if (!expect_word(c, "action object", &object)) return;
      if (!expect_punct(c, ')')) return;
      ActionEvent ev{agent, verb, object, std::nullopt, kw->line};
      if (const Token* t = c.peek(); t && t->is_word && t->text == "requires") {
        c.next();
        RequiresClause req;
        if (!expect_word(c, "prerequisite verb", &req.verb)) return;
        if (!expect_punct(c, '(')) return;
        if (!expect_word(c, "prerequisite object", &req.object)) return;
        if (!expect_punct(c, ')')) return;
        ev.requires_clause = req;
      }
      expect_line_end(c);
      script->events.push_back(std::move(ev));
    } else if (kw->text == "send") {
      std::string receiver;
      MessageAtom msg;
      const Token* rt = c.peek();
      if (!expect_word(c, "receiver agent", &receiver)) return;
      if (!spec_.has_agent(AgentId{receiver}))
        error(rt->line, rt->column, "unknown agent '" + receiver + "'");
      if (!parse_atom(c, &msg)) return;
      expect_line_end(c);
      script->events.push_back(SendEvent{agent, AgentId{receiver}, msg, kw->line});
    } else if (kw->text == "recv") {
      std::string sender;
      MessageAtom msg;
      const Token* st = c.peek();
      if (!expect_word(c, "sender agent", &sender)) return;
      if (!spec_.has_agent(AgentId{sender}))
        error(st->line, st->column, "unknown agent '" + sender + "'");
      if (!parse_atom(c, &msg)) return;
      expect_line_end(c);
      script->events.push_back(ReceiveEvent{AgentId{sender}, agent, msg, kw->line});
    } else {
      error(kw->line, kw->column, "unknown event '" + kw->text + "'");
    }
  }

  bool parse_pattern(Cursor& c, ActionPattern* out) {
    const Token* at = c.peek();
    std::string agent, verb;
    if (!expect_word(c, "agent name", &agent)) return false;
    if (!spec_.has_agent(AgentId{agent}))
      error(at->line, at->column, "unknown agent '" + agent + "'");
    if (!expect_punct(c, '.')) return false;
    if (!expect_word(c, "action verb", &verb)) return false;
    std::optional<std::string> object;
    if (const Token* t = c.peek(); t && !t->is_word && t->text == "(") {
      c.next();
      std::string obj;
      if (!expect_word(c, "action object", &obj)) return false;
      if (!expect_punct(c, ')')) return false;
      object = obj;
    }
    *out = ActionPattern{AgentId{agent}, verb, object};
    return true;
  }

  void parse_property() {
    Cursor c = take_line();
    const Token* kw = c.next();
    PropertySpec prop;
    const Token* nt = c.peek();
    if (!expect_word(c, "property name", &prop.name)) return;
    for (const auto& p : spec_.properties)
      if (p.name == prop.name)
        error(nt->line, nt->column, "duplicate property name '" + prop.name + "'");
    if (!expect_punct(c, ':')) return;
    std::string on;
    if (!expect_word(c, "'on'", &on) || on != "on") {
      error(kw->line, kw->column, "expected 'on' clause");
      return;
    }
    if (!parse_pattern(c, &prop.antecedent)) return;
    if (const Token* t = c.peek(); t && t->is_word && t->text == "requires-before") {
      c.next();
      prop.mode = PropertyMode::forall_traces;
      while (true) {
        ActionPattern pat;
        if (!parse_pattern(c, &pat)) return;
        prop.prerequisites.push_back(std::move(pat));
        if (c.done()) break;
        if (!expect_punct(c, '<')) return;
      }
    } else {
      prop.mode = PropertyMode::exists_trace;
    }
    expect_line_end(c);
    spec_.properties.push_back(std::move(prop));
  }

  // Requires clauses name the prerequisite by verb and object; the agent is
  // whoever performs that action in some script. Unresolvable or ambiguous
  // clauses are left out here and reported by validate_spec.
  void resolve_dependencies() {
    for (const auto& script : spec_.scripts) {
      for (const auto& ev : script.events) {
        const auto* act = std::get_if<ActionEvent>(&ev);
        if (!act || !act->requires_clause) continue;
        const auto& req = *act->requires_clause;
        std::vector<AgentId> performers;
        for (const auto& other : spec_.scripts)
          for (const auto& oe : other.events)
            if (const auto* oa = std::get_if<ActionEvent>(&oe))
              if (oa->verb == req.verb && oa->object == req.object &&
                  (performers.empty() || performers.back() != other.agent))
                performers.push_back(other.agent);
        if (performers.size() != 1) continue;
        spec_.dependencies.push_back(
            {ActionPattern{act->agent, act->verb, act->object},
             ActionPattern{performers[0], req.verb, req.object}});
      }
    }
  }
};

}  // namespace detail

inline ParseResult parse_ceremony(const std::string& source) {
  return detail::Parser(source).run();
}

// Canonical pretty-printer. Re-parsing the output yields a spec that is
// structurally equal to the input.
inline std::string print_ceremony(const CeremonySpec& spec) {
  std::ostringstream out;
  out << "ceremony " << spec.name << "\n\n";
  out << "agents:";
  for (size_t i = 0; i < spec.agents.size(); ++i)
    out << (i ? ", " : " ") << spec.agents[i].name;
  out << "\n";
  auto print_pins = [&](const std::map<AgentId, std::set<MessageAtom>>& pins,
                        const char* dir) {
    for (const auto& [agent, atoms] : pins) {
      out << "messages: " << agent.name << " " << dir;
      bool first = true;
      for (const auto& m : atoms) {
        out << (first ? " " : ", ") << m.label();
        first = false;
      }
      out << "\n";
    }
  };
  print_pins(spec.pinned_sends, "sends");
  print_pins(spec.pinned_recvs, "recvs");
  for (const auto& script : spec.scripts) {
    out << "\nrole " << script.agent.name << ":\n";
    for (const auto& ev : script.events) {
      out << "  ";
      if (std::holds_alternative<StartEvent>(ev)) {
        out << "start";
      } else if (const auto* a = std::get_if<ActionEvent>(&ev)) {
        out << "action " << a->verb << "(" << a->object << ")";
        if (a->requires_clause)
          out << " requires " << a->requires_clause->verb << "("
              << a->requires_clause->object << ")";
      } else if (const auto* s = std::get_if<SendEvent>(&ev)) {
        out << "send " << s->receiver.name << " " << s->message.label();
      } else if (const auto* r = std::get_if<ReceiveEvent>(&ev)) {
        out << "recv " << r->sender.name << " " << r->expected.label();
      }
      out << "\n";
    }
  }
  if (!spec.properties.empty()) out << "\n";
  for (const auto& p : spec.properties) {
    out << "property " << p.name << ": on " << p.antecedent.to_string();
    if (p.mode == PropertyMode::forall_traces) {
      out << " requires-before";
      for (size_t i = 0; i < p.prerequisites.size(); ++i)
        out << (i ? " < " : " ") << p.prerequisites[i].to_string();
    }
    out << "\n";
  }
  return out.str();
}

namespace detail {

inline int event_line(const ScriptEvent& e) {
  return std::visit([](const auto& ev) { return ev.line; }, e);
}

}  // namespace detail

// Structural validation of a parsed spec. Diagnostics come back sorted by
// location; an empty list means every invariant holds.
inline std::vector<Diagnostic> validate_spec(const CeremonySpec& spec) {
  std::vector<Diagnostic> diags;
  auto err = [&](int line, const std::string& msg) {
    diags.push_back({Severity::error, line, 0, msg});
  };

  for (const auto& agent : spec.agents)
    if (!spec.script_for(agent))
      err(0, "no role declared for agent '" + agent.name + "'");

  // Script shape: a single start event, first in the script.
  for (const auto& script : spec.scripts) {
    if (script.events.empty())
      err(0, "role " + script.agent.name + " must begin with start");
    for (size_t i = 0; i < script.events.size(); ++i) {
      bool is_start = std::holds_alternative<StartEvent>(script.events[i]);
      if (i == 0 && !is_start)
        err(detail::event_line(script.events[i]),
            "role " + script.agent.name + " must begin with start");
      if (i > 0 && is_start)
        err(detail::event_line(script.events[i]),
            "start must be the first event of role " + script.agent.name);
    }
  }

  // Message-set discipline, against pinned sets where given.
  for (const auto& script : spec.scripts) {
    auto sends = spec.send_set(script.agent);
    auto recvs = spec.recv_set(script.agent);
    for (const auto& ev : script.events) {
      if (const auto* s = std::get_if<SendEvent>(&ev)) {
        if (!sends.count(MessageAtom{s->message.name, false}))
          err(s->line, "message not in sender's send set: " + s->message.label() +
                           " sent by " + script.agent.name);
      } else if (const auto* r = std::get_if<ReceiveEvent>(&ev)) {
        if (!recvs.count(MessageAtom{r->expected.name, false}))
          err(r->line, "message not in receiver's recv set: " +
                           r->expected.label() + " expected by " +
                           script.agent.name);
      }
    }
  }

  // Send/receive pairing. Keys must be unique so that every receive has
  // exactly one producing send (a send may go unreceived).
  std::map<std::tuple<AgentId, AgentId, std::string>, int> send_count;
  for (const auto& script : spec.scripts)
    for (const auto& ev : script.events)
      if (const auto* s = std::get_if<SendEvent>(&ev)) {
        auto key = std::make_tuple(s->sender, s->receiver, s->message.name);
        if (++send_count[key] > 1)
          err(s->line, "duplicate send of " + s->message.label() + " from " +
                           s->sender.name + " to " + s->receiver.name);
      }
  std::map<std::tuple<AgentId, AgentId, std::string>, int> recv_count;
  for (const auto& script : spec.scripts)
    for (const auto& ev : script.events)
      if (const auto* r = std::get_if<ReceiveEvent>(&ev)) {
        auto key = std::make_tuple(r->sender, r->receiver, r->expected.name);
        if (++recv_count[key] > 1)
          err(r->line, "duplicate receive of " + r->expected.label() + " by " +
                           r->receiver.name);
        if (!send_count.count(key))
          err(r->line, "unmatched receive: no send of " + r->expected.label() +
                           " from " + r->sender.name + " to " +
                           r->receiver.name);
      }

  // Dependency prerequisites must name an action some script performs,
  // unambiguously.
  for (const auto& script : spec.scripts) {
    for (const auto& ev : script.events) {
      const auto* act = std::get_if<ActionEvent>(&ev);
      if (!act || !act->requires_clause) continue;
      const auto& req = *act->requires_clause;
      std::set<AgentId> performers;
      for (const auto& other : spec.scripts)
        for (const auto& oe : other.events)
          if (const auto* oa = std::get_if<ActionEvent>(&oe))
            if (oa->verb == req.verb && oa->object == req.object)
              performers.insert(other.agent);
      if (performers.empty())
        err(act->line, "prerequisite " + req.verb + "(" + req.object +
                           ") does not occur in any script");
      else if (performers.size() > 1)
        err(act->line, "prerequisite " + req.verb + "(" + req.object +
                           ") is performed by more than one agent");
      if (req.verb == act->verb && req.object == act->object)
        err(act->line, "action cannot require itself");
    }
  }

  std::sort(diags.begin(), diags.end());
  return diags;
}

}  // namespace ceremony
