#pragma once

#include <compare>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

namespace ceremony {

// Agents double as role names; a ceremony declares each exactly once.
struct AgentId {
  std::string name;
  auto operator<=>(const AgentId&) const = default;
};

inline constexpr const char* kNegationMarker = "not_";

// A constant message. Negation is carried by `negated`, never by the name,
// so flipping the flag twice restores the original atom exactly.
struct MessageAtom {
  std::string name;
  bool negated = false;

  std::string label() const {
    return negated ? kNegationMarker + name : name;
  }
  auto operator<=>(const MessageAtom&) const = default;
};

inline MessageAtom negate(MessageAtom m) {
  m.negated = !m.negated;
  return m;
}

inline bool is_valid_atom_name(const std::string& name) {
  return !name.empty() && name.rfind(kNegationMarker, 0) != 0;
}

// --- role-script events -----------------------------------------------

// Source line numbers ride along for diagnostics only; they are ignored
// by structural equality so printed-and-reparsed specs compare equal.

struct StartEvent {
  AgentId agent;
  int line = 0;

  friend bool operator==(const StartEvent& a, const StartEvent& b) {
    return a.agent == b.agent;
  }
};

struct SendEvent {
  AgentId sender;
  AgentId receiver;
  MessageAtom message;
  int line = 0;

  friend bool operator==(const SendEvent& a, const SendEvent& b) {
    return a.sender == b.sender && a.receiver == b.receiver &&
           a.message == b.message;
  }
};

// A receive carries the constant the agent checks the incoming message
// against; the check is part of the event rather than a separate guard.
struct ReceiveEvent {
  AgentId sender;
  AgentId receiver;
  MessageAtom expected;
  int line = 0;

  friend bool operator==(const ReceiveEvent& a, const ReceiveEvent& b) {
    return a.sender == b.sender && a.receiver == b.receiver &&
           a.expected == b.expected;
  }
};

struct RequiresClause {
  std::string verb;
  std::string object;

  friend bool operator==(const RequiresClause&, const RequiresClause&) = default;
};

struct ActionEvent {
  AgentId agent;
  std::string verb;
  std::string object;
  std::optional<RequiresClause> requires_clause;
  int line = 0;

  friend bool operator==(const ActionEvent& a, const ActionEvent& b) {
    return a.agent == b.agent && a.verb == b.verb && a.object == b.object &&
           a.requires_clause == b.requires_clause;
  }
};

using ScriptEvent = std::variant<StartEvent, SendEvent, ReceiveEvent, ActionEvent>;

struct RoleScript {
  AgentId agent;
  std::vector<ScriptEvent> events;

  friend bool operator==(const RoleScript&, const RoleScript&) = default;
};

// Matches action events; an omitted object matches any object.
struct ActionPattern {
  AgentId agent;
  std::string verb;
  std::optional<std::string> object;

  bool matches(const ActionEvent& e) const {
    return agent == e.agent && verb == e.verb &&
           (!object.has_value() || *object == e.object);
  }

  std::string to_string() const {
    std::string s = agent.name + "." + verb;
    if (object) s += "(" + *object + ")";
    return s;
  }

  auto operator<=>(const ActionPattern&) const = default;
};

// --- knowledge ----------------------------------------------------------

// What an agent possesses at a given state: its initial atoms plus every
// message received so far. Grows only by union.
struct Knowledge {
  AgentId agent;
  std::set<MessageAtom> atoms;

  friend bool operator==(const Knowledge&, const Knowledge&) = default;
};

inline Knowledge extend_knowledge(Knowledge k, const MessageAtom& m) {
  k.atoms.insert(m);
  return k;
}

// --- small helpers ------------------------------------------------------

inline std::string describe_event(const ScriptEvent& e) {
  struct V {
    std::string operator()(const StartEvent& s) const {
      return "start " + s.agent.name;
    }
    std::string operator()(const SendEvent& s) const {
      return "snd " + s.sender.name + "->" + s.receiver.name + " " +
             s.message.label();
    }
    std::string operator()(const ReceiveEvent& r) const {
      return "rcv " + r.sender.name + "->" + r.receiver.name + " " +
             r.expected.label();
    }
    std::string operator()(const ActionEvent& a) const {
      return "act " + a.agent.name + " " + a.verb + "(" + a.object + ")";
    }
  };
  return std::visit(V{}, e);
}

}  // namespace ceremony
