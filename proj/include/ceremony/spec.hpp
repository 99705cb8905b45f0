#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "ceremony/core.hpp"

namespace ceremony {

enum class PropertyMode { forall_traces, exists_trace };

// A precedence property: whenever the antecedent occurs, the prerequisites
// must have occurred earlier, in the listed order. With no prerequisites the
// property is existential: some trace must contain the antecedent.
struct PropertySpec {
  std::string name;
  PropertyMode mode = PropertyMode::forall_traces;
  ActionPattern antecedent;
  std::vector<ActionPattern> prerequisites;

  friend bool operator==(const PropertySpec&, const PropertySpec&) = default;
};

// dependent can only be carried out if prerequisite happened first.
struct Dependency {
  ActionPattern dependent;
  ActionPattern prerequisite;

  auto operator<=>(const Dependency&) const = default;
};

enum class Severity { error, warning };

struct Diagnostic {
  Severity severity = Severity::error;
  int line = 0;
  int column = 0;
  std::string message;

  std::string to_string() const {
    std::string sev = severity == Severity::error ? "error" : "warning";
    return std::to_string(line) + ":" + std::to_string(column) + ": " + sev +
           ": " + message;
  }

  auto operator<=>(const Diagnostic&) const = default;
};

inline bool has_errors(const std::vector<Diagnostic>& diags) {
  return std::any_of(diags.begin(), diags.end(), [](const Diagnostic& d) {
    return d.severity == Severity::error;
  });
}

struct CeremonySpec {
  std::string name;
  std::vector<AgentId> agents;       // declaration order
  std::vector<RoleScript> scripts;   // role declaration order
  // Explicitly pinned message sets; absent entries are derived from scripts.
  std::map<AgentId, std::set<MessageAtom>> pinned_sends;
  std::map<AgentId, std::set<MessageAtom>> pinned_recvs;
  std::vector<Dependency> dependencies;  // resolved from requires clauses
  std::vector<PropertySpec> properties;

  bool has_agent(const AgentId& a) const {
    return std::find(agents.begin(), agents.end(), a) != agents.end();
  }

  const RoleScript* script_for(const AgentId& a) const {
    for (const auto& s : scripts)
      if (s.agent == a) return &s;
    return nullptr;
  }

  std::set<MessageAtom> send_set(const AgentId& a) const {
    if (auto it = pinned_sends.find(a); it != pinned_sends.end())
      return it->second;
    std::set<MessageAtom> out;
    if (const RoleScript* s = script_for(a))
      for (const auto& e : s->events)
        if (const auto* snd = std::get_if<SendEvent>(&e))
          out.insert(MessageAtom{snd->message.name, false});
    return out;
  }

  std::set<MessageAtom> recv_set(const AgentId& a) const {
    if (auto it = pinned_recvs.find(a); it != pinned_recvs.end())
      return it->second;
    std::set<MessageAtom> out;
    if (const RoleScript* s = script_for(a))
      for (const auto& e : s->events)
        if (const auto* rcv = std::get_if<ReceiveEvent>(&e))
          out.insert(MessageAtom{rcv->expected.name, false});
    return out;
  }

  // Every positive atom named anywhere in the ceremony.
  std::set<MessageAtom> all_atoms() const {
    std::set<MessageAtom> out;
    for (const auto& a : agents) {
      auto s = send_set(a);
      auto r = recv_set(a);
      out.insert(s.begin(), s.end());
      out.insert(r.begin(), r.end());
    }
    return out;
  }

  friend bool operator==(const CeremonySpec&, const CeremonySpec&) = default;
};

}  // namespace ceremony
