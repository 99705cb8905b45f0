#pragma once

#include <deque>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "ceremony/mutate.hpp"

namespace ceremony {

// Global state: the state number, per-agent knowledge, and the messages
// sent but not yet received. Channels are reliable and order-preserving
// per (sender, receiver) pair.
struct CeremonyState {
  int number = 0;
  std::map<AgentId, Knowledge> knowledge;
  std::map<std::pair<AgentId, AgentId>, std::deque<MessageAtom>> in_flight;

  friend bool operator==(const CeremonyState&, const CeremonyState&) = default;
};

// An agent starts out knowing the messages it may send.
inline CeremonyState initial_state(const CeremonySpec& spec) {
  CeremonyState st;
  for (const auto& agent : spec.agents)
    st.knowledge[agent] = Knowledge{agent, spec.send_set(agent)};
  return st;
}

struct TraceStep {
  int step = 0;
  int rule_index = 0;
  ScriptEvent event;
  bool mutated = false;
  std::optional<std::string> mutation_kind;

  friend bool operator==(const TraceStep&, const TraceStep&) = default;
};

struct Applied {
  CeremonyState state;
  std::vector<TraceStep> steps;
};

// A retained receive found nothing on its channel.
struct Deadlock {
  int rule_index = -1;
  ReceiveEvent receive;
};

// The channel held a message, but not the one the agent checks for.
struct CheckFailure {
  int rule_index = -1;
  ReceiveEvent receive;
  MessageAtom expected;
  MessageAtom actual;
};

using StepResult = std::variant<Applied, Deadlock, CheckFailure>;

// Applies one rule variant to a state. Pure: equal inputs give equal
// results. Retained events are emitted as trace steps in script order;
// skipped elements emit nothing. `first_step` seeds the step numbering.
inline StepResult apply_rule(const CeremonyState& state, const RuleVariant& variant,
                             int first_step = 0) {
  const TransitionRule& rule = variant.base;
  if (state.number != rule.premise_index)
    throw std::logic_error("rule " + std::to_string(rule.premise_index) +
                           " applied in state " + std::to_string(state.number));

  Applied out;
  out.state = state;
  out.state.number = state.number + 1;
  int n = first_step;
  auto push = [&](ScriptEvent ev, bool mutated, std::optional<std::string> kind) {
    out.steps.push_back({n++, rule.premise_index, std::move(ev), mutated,
                         std::move(kind)});
  };

  if (rule.is_start_rule())
    push(StartEvent{rule.agent}, false, std::nullopt);

  if (rule.receive && variant.receive_fate != ReceiveFate::skipped) {
    ReceiveEvent ev = *rule.receive;
    bool flipped = variant.receive_fate == ReceiveFate::expect_negated;
    MessageAtom expected = flipped ? negate(ev.expected) : ev.expected;
    auto key = std::make_pair(ev.sender, ev.receiver);
    auto it = out.state.in_flight.find(key);
    if (it == out.state.in_flight.end() || it->second.empty())
      return Deadlock{rule.premise_index, ev};
    MessageAtom actual = it->second.front();
    if (actual != expected)
      return CheckFailure{rule.premise_index, ev, expected, actual};
    it->second.pop_front();
    if (it->second.empty()) out.state.in_flight.erase(it);
    auto& k = out.state.knowledge[ev.receiver];
    k = extend_knowledge(k, actual);
    ev.expected = actual;
    push(ev, flipped,
         flipped ? std::optional<std::string>("matched_replace_receive")
                 : std::nullopt);
  }

  for (size_t i = 0; i < rule.actions.size(); ++i) {
    if (variant.action_fates[i] != ActionFate::kept) continue;
    ActionEvent ev = rule.actions[i];
    ev.requires_clause.reset();  // spec metadata, not part of the instance
    push(std::move(ev), false, std::nullopt);
  }

  if (rule.send && variant.send_fate != SendFate::skipped) {
    SendEvent ev = *rule.send;
    bool replaced = variant.send_fate == SendFate::replaced;
    if (replaced) ev.message = negate(ev.message);
    out.state.in_flight[{ev.sender, ev.receiver}].push_back(ev.message);
    push(ev, replaced,
         replaced ? std::optional<std::string>("replace_send") : std::nullopt);
  }

  return out;
}

struct Trace {
  std::vector<TraceStep> steps;
  MutationAssignment assignment;
  CeremonyState final_state;

  friend bool operator==(const Trace&, const Trace&) = default;
};

}  // namespace ceremony
