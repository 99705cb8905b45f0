#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <tuple>
#include <variant>
#include <vector>

#include "ceremony/compile.hpp"

namespace ceremony {

// Primary mutation kinds: the mistakes an agent can make of their own accord.
enum class MutationKind { skip_action, skip_send, replace_send };

inline std::string to_string(MutationKind k) {
  switch (k) {
    case MutationKind::skip_action: return "skip_action";
    case MutationKind::skip_send: return "skip_send";
    case MutationKind::replace_send: return "replace_send";
  }
  return "?";
}

inline const std::set<MutationKind>& all_mutation_kinds() {
  static const std::set<MutationKind> kinds{MutationKind::skip_action,
                                            MutationKind::skip_send,
                                            MutationKind::replace_send};
  return kinds;
}

// Non-kept receive fates are always matched mutations forced by the
// upstream sender; non-kept send fates and primary action skips are the
// agent's own (budgeted) mistakes.
enum class ReceiveFate { kept, skipped, expect_negated };
enum class ActionFate { kept, skipped_primary, skipped_matched };
enum class SendFate { kept, skipped, replaced };

struct RuleVariant {
  TransitionRule base;
  ReceiveFate receive_fate = ReceiveFate::kept;
  std::vector<ActionFate> action_fates;  // one per base action
  SendFate send_fate = SendFate::kept;

  bool is_original() const {
    if (receive_fate != ReceiveFate::kept || send_fate != SendFate::kept)
      return false;
    return std::all_of(action_fates.begin(), action_fates.end(),
                       [](ActionFate f) { return f == ActionFate::kept; });
  }

  int primary_count() const {
    int n = send_fate == SendFate::kept ? 0 : 1;
    for (ActionFate f : action_fates)
      if (f == ActionFate::skipped_primary) ++n;
    return n;
  }

  std::set<MutationKind> primary_kinds() const {
    std::set<MutationKind> out;
    for (ActionFate f : action_fates)
      if (f == ActionFate::skipped_primary) out.insert(MutationKind::skip_action);
    if (send_fate == SendFate::skipped) out.insert(MutationKind::skip_send);
    if (send_fate == SendFate::replaced) out.insert(MutationKind::replace_send);
    return out;
  }

  // One label per non-kept element, in script order.
  std::vector<std::pair<std::string, bool>> element_labels() const {
    std::vector<std::pair<std::string, bool>> out;  // (label, is_primary)
    if (receive_fate == ReceiveFate::skipped)
      out.push_back({"matched_skip_receive", false});
    else if (receive_fate == ReceiveFate::expect_negated)
      out.push_back({"matched_replace_receive", false});
    for (size_t i = 0; i < action_fates.size(); ++i) {
      if (action_fates[i] == ActionFate::skipped_primary)
        out.push_back({"skip_action(" + std::to_string(i) + ")", true});
      else if (action_fates[i] == ActionFate::skipped_matched)
        out.push_back({"matched_skip_action(" + std::to_string(i) + ")", false});
    }
    if (send_fate == SendFate::skipped) out.push_back({"skip_send", true});
    if (send_fate == SendFate::replaced) out.push_back({"replace_send", true});
    return out;
  }

  friend bool operator==(const RuleVariant& a, const RuleVariant& b) {
    return a.base.premise_index == b.base.premise_index &&
           a.receive_fate == b.receive_fate && a.action_fates == b.action_fates &&
           a.send_fate == b.send_fate;
  }
};

inline RuleVariant original_variant(const TransitionRule& rule) {
  RuleVariant v;
  v.base = rule;
  v.action_fates.assign(rule.actions.size(), ActionFate::kept);
  return v;
}

// All primary variants of a rule, respecting its shape and the enabled
// kinds. Deterministic order: original, single action skips by position,
// skip_send, replace_send, then multi-element combinations in lexicographic
// order of their element codes.
inline std::vector<RuleVariant> generate_variants(
    const TransitionRule& rule, const std::set<MutationKind>& kinds) {
  const bool can_skip_action = kinds.count(MutationKind::skip_action) > 0;
  const bool can_skip_send =
      kinds.count(MutationKind::skip_send) > 0 && rule.send.has_value();
  const bool can_replace_send =
      kinds.count(MutationKind::replace_send) > 0 && rule.send.has_value();
  const size_t n_actions = can_skip_action ? rule.actions.size() : 0;

  // Element codes: (0, position) for an action skip, (1, 0) for skip_send,
  // (1, 1) for replace_send.
  using Combo = std::vector<std::pair<int, int>>;
  auto make_variant = [&](const Combo& combo) {
    RuleVariant v = original_variant(rule);
    for (auto [type, pos] : combo) {
      if (type == 0)
        v.action_fates[pos] = ActionFate::skipped_primary;
      else
        v.send_fate = pos == 0 ? SendFate::skipped : SendFate::replaced;
    }
    return v;
  };

  std::vector<RuleVariant> out;
  out.push_back(original_variant(rule));
  for (size_t i = 0; i < n_actions; ++i)
    out.push_back(make_variant({{0, static_cast<int>(i)}}));
  if (can_skip_send) out.push_back(make_variant({{1, 0}}));
  if (can_replace_send) out.push_back(make_variant({{1, 1}}));

  std::vector<Combo> combos;
  std::vector<int> send_options{-1};
  if (can_skip_send) send_options.push_back(0);
  if (can_replace_send) send_options.push_back(1);
  for (unsigned mask = 0; mask < (1u << n_actions); ++mask) {
    for (int send_opt : send_options) {
      Combo combo;
      for (size_t i = 0; i < n_actions; ++i)
        if (mask & (1u << i)) combo.push_back({0, static_cast<int>(i)});
      if (send_opt >= 0) combo.push_back({1, send_opt});
      if (combo.size() >= 2) combos.push_back(std::move(combo));
    }
  }
  std::sort(combos.begin(), combos.end());
  for (const auto& combo : combos) out.push_back(make_variant(combo));
  return out;
}

// Sparse map from rule index to its chosen variant; rules without an entry
// run their original form.
struct MutationAssignment {
  std::map<int, RuleVariant> choices;

  int primary_count() const {
    int n = 0;
    for (const auto& [_, v] : choices) n += v.primary_count();
    return n;
  }

  std::set<MutationKind> primary_kinds() const {
    std::set<MutationKind> out;
    for (const auto& [_, v] : choices) {
      auto k = v.primary_kinds();
      out.insert(k.begin(), k.end());
    }
    return out;
  }

  const RuleVariant* choice_for(int rule) const {
    auto it = choices.find(rule);
    return it == choices.end() ? nullptr : &it->second;
  }

  MutationAssignment normalized() const {
    MutationAssignment out;
    for (const auto& [r, v] : choices)
      if (!v.is_original()) out.choices.emplace(r, v);
    return out;
  }

  friend bool operator==(const MutationAssignment& a, const MutationAssignment& b) {
    return a.normalized().choices == b.normalized().choices;
  }
};

struct ClosureConflict {
  int rule_index = -1;
  std::string detail;
};

using ClosureResult = std::variant<MutationAssignment, ClosureConflict>;

namespace detail {

// Index of the rule that sends / receives each (sender, receiver, atom) key.
using MessageKey = std::tuple<AgentId, AgentId, std::string>;

inline std::map<MessageKey, int> send_rule_index(const CompiledCeremony& c) {
  std::map<MessageKey, int> out;
  for (const auto& rule : c.rules)
    if (rule.send)
      out[{rule.send->sender, rule.send->receiver, rule.send->message.name}] =
          rule.premise_index;
  return out;
}

inline std::vector<std::pair<int, int>> action_instances(
    const CompiledCeremony& c) {
  std::vector<std::pair<int, int>> out;  // (rule, position) in trace order
  for (const auto& rule : c.rules)
    for (size_t p = 0; p < rule.actions.size(); ++p)
      out.push_back({rule.premise_index, static_cast<int>(p)});
  return out;
}

}  // namespace detail

// Completes an assignment with the matched mutations that keep it
// executable: a skipped send skips the matching receive, a replaced send
// flips the expectation of the matching receive, and a skipped action skips
// every later action that transitively depends on it. Matched elements
// already present in the input must coincide with what the closure derives.
inline ClosureResult matching_closure(const MutationAssignment& input,
                                      const CompiledCeremony& compiled) {
  const auto& rules = compiled.rules;
  for (const auto& [r, v] : input.choices) {
    if (r < 0 || r >= static_cast<int>(rules.size()))
      throw std::invalid_argument("assignment references unknown rule " +
                                  std::to_string(r));
    if (v.action_fates.size() != rules[r].actions.size())
      throw std::invalid_argument("variant shape does not match rule " +
                                  std::to_string(r));
    if (v.send_fate != SendFate::kept && !rules[r].send)
      throw std::invalid_argument("send mutation on sendless rule " +
                                  std::to_string(r));
  }

  MutationAssignment result = input.normalized();
  auto variant_of = [&](int r) -> RuleVariant& {
    auto it = result.choices.find(r);
    if (it == result.choices.end())
      it = result.choices.emplace(r, original_variant(rules[r])).first;
    return it->second;
  };
  auto send_fate_of = [&](int r) {
    const RuleVariant* v = result.choice_for(r);
    return v ? v->send_fate : SendFate::kept;
  };

  // Receive fates follow the fate of the matching send.
  auto send_index = detail::send_rule_index(compiled);
  for (const auto& rule : rules) {
    if (!rule.receive) continue;
    const auto& rcv = *rule.receive;
    auto it = send_index.find({rcv.sender, rcv.receiver, rcv.expected.name});
    if (it == send_index.end())
      throw std::invalid_argument("receive with no matching send in rule " +
                                  std::to_string(rule.premise_index));
    ReceiveFate derived = ReceiveFate::kept;
    switch (send_fate_of(it->second)) {
      case SendFate::kept: derived = ReceiveFate::kept; break;
      case SendFate::skipped: derived = ReceiveFate::skipped; break;
      case SendFate::replaced: derived = ReceiveFate::expect_negated; break;
    }
    const RuleVariant* existing = result.choice_for(rule.premise_index);
    ReceiveFate pinned = existing ? existing->receive_fate : ReceiveFate::kept;
    if (pinned != ReceiveFate::kept && pinned != derived)
      return ClosureConflict{rule.premise_index,
                             "pinned receive fate contradicts the fate of the "
                             "matching send"};
    if (derived != ReceiveFate::kept)
      variant_of(rule.premise_index).receive_fate = derived;
  }

  // Dependency propagation over action instances in trace order. An action
  // is blocked once every earlier instance of one of its prerequisites is
  // skipped (and at least one such instance exists).
  auto instances = detail::action_instances(compiled);
  std::map<std::pair<int, int>, bool> skipped;
  for (auto [r, p] : instances) {
    const ActionEvent& act = rules[r].actions[p];
    const RuleVariant* v = result.choice_for(r);
    ActionFate pinned = v ? v->action_fates[p] : ActionFate::kept;
    bool blocked = false;
    auto dep = compiled.dependency_graph.find(
        ActionPattern{act.agent, act.verb, act.object});
    if (dep != compiled.dependency_graph.end()) {
      for (const ActionPattern& prereq : dep->second) {
        int earlier = 0, earlier_skipped = 0;
        for (auto [r2, p2] : instances) {
          if (std::pair{r2, p2} >= std::pair{r, p}) break;
          if (prereq.matches(rules[r2].actions[p2])) {
            ++earlier;
            if (skipped[{r2, p2}]) ++earlier_skipped;
          }
        }
        if (earlier > 0 && earlier == earlier_skipped) blocked = true;
      }
    }
    if (pinned == ActionFate::skipped_primary) {
      skipped[{r, p}] = true;
    } else if (blocked) {
      variant_of(r).action_fates[p] = ActionFate::skipped_matched;
      skipped[{r, p}] = true;
    } else if (pinned == ActionFate::skipped_matched) {
      return ClosureConflict{r, "matched action skip at position " +
                                    std::to_string(p) +
                                    " is not forced by any dependency"};
    } else {
      skipped[{r, p}] = false;
    }
  }

  return result.normalized();
}

}  // namespace ceremony
