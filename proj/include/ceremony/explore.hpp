#pragma once

#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "ceremony/execute.hpp"

namespace ceremony {

enum class CollectMode { first_violation, all_traces };

struct ExploreConfig {
  std::set<MutationKind> kinds = all_mutation_kinds();
  std::optional<int> budget = 2;  // max primary mutations; nullopt = unbounded
  CollectMode collect = CollectMode::first_violation;

  friend bool operator==(const ExploreConfig&, const ExploreConfig&) = default;
};

struct TraceSet {
  std::string ceremony;
  ExploreConfig config;
  std::vector<Trace> traces;  // canonical depth-first assignment order
};

using ReplayResult = std::variant<Trace, Deadlock, CheckFailure>;

// Runs an assignment from the initial state. With enforce_closure the
// matching closure is applied first and the replay is guaranteed to reach
// the final state; without it the assignment runs as-is and may fail,
// which is useful as a diagnostic mode.
inline ReplayResult replay_assignment(const CompiledCeremony& compiled,
                                      const MutationAssignment& assignment,
                                      bool enforce_closure) {
  MutationAssignment effective = assignment;
  if (enforce_closure) {
    ClosureResult closed = matching_closure(assignment, compiled);
    if (const auto* conflict = std::get_if<ClosureConflict>(&closed))
      throw std::invalid_argument("assignment cannot be closed: " +
                                  conflict->detail);
    effective = std::get<MutationAssignment>(closed);
  }

  Trace trace;
  trace.assignment = effective;
  CeremonyState state = initial_state(compiled.spec);
  int step = 0;
  for (const auto& rule : compiled.rules) {
    const RuleVariant* chosen = effective.choice_for(rule.premise_index);
    RuleVariant variant = chosen ? *chosen : original_variant(rule);
    StepResult result = apply_rule(state, variant, step);
    if (const auto* dead = std::get_if<Deadlock>(&result)) return *dead;
    if (const auto* fail = std::get_if<CheckFailure>(&result)) return *fail;
    auto& applied = std::get<Applied>(result);
    for (auto& s : applied.steps) trace.steps.push_back(std::move(s));
    step = static_cast<int>(trace.steps.size());
    state = std::move(applied.state);
  }
  if (enforce_closure && state.number != compiled.final_state)
    throw std::logic_error("closed replay stopped before the final state");
  trace.final_state = std::move(state);
  return trace;
}

// Enumerates one trace per closed assignment whose primary mutations fit
// the enabled kinds and the budget. Depth-first over rule indices with
// variants in generation order, so the all-original trace comes first and
// the output order is canonical.
inline TraceSet enumerate_traces(const CompiledCeremony& compiled,
                                 const ExploreConfig& config) {
  TraceSet out;
  out.ceremony = compiled.spec.name;
  out.config = config;

  std::vector<std::vector<RuleVariant>> menu;
  menu.reserve(compiled.rules.size());
  for (const auto& rule : compiled.rules)
    menu.push_back(generate_variants(rule, config.kinds));

  MutationAssignment current;
  auto emit = [&]() {
    ClosureResult closed = matching_closure(current, compiled);
    if (std::holds_alternative<ClosureConflict>(closed))
      throw std::logic_error("primary-only assignment produced a conflict");
    MutationAssignment& assignment = std::get<MutationAssignment>(closed);
    ReplayResult replayed = replay_assignment(compiled, assignment, false);
    Trace* trace = std::get_if<Trace>(&replayed);
    if (!trace)
      throw std::logic_error("closed assignment failed to replay");
    out.traces.push_back(std::move(*trace));
  };

  const int budget = config.budget.value_or(-1);
  auto dfs = [&](auto&& self, size_t rule, int used) -> void {
    if (rule == menu.size()) {
      emit();
      return;
    }
    for (const RuleVariant& v : menu[rule]) {
      int cost = v.primary_count();
      if (budget >= 0 && used + cost > budget) continue;
      if (cost > 0)
        current.choices.insert_or_assign(static_cast<int>(rule), v);
      else
        current.choices.erase(static_cast<int>(rule));
      self(self, rule + 1, used + cost);
    }
    current.choices.erase(static_cast<int>(rule));
  };
  dfs(dfs, 0, 0);
  return out;
}

}  // namespace ceremony
