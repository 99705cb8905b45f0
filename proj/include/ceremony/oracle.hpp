#pragma once

#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "ceremony/report.hpp"

namespace ceremony {

struct OracleMismatch {
  std::string assignment;  // canonical description of the differing trace
  std::string explorer_result;
  std::string oracle_result;
};

struct OracleReport {
  long assignments_examined = 0;
  long executable = 0;
  std::vector<OracleMismatch> mismatches;
};

struct OracleGuardError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

// Re-derives matched mutations without consulting matching_closure: run the
// raw assignment, observe the failure, apply the forced fix, rerun. A
// deadlocked receive is skipped; a check failure against the negation of the
// expectation flips the expectation; any other check failure means the
// intended message is absent, so the receive is skipped as well.
inline bool repair_by_simulation(const CompiledCeremony& compiled,
                                 MutationAssignment& assignment) {
  auto variant_of = [&](int r) -> RuleVariant& {
    auto it = assignment.choices.find(r);
    if (it == assignment.choices.end())
      it = assignment.choices.emplace(r, original_variant(compiled.rules[r]))
               .first;
    return it->second;
  };
  const int max_rounds = 2 * static_cast<int>(compiled.rules.size()) + 2;
  for (int round = 0; round < max_rounds; ++round) {
    ReplayResult result = replay_assignment(compiled, assignment, false);
    if (std::holds_alternative<Trace>(result)) return true;
    if (const auto* dead = std::get_if<Deadlock>(&result)) {
      variant_of(dead->rule_index).receive_fate = ReceiveFate::skipped;
    } else {
      const auto& fail = std::get<CheckFailure>(result);
      RuleVariant& v = variant_of(fail.rule_index);
      if (fail.actual == negate(fail.expected) &&
          v.receive_fate == ReceiveFate::kept)
        v.receive_fate = ReceiveFate::expect_negated;
      else
        v.receive_fate = ReceiveFate::skipped;
    }
  }
  return false;
}

// Independent dependency sweep: repeatedly skip any retained action whose
// earlier prerequisite occurrences have all been skipped, until stable.
inline void propagate_dependencies(const CompiledCeremony& compiled,
                                   MutationAssignment& assignment) {
  struct Instance {
    int rule;
    int pos;
    const ActionEvent* event;
  };
  std::vector<Instance> instances;
  for (const auto& rule : compiled.rules)
    for (size_t p = 0; p < rule.actions.size(); ++p)
      instances.push_back(
          {rule.premise_index, static_cast<int>(p), &rule.actions[p]});

  auto fate_of = [&](const Instance& i) {
    const RuleVariant* v = assignment.choice_for(i.rule);
    return v ? v->action_fates[i.pos] : ActionFate::kept;
  };

  bool changed = true;
  while (changed) {
    changed = false;
    for (size_t i = 0; i < instances.size(); ++i) {
      if (fate_of(instances[i]) != ActionFate::kept) continue;
      auto dep = compiled.dependency_graph.find(ActionPattern{
          instances[i].event->agent, instances[i].event->verb,
          instances[i].event->object});
      if (dep == compiled.dependency_graph.end()) continue;
      for (const ActionPattern& prereq : dep->second) {
        int earlier = 0, earlier_skipped = 0;
        for (size_t j = 0; j < i; ++j) {
          if (!prereq.matches(*instances[j].event)) continue;
          ++earlier;
          if (fate_of(instances[j]) != ActionFate::kept) ++earlier_skipped;
        }
        if (earlier > 0 && earlier == earlier_skipped) {
          auto it = assignment.choices.find(instances[i].rule);
          if (it == assignment.choices.end())
            it = assignment.choices
                     .emplace(instances[i].rule,
                              original_variant(compiled.rules[instances[i].rule]))
                     .first;
          it->second.action_fates[instances[i].pos] = ActionFate::skipped_matched;
          changed = true;
          break;
        }
      }
    }
  }
}

}  // namespace detail

// Reference enumeration: walks every raw combination of primary variants
// within the budget with an explicit odometer, closes each combination by
// simulate-and-repair plus the dependency sweep, and keeps the executable
// ones. Guarded against blow-up; meant for corpus-scale ceremonies only.
inline TraceSet brute_force_enumerate(const CompiledCeremony& compiled,
                                      const ExploreConfig& config) {
  if (compiled.rules.size() > 12)
    throw OracleGuardError("oracle guard exceeded: " +
                           std::to_string(compiled.rules.size()) +
                           " rules (limit 12)");
  if (!config.budget || *config.budget > 3)
    throw OracleGuardError(
        "oracle guard exceeded: budget " +
        (config.budget ? std::to_string(*config.budget) : std::string("unbounded")) +
        " (limit 3)");

  std::vector<std::vector<RuleVariant>> menu;
  for (const auto& rule : compiled.rules)
    menu.push_back(generate_variants(rule, config.kinds));
  const size_t n = menu.size();
  const int budget = *config.budget;

  TraceSet out;
  out.ceremony = compiled.spec.name;
  out.config = config;

  std::vector<size_t> pick(n, 0);
  std::vector<int> weight(n, 0);
  auto total_weight = [&](size_t upto) {
    int w = 0;
    for (size_t i = 0; i < upto; ++i) w += weight[i];
    return w;
  };
  bool done = n == 0;
  while (!done) {
    MutationAssignment raw;
    for (size_t i = 0; i < n; ++i)
      if (!menu[i][pick[i]].is_original())
        raw.choices.emplace(static_cast<int>(i), menu[i][pick[i]]);
    MutationAssignment repaired = raw;
    if (detail::repair_by_simulation(compiled, repaired)) {
      detail::propagate_dependencies(compiled, repaired);
      ReplayResult result = replay_assignment(compiled, repaired, false);
      if (Trace* trace = std::get_if<Trace>(&result)) {
        trace->assignment = repaired.normalized();
        out.traces.push_back(std::move(*trace));
      }
    }

    // Advance the odometer to the next combination within budget.
    bool advanced = false;
    size_t i = n;
    while (i > 0 && !advanced) {
      --i;
      int prefix = total_weight(i);
      for (size_t next = pick[i] + 1; next < menu[i].size(); ++next) {
        int w = menu[i][next].primary_count();
        if (prefix + w <= budget) {
          pick[i] = next;
          weight[i] = w;
          advanced = true;
          break;
        }
      }
      if (advanced) {
        for (size_t j = i + 1; j < n; ++j) {
          pick[j] = 0;
          weight[j] = 0;
        }
      } else {
        pick[i] = 0;
        weight[i] = 0;
      }
    }
    done = !advanced;
  }
  return out;
}

// Compares two trace sets for the same ceremony and configuration by the
// symmetric difference of their canonical per-trace serializations.
inline OracleReport diff_trace_sets(const TraceSet& a, const TraceSet& b) {
  if (a.ceremony != b.ceremony || a.config.kinds != b.config.kinds ||
      a.config.budget != b.config.budget)
    throw std::invalid_argument("trace sets have different ceremony or config");

  auto canonical = [](const Trace& t) {
    TraceSet single;
    single.traces.push_back(t);
    return canonical_serialization(single);
  };
  auto describe = [](const Trace& t) {
    std::string s;
    for (const auto& [rule, variant] : t.assignment.normalized().choices)
      for (const auto& [label, primary] : variant.element_labels())
        s += "rule " + std::to_string(rule) + ": " + label +
             (primary ? "" : " (matched)") + "; ";
    return s.empty() ? std::string("original") : s;
  };

  std::map<std::string, const Trace*> in_a, in_b;
  for (const auto& t : a.traces) in_a.emplace(canonical(t), &t);
  for (const auto& t : b.traces) in_b.emplace(canonical(t), &t);

  OracleReport report;
  std::set<std::string> keys;
  for (const auto& [k, _] : in_a) keys.insert(k);
  for (const auto& [k, _] : in_b) keys.insert(k);
  report.assignments_examined = static_cast<long>(keys.size());
  for (const auto& k : keys) {
    bool has_a = in_a.count(k) > 0;
    bool has_b = in_b.count(k) > 0;
    if (has_a && has_b) {
      ++report.executable;
      continue;
    }
    report.mismatches.push_back({describe(has_a ? *in_a[k] : *in_b[k]),
                                 has_a ? "present" : "absent",
                                 has_b ? "present" : "absent"});
  }
  return report;
}

}  // namespace ceremony
