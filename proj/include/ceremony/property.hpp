#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ceremony/explore.hpp"

namespace ceremony {

struct PrereqStatus {
  ActionPattern pattern;
  std::optional<int> position;  // step index, or missing
};

struct Witness {
  int trace_index = -1;
  int antecedent_position = -1;
  std::vector<PrereqStatus> prerequisites;  // empty for existential witnesses
};

struct Verdict {
  std::string property;
  PropertyMode mode = PropertyMode::forall_traces;
  bool holds = false;
  // Violating occurrences for forall properties; the satisfying trace for
  // existential ones.
  std::vector<Witness> witnesses;
};

namespace detail {

inline void require_known_agents(const PropertySpec& prop,
                                 const CeremonySpec& spec) {
  auto check = [&](const ActionPattern& p) {
    if (!spec.has_agent(p.agent))
      throw std::invalid_argument("property " + prop.name +
                                  " references unknown agent " + p.agent.name);
  };
  check(prop.antecedent);
  for (const auto& p : prop.prerequisites) check(p);
}

inline bool step_matches(const TraceStep& s, const ActionPattern& pat) {
  const auto* act = std::get_if<ActionEvent>(&s.event);
  return act && pat.matches(*act);
}

}  // namespace detail

// Checks one trace against a forall property. For every occurrence of the
// antecedent at position l there must be prerequisite occurrences at
// strictly increasing positions before l, matched greedily left to right.
// Returns the first failing occurrence, or nothing if the trace satisfies
// the property (vacuously so when the antecedent never occurs).
inline std::optional<Witness> check_precedence(const Trace& trace,
                                               const PropertySpec& prop,
                                               const CeremonySpec& spec) {
  if (prop.mode != PropertyMode::forall_traces)
    throw std::invalid_argument("check_precedence needs a forall property");
  detail::require_known_agents(prop, spec);

  const auto& steps = trace.steps;
  for (size_t l = 0; l < steps.size(); ++l) {
    if (!detail::step_matches(steps[l], prop.antecedent)) continue;
    Witness w;
    w.antecedent_position = steps[l].step;
    bool ok = true;
    int prev = -1;
    for (const auto& pat : prop.prerequisites) {
      std::optional<int> found;
      for (int p = prev + 1; p < static_cast<int>(l); ++p) {
        if (detail::step_matches(steps[p], pat)) {
          found = steps[p].step;
          prev = p;
          break;
        }
      }
      if (!found) ok = false;
      w.prerequisites.push_back({pat, found});
    }
    if (!ok) return w;
  }
  return std::nullopt;
}

// An existential property holds if some trace contains the antecedent; the
// verdict carries the first such trace as witness.
inline Verdict check_executability(const TraceSet& traces,
                                   const PropertySpec& prop,
                                   const CeremonySpec& spec) {
  if (prop.mode != PropertyMode::exists_trace)
    throw std::invalid_argument("check_executability needs an exists property");
  detail::require_known_agents(prop, spec);

  Verdict v{prop.name, prop.mode, false, {}};
  for (size_t t = 0; t < traces.traces.size(); ++t) {
    for (const auto& s : traces.traces[t].steps) {
      if (detail::step_matches(s, prop.antecedent)) {
        v.holds = true;
        v.witnesses.push_back({static_cast<int>(t), s.step, {}});
        return v;
      }
    }
  }
  return v;
}

inline std::vector<Verdict> check_all(const TraceSet& traces,
                                      const std::vector<PropertySpec>& props,
                                      const CeremonySpec& spec) {
  std::vector<Verdict> out;
  out.reserve(props.size());
  for (const auto& prop : props) {
    if (prop.mode == PropertyMode::exists_trace) {
      out.push_back(check_executability(traces, prop, spec));
      continue;
    }
    Verdict v{prop.name, prop.mode, true, {}};
    for (size_t t = 0; t < traces.traces.size(); ++t) {
      if (auto w = check_precedence(traces.traces[t], prop, spec)) {
        w->trace_index = static_cast<int>(t);
        v.witnesses.push_back(std::move(*w));
        v.holds = false;
        if (traces.config.collect == CollectMode::first_violation) break;
      }
    }
    out.push_back(std::move(v));
  }
  return out;
}

}  // namespace ceremony
