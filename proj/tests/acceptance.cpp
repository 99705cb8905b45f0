// Acceptance suite: exercises the verifier end to end against the two
// corpus ceremonies and prints one PASS/FAIL line per criterion.

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "helpers.hpp"

using namespace ceremony;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

void report(int number, const std::string& title, bool ok,
            const std::string& detail = "") {
  std::cout << (ok ? "[PASS]" : "[FAIL]") << " criterion " << number << ": "
            << title;
  if (!ok && !detail.empty()) std::cout << " — " << detail;
  std::cout << "\n";
  if (!ok) ++failures;
}

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Check {
  bool ok = true;
  std::string detail;

  void require(bool cond, const std::string& what) {
    if (!cond && ok) {
      ok = false;
      detail = what;
    }
  }
};

bool trace_has_action(const Trace& t, const char* agent, const char* verb,
                      const char* object = nullptr) {
  for (const auto& s : t.steps)
    if (const auto* a = std::get_if<ActionEvent>(&s.event))
      if (a->agent.name == agent && a->verb == verb &&
          (!object || a->object == object))
        return true;
  return false;
}

const Verdict* verdict_named(const std::vector<Verdict>& vs,
                             const std::string& name) {
  for (const auto& v : vs)
    if (v.property == name) return &v;
  return nullptr;
}

// 1. Baseline soundness: with mutations off, each corpus ceremony has
//    exactly one trace and every forall property holds.
void criterion_1() {
  Check c;
  auto start = Clock::now();
  {
    auto r = test::run_cli("verify " + test::corpus_path("cutting.cer") +
                           " --mutations none");
    c.require(r.exit_code == 0, "cutting exit code " + std::to_string(r.exit_code));
    c.require(r.output.find("clip_before_cutting: HOLDS (1 trace)") !=
                  std::string::npos,
              "missing cutting verdict line");
    CompiledCeremony compiled = test::compile_file("cutting.cer");
    ExploreConfig config;
    config.kinds = {};
    TraceSet set = enumerate_traces(compiled, config);
    c.require(set.traces.size() == 1, "cutting trace count");
    std::set<int> states{0};
    CeremonyState st = initial_state(compiled.spec);
    for (const auto& rule : compiled.rules) {
      st = std::get<Applied>(apply_rule(st, original_variant(rule))).state;
      states.insert(st.number);
    }
    c.require(states == std::set<int>{0, 1, 2, 3, 4, 5}, "cutting states 0..5");
  }
  double cutting_s = seconds_since(start);
  c.require(cutting_s < 1.0, "cutting took " + std::to_string(cutting_s) + "s");

  start = Clock::now();
  {
    auto r = test::run_cli("verify " + test::corpus_path("lateral.cer") +
                           " --mutations none");
    c.require(r.exit_code == 0, "lateral exit code " + std::to_string(r.exit_code));
    for (const char* line : {"pedicle_dissection: HOLDS (1 trace)",
                             "df_incision: HOLDS (1 trace)",
                             "nvb_check: HOLDS (1 trace)"})
      c.require(r.output.find(line) != std::string::npos,
                std::string("missing lateral verdict line: ") + line);
  }
  double lateral_s = seconds_since(start);
  c.require(lateral_s < 1.0, "lateral took " + std::to_string(lateral_s) + "s");
  report(1, "baseline soundness without mutations", c.ok, c.detail);
}

// 2. With mutations enabled, some witness trace cuts the ureter without the
//    clips ever being applied.
void criterion_2() {
  Check c;
  auto start = Clock::now();
  CompiledCeremony compiled = test::compile_file("cutting.cer");
  ExploreConfig config;
  config.budget = 2;
  config.collect = CollectMode::all_traces;
  TraceSet set = enumerate_traces(compiled, config);
  auto verdicts = check_all(set, compiled.spec.properties, compiled.spec);
  const Verdict* v = verdict_named(verdicts, "clip_before_cutting");
  c.require(v && !v->holds, "property not violated");
  bool found = false;
  if (v) {
    for (const auto& w : v->witnesses) {
      const Trace& t = set.traces.at(w.trace_index);
      if (trace_has_action(t, "S", "cut", "ureter") &&
          !trace_has_action(t, "A", "apply", "clips"))
        found = true;
    }
  }
  c.require(found, "no witness cuts without applied clips");
  double elapsed = seconds_since(start);
  c.require(elapsed < 5.0, "took " + std::to_string(elapsed) + "s");
  report(2, "cut-without-clips violation reproduced", c.ok, c.detail);
}

// 3. The three lateral-stage properties are violated with the reported
//    counterexample shapes.
void criterion_3() {
  Check c;
  auto start = Clock::now();
  CompiledCeremony compiled = test::compile_file("lateral.cer");
  ExploreConfig config;
  config.budget = 2;
  config.collect = CollectMode::all_traces;
  TraceSet set = enumerate_traces(compiled, config);
  auto verdicts = check_all(set, compiled.spec.properties, compiled.spec);

  auto witness_matching = [&](const char* prop,
                              std::function<bool(const Trace&)> pred) {
    const Verdict* v = verdict_named(verdicts, prop);
    if (!v || v->holds) return false;
    for (const auto& w : v->witnesses)
      if (pred(set.traces.at(w.trace_index))) return true;
    return false;
  };

  c.require(witness_matching("pedicle_dissection",
                             [](const Trace& t) {
                               return trace_has_action(t, "S", "dissect",
                                                       "pedicle") &&
                                      !trace_has_action(t, "S", "pull") &&
                                      !trace_has_action(t, "A", "cauterise");
                             }),
            "no dissect witness lacking pull and cauterise");
  c.require(witness_matching("df_incision",
                             [](const Trace& t) {
                               return trace_has_action(t, "S", "incise", "DF") &&
                                      !trace_has_action(t, "S", "incise",
                                                        "visceral_fascia") &&
                                      !trace_has_action(t, "A", "inspect");
                             }),
            "no DF witness lacking fascia incision and inspection");
  c.require(witness_matching("nvb_check",
                             [](const Trace& t) {
                               return trace_has_action(t, "A", "inspect", "NVB") &&
                                      !trace_has_action(t, "S", "enter") &&
                                      !trace_has_action(t, "S", "incise",
                                                        "visceral_fascia");
                             }),
            "no inspection witness lacking enter and fascia incision");
  double elapsed = seconds_since(start);
  c.require(elapsed < 30.0, "took " + std::to_string(elapsed) + "s");
  report(3, "lateral-stage violations reproduced", c.ok, c.detail);
}

// 4. Explorer and brute-force oracle produce identical trace sets for every
//    kind subset and budget 0..2 on both ceremonies.
void criterion_4() {
  Check c;
  auto start = Clock::now();
  std::vector<MutationKind> kinds{MutationKind::skip_action,
                                  MutationKind::skip_send,
                                  MutationKind::replace_send};
  for (const char* name : {"cutting.cer", "lateral.cer"}) {
    CompiledCeremony compiled = test::compile_file(name);
    for (unsigned mask = 0; mask < 8; ++mask) {
      std::set<MutationKind> subset;
      for (size_t i = 0; i < kinds.size(); ++i)
        if (mask & (1u << i)) subset.insert(kinds[i]);
      for (int budget = 0; budget <= 2; ++budget) {
        ExploreConfig config;
        config.kinds = subset;
        config.budget = budget;
        TraceSet explorer = enumerate_traces(compiled, config);
        TraceSet oracle = brute_force_enumerate(compiled, config);
        OracleReport report = diff_trace_sets(explorer, oracle);
        c.require(report.mismatches.empty(),
                  std::string(name) + " mask " + std::to_string(mask) +
                      " budget " + std::to_string(budget) + ": " +
                      std::to_string(report.mismatches.size()) + " mismatches");
      }
    }
  }
  double elapsed = seconds_since(start);
  c.require(elapsed < 60.0, "took " + std::to_string(elapsed) + "s");
  report(4, "explorer equals brute-force oracle", c.ok, c.detail);
}

// 5. Every single skip_send deadlocks raw and every single replace_send
//    fails its check raw; closed, both replay to the final state.
void criterion_5() {
  Check c;
  CompiledCeremony compiled = test::compile_file("cutting.cer");
  for (const auto& rule : compiled.rules) {
    if (!rule.send) continue;
    for (SendFate fate : {SendFate::skipped, SendFate::replaced}) {
      RuleVariant v = original_variant(rule);
      v.send_fate = fate;
      MutationAssignment a;
      a.choices.emplace(rule.premise_index, v);
      ReplayResult raw = replay_assignment(compiled, a, false);
      if (fate == SendFate::skipped)
        c.require(std::holds_alternative<Deadlock>(raw),
                  "skip_send at rule " + std::to_string(rule.premise_index) +
                      " did not deadlock");
      else
        c.require(std::holds_alternative<CheckFailure>(raw),
                  "replace_send at rule " + std::to_string(rule.premise_index) +
                      " did not fail its check");
      ReplayResult closed = replay_assignment(compiled, a, true);
      const Trace* t = std::get_if<Trace>(&closed);
      c.require(t && t->final_state.number == 5,
                "closed replay at rule " + std::to_string(rule.premise_index) +
                    " did not reach state 5");
    }
  }
  report(5, "closure necessity and soundness on the cutting stage", c.ok,
         c.detail);
}

// 6. Invariant sweep: negation involution, knowledge monotonicity, gapless
//    numbering, budget and kind monotonicity, byte-identical reruns.
void criterion_6() {
  Check c;
  for (int i = 0; i < 200; ++i) {
    std::string name = "atom_" + std::to_string(i * 2654435761u % 9973);
    MessageAtom m{name, i % 2 == 1};
    c.require(negate(negate(m)) == m, "involution failed on " + name);
  }

  for (const char* name : {"cutting.cer", "lateral.cer"}) {
    CompiledCeremony compiled = test::compile_file(name);
    ExploreConfig config;
    config.budget = 2;
    TraceSet set = enumerate_traces(compiled, config);
    for (const auto& trace : set.traces) {
      CeremonyState st = initial_state(compiled.spec);
      int expected_state = 0;
      for (const auto& rule : compiled.rules) {
        const RuleVariant* chosen = trace.assignment.choice_for(rule.premise_index);
        RuleVariant v = chosen ? *chosen : original_variant(rule);
        CeremonyState next = std::get<Applied>(apply_rule(st, v)).state;
        for (const auto& [agent, know] : st.knowledge) {
          const auto& grown = next.knowledge.at(agent).atoms;
          c.require(std::includes(grown.begin(), grown.end(), know.atoms.begin(),
                                  know.atoms.end()),
                    "knowledge shrank");
        }
        c.require(next.number == ++expected_state, "state numbering gap");
        st = next;
      }
    }

    std::set<std::string> previous;
    for (int budget = 0; budget <= 2; ++budget) {
      ExploreConfig cfg;
      cfg.budget = budget;
      TraceSet s = enumerate_traces(compiled, cfg);
      std::set<std::string> current;
      for (const auto& t : s.traces) {
        TraceSet single;
        single.traces.push_back(t);
        current.insert(canonical_serialization(single));
      }
      c.require(std::includes(current.begin(), current.end(), previous.begin(),
                              previous.end()),
                "budget monotonicity broke at " + std::to_string(budget));
      previous = std::move(current);
    }

    std::string once = canonical_serialization(enumerate_traces(compiled, config));
    std::string twice = canonical_serialization(enumerate_traces(compiled, config));
    c.require(once == twice, "reruns differ");
  }

  auto a = test::run_cli("verify " + test::corpus_path("lateral.cer") +
                         " --budget 2 --all-violations --format json");
  auto b = test::run_cli("verify " + test::corpus_path("lateral.cer") +
                         " --budget 2 --all-violations --format json");
  c.require(a.output == b.output, "full CLI reruns differ");
  report(6, "invariant suite", c.ok, c.detail);
}

// 7. Regression counts, frozen after the first hand-checked oracle runs:
//    13 cutting traces and 31 lateral traces at budget 1 with all kinds.
void criterion_7() {
  Check c;
  CompiledCeremony cutting = test::compile_file("cutting.cer");
  CompiledCeremony lateral = test::compile_file("lateral.cer");
  ExploreConfig config;
  config.budget = 1;
  TraceSet cutting_oracle = brute_force_enumerate(cutting, config);
  TraceSet lateral_oracle = brute_force_enumerate(lateral, config);
  c.require(cutting_oracle.traces.size() == 13,
            "cutting budget-1 count " +
                std::to_string(cutting_oracle.traces.size()) + " != 13");
  c.require(lateral_oracle.traces.size() == 31,
            "lateral budget-1 count " +
                std::to_string(lateral_oracle.traces.size()) + " != 31");
  c.require(enumerate_traces(cutting, config).traces.size() == 13,
            "cutting explorer disagrees with pinned count");
  c.require(enumerate_traces(lateral, config).traces.size() == 31,
            "lateral explorer disagrees with pinned count");
  report(7, "pinned trace counts at budget 1", c.ok, c.detail);
}

// 8. Parse/print/parse is a fixpoint on the corpus, and the documented
//    diagnostics come out verbatim.
void criterion_8() {
  Check c;
  for (const char* name : {"cutting.cer", "lateral.cer"}) {
    CeremonySpec first = test::parse_file(name);
    std::string printed = print_ceremony(first);
    ParseResult again = parse_ceremony(printed);
    c.require(again.ok(), std::string(name) + " failed to reparse");
    if (again.ok()) {
      c.require(*again.spec == first, std::string(name) + " round trip changed");
      c.require(print_ceremony(*again.spec) == printed,
                std::string(name) + " print not stable");
    }
  }

  ParseResult empty = parse_ceremony("");
  c.require(!empty.ok() && !empty.diagnostics.empty() &&
                empty.diagnostics[0].message == "no ceremony declared",
            "empty-input diagnostic");

  CeremonySpec pinned = test::parse_text(
      "ceremony bad\n"
      "agents: N, A\n"
      "messages: N sends clips_provided\n"
      "role N:\n"
      "  start\n"
      "  send A cut_done\n"
      "role A:\n"
      "  start\n"
      "  recv N cut_done\n");
  auto diags = validate_spec(pinned);
  c.require(!diags.empty() &&
                diags[0].message.find("message not in sender's send set") == 0,
            "send-set diagnostic");

  CeremonySpec orphan = test::parse_text(
      "ceremony bad\n"
      "agents: P, Q\n"
      "role P:\n"
      "  start\n"
      "  recv Q hello\n"
      "role Q:\n"
      "  start\n");
  auto diags2 = validate_spec(orphan);
  bool unmatched = false;
  for (const auto& d : diags2)
    if (d.message.find("unmatched receive") == 0) unmatched = true;
  c.require(unmatched, "unmatched-receive diagnostic");
  report(8, "DSL round trip and verbatim diagnostics", c.ok, c.detail);
}

}  // namespace

int main() {
  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7();
  criterion_8();
  if (failures) {
    std::cout << failures << " criterion(s) failed\n";
    return 1;
  }
  std::cout << "all criteria passed\n";
  return 0;
}
