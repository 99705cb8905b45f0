#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"

using namespace ceremony;

namespace {

CeremonyState run_originals(const CompiledCeremony& compiled, int upto) {
  CeremonyState state = initial_state(compiled.spec);
  for (int i = 0; i < upto; ++i) {
    StepResult r = apply_rule(state, original_variant(compiled.rules[i]));
    state = std::get<Applied>(r).state;
  }
  return state;
}

}  // namespace

TEST_CASE("initial knowledge is the agent's send set") {
  CompiledCeremony compiled = test::compile_file("cutting.cer");
  CeremonyState st = initial_state(compiled.spec);
  CHECK(st.number == 0);
  CHECK(st.knowledge.at(AgentId{"N"}).atoms ==
        std::set<MessageAtom>{MessageAtom{"clips_provided"}});
  CHECK(st.in_flight.empty());
}

TEST_CASE("the nurse's rule consumes, acts and sends") {
  CompiledCeremony compiled = test::compile_file("cutting.cer");
  CeremonyState st = run_originals(compiled, 1);  // surgeon has requested
  REQUIRE(st.number == 1);

  StepResult r = apply_rule(st, original_variant(compiled.rules[1]), 3);
  REQUIRE(std::holds_alternative<Applied>(r));
  const Applied& applied = std::get<Applied>(r);
  CHECK(applied.state.number == 2);
  REQUIRE(applied.steps.size() == 3);
  CHECK(describe_event(applied.steps[0].event) == "rcv S->N clips_requested");
  CHECK(describe_event(applied.steps[1].event) == "act N provide(clips)");
  CHECK(describe_event(applied.steps[2].event) == "snd N->A clips_provided");
  CHECK(applied.steps[0].step == 3);
  CHECK(applied.steps[2].step == 5);

  // The nurse learned the request; the channel to A now holds the clips.
  CHECK(applied.state.knowledge.at(AgentId{"N"})
            .atoms.count(MessageAtom{"clips_requested"}) == 1);
  CHECK(applied.state.in_flight.at({AgentId{"N"}, AgentId{"A"}}).size() == 1);
}

TEST_CASE("a retained receive with an empty channel deadlocks") {
  CompiledCeremony compiled = test::compile_file("cutting.cer");
  CeremonyState st = run_originals(compiled, 2);

  // The assistant skips the send; the surgeon's rule still expects it.
  auto variants = generate_variants(compiled.rules[2], all_mutation_kinds());
  RuleVariant skip_send = variants[2];
  REQUIRE(skip_send.element_labels()[0].first == "skip_send");
  StepResult r2 = apply_rule(st, skip_send);
  st = std::get<Applied>(r2).state;

  StepResult r3 = apply_rule(st, original_variant(compiled.rules[3]));
  REQUIRE(std::holds_alternative<Deadlock>(r3));
  CHECK(std::get<Deadlock>(r3).rule_index == 3);
}

TEST_CASE("a retained receive with the wrong atom fails its check") {
  CompiledCeremony compiled = test::compile_file("cutting.cer");
  CeremonyState st = run_originals(compiled, 2);

  auto variants = generate_variants(compiled.rules[2], all_mutation_kinds());
  RuleVariant replace = variants[3];
  REQUIRE(replace.element_labels()[0].first == "replace_send");
  StepResult r2 = apply_rule(st, replace);
  st = std::get<Applied>(r2).state;

  StepResult r3 = apply_rule(st, original_variant(compiled.rules[3]));
  REQUIRE(std::holds_alternative<CheckFailure>(r3));
  const auto& fail = std::get<CheckFailure>(r3);
  CHECK(fail.rule_index == 3);
  CHECK(fail.expected == MessageAtom{"clips_applied"});
  CHECK(fail.actual == MessageAtom{"clips_applied", true});
}

TEST_CASE("a matched replace receive accepts and learns the negated atom") {
  CompiledCeremony compiled = test::compile_file("cutting.cer");
  CeremonyState st = run_originals(compiled, 2);

  auto variants = generate_variants(compiled.rules[2], all_mutation_kinds());
  st = std::get<Applied>(apply_rule(st, variants[3])).state;

  RuleVariant matched = original_variant(compiled.rules[3]);
  matched.receive_fate = ReceiveFate::expect_negated;
  StepResult r = apply_rule(st, matched);
  REQUIRE(std::holds_alternative<Applied>(r));
  const Applied& applied = std::get<Applied>(r);
  CHECK(applied.state.knowledge.at(AgentId{"S"})
            .atoms.count(MessageAtom{"clips_applied", true}) == 1);
  CHECK(applied.steps[0].mutated);
  CHECK(*applied.steps[0].mutation_kind == "matched_replace_receive");
  // The surgeon proceeds regardless: cut and confirmation follow.
  CHECK(applied.steps.size() == 3);
}

TEST_CASE("a skipped receive leaves knowledge untouched") {
  CompiledCeremony compiled = test::compile_file("cutting.cer");
  CeremonyState st = run_originals(compiled, 2);
  auto variants = generate_variants(compiled.rules[2], all_mutation_kinds());
  st = std::get<Applied>(apply_rule(st, variants[2])).state;  // skip_send

  RuleVariant matched = original_variant(compiled.rules[3]);
  matched.receive_fate = ReceiveFate::skipped;
  StepResult r = apply_rule(st, matched);
  REQUIRE(std::holds_alternative<Applied>(r));
  const Applied& applied = std::get<Applied>(r);
  CHECK(applied.state.knowledge.at(AgentId{"S"})
            .atoms.count(MessageAtom{"clips_applied"}) == 0);
  REQUIRE(applied.steps.size() == 2);  // cut and send only
  CHECK(describe_event(applied.steps[0].event) == "act S cut(ureter)");
}

TEST_CASE("apply_rule is pure") {
  CompiledCeremony compiled = test::compile_file("cutting.cer");
  CeremonyState st = run_originals(compiled, 1);
  StepResult a = apply_rule(st, original_variant(compiled.rules[1]), 3);
  StepResult b = apply_rule(st, original_variant(compiled.rules[1]), 3);
  CHECK(std::get<Applied>(a).state == std::get<Applied>(b).state);
  CHECK(std::get<Applied>(a).steps == std::get<Applied>(b).steps);
}

TEST_CASE("apply_rule rejects a state number mismatch") {
  CompiledCeremony compiled = test::compile_file("cutting.cer");
  CeremonyState st = initial_state(compiled.spec);
  CHECK_THROWS_AS(apply_rule(st, original_variant(compiled.rules[1])),
                  std::logic_error);
}

TEST_CASE("replaying all originals walks states 0 through final") {
  for (const char* name : {"cutting.cer", "lateral.cer"}) {
    CAPTURE(name);
    CompiledCeremony compiled = test::compile_file(name);
    CeremonyState st = initial_state(compiled.spec);
    for (const auto& rule : compiled.rules) {
      StepResult r = apply_rule(st, original_variant(rule));
      REQUIRE(std::holds_alternative<Applied>(r));
      CeremonyState next = std::get<Applied>(r).state;
      CHECK(next.number == st.number + 1);
      st = next;
    }
    CHECK(st.number == compiled.final_state);
  }
}
