#pragma once

#include <algorithm>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "ceremony/property.hpp"

namespace ceremony {

enum class RenderFormat { msc_text, json, dot };

struct RenderOptions {
  RenderFormat format = RenderFormat::msc_text;
  bool show_mutations = false;
  int width = 32;  // column width, at least 12
};

namespace detail {

using ordered_json = nlohmann::ordered_json;

inline std::string kind_name(MutationKind k) { return to_string(k); }

inline ordered_json config_to_json(const ExploreConfig& config) {
  ordered_json kinds = ordered_json::array();
  for (MutationKind k : config.kinds) kinds.push_back(kind_name(k));
  ordered_json out;
  out["kinds"] = std::move(kinds);
  out["budget"] = config.budget ? ordered_json(*config.budget) : ordered_json(nullptr);
  return out;
}

inline ordered_json step_to_json(const TraceStep& s) {
  ordered_json j;
  j["step"] = s.step;
  j["rule"] = s.rule_index;
  if (const auto* st = std::get_if<StartEvent>(&s.event)) {
    j["kind"] = "start";
    j["agent"] = st->agent.name;
  } else if (const auto* act = std::get_if<ActionEvent>(&s.event)) {
    j["kind"] = "action";
    j["agent"] = act->agent.name;
    j["verb"] = act->verb;
    j["object"] = act->object;
  } else if (const auto* snd = std::get_if<SendEvent>(&s.event)) {
    j["kind"] = "snd";
    j["agent"] = snd->sender.name;
    j["sender"] = snd->sender.name;
    j["receiver"] = snd->receiver.name;
    j["message"] = snd->message.name;
    j["negated"] = snd->message.negated;
  } else if (const auto* rcv = std::get_if<ReceiveEvent>(&s.event)) {
    j["kind"] = "rcv";
    j["agent"] = rcv->receiver.name;
    j["sender"] = rcv->sender.name;
    j["receiver"] = rcv->receiver.name;
    j["message"] = rcv->expected.name;
    j["negated"] = rcv->expected.negated;
  }
  j["mutated"] = s.mutated;
  return j;
}

inline ordered_json trace_to_json(const Trace& trace) {
  ordered_json assignment = ordered_json::array();
  for (const auto& [rule, variant] : trace.assignment.normalized().choices) {
    for (const auto& [label, primary] : variant.element_labels()) {
      ordered_json e;
      e["rule"] = rule;
      e["kind"] = label;
      e["primary"] = primary;
      assignment.push_back(std::move(e));
    }
  }
  ordered_json steps = ordered_json::array();
  for (const auto& s : trace.steps) steps.push_back(step_to_json(s));
  ordered_json out;
  out["assignment"] = std::move(assignment);
  out["steps"] = std::move(steps);
  return out;
}

inline ordered_json witness_to_json(const Witness& w) {
  ordered_json prereqs = ordered_json::array();
  for (const auto& p : w.prerequisites) {
    ordered_json e;
    e["pattern"] = p.pattern.to_string();
    e["position"] = p.position ? ordered_json(*p.position) : ordered_json(nullptr);
    prereqs.push_back(std::move(e));
  }
  ordered_json out;
  out["trace"] = w.trace_index;
  out["antecedent_position"] = w.antecedent_position;
  out["prerequisites"] = std::move(prereqs);
  return out;
}

inline ordered_json verdict_to_json(const Verdict& v) {
  ordered_json out;
  out["property"] = v.property;
  out["mode"] = v.mode == PropertyMode::forall_traces ? "forall_traces"
                                                      : "exists_trace";
  out["holds"] = v.holds;
  ordered_json ws = ordered_json::array();
  for (const auto& w : v.witnesses) ws.push_back(witness_to_json(w));
  out["witnesses"] = std::move(ws);
  return out;
}

}  // namespace detail

// --- JSON export / import ------------------------------------------------

inline std::string export_json(const TraceSet& traces,
                               const std::vector<Verdict>& verdicts) {
  detail::ordered_json out;
  out["ceremony"] = traces.ceremony;
  out["config"] = detail::config_to_json(traces.config);
  detail::ordered_json ts = detail::ordered_json::array();
  for (const auto& t : traces.traces) ts.push_back(detail::trace_to_json(t));
  out["traces"] = std::move(ts);
  detail::ordered_json vs = detail::ordered_json::array();
  for (const auto& v : verdicts) vs.push_back(detail::verdict_to_json(v));
  out["verdicts"] = std::move(vs);
  return out.dump(2) + "\n";
}

// The canonical serialization used for determinism checks and trace-set
// comparison: the JSON export without verdicts.
inline std::string canonical_serialization(const TraceSet& traces) {
  return export_json(traces, {});
}

// Shallow schema check for exported documents; returns problems found.
inline std::vector<std::string> validate_export_schema(const std::string& text) {
  std::vector<std::string> problems;
  nlohmann::json doc = nlohmann::json::parse(text, nullptr, false);
  if (doc.is_discarded()) return {"not valid JSON"};
  auto need = [&](const nlohmann::json& j, const char* key, const char* type) {
    if (!j.contains(key)) {
      problems.push_back(std::string("missing key: ") + key);
      return false;
    }
    const auto& v = j.at(key);
    std::string t = type;
    bool ok = (t == "string" && v.is_string()) || (t == "int" && v.is_number_integer()) ||
              (t == "bool" && v.is_boolean()) || (t == "array" && v.is_array()) ||
              (t == "object" && v.is_object());
    if (!ok) problems.push_back(std::string("wrong type for key: ") + key);
    return ok;
  };
  need(doc, "ceremony", "string");
  if (need(doc, "config", "object")) {
    need(doc.at("config"), "kinds", "array");
    if (!doc.at("config").contains("budget"))
      problems.push_back("missing key: budget");
  }
  need(doc, "verdicts", "array");
  if (!need(doc, "traces", "array")) return problems;
  for (const auto& t : doc.at("traces")) {
    need(t, "assignment", "array");
    if (!need(t, "steps", "array")) continue;
    for (const auto& s : t.at("steps")) {
      need(s, "step", "int");
      need(s, "rule", "int");
      need(s, "kind", "string");
      need(s, "agent", "string");
      need(s, "mutated", "bool");
      if (s.contains("kind") && (s.at("kind") == "snd" || s.at("kind") == "rcv")) {
        need(s, "sender", "string");
        need(s, "receiver", "string");
        need(s, "message", "string");
        need(s, "negated", "bool");
      }
    }
  }
  return problems;
}

namespace detail {

inline RuleVariant variant_from_labels(
    const TransitionRule& rule,
    const std::vector<std::pair<std::string, bool>>& labels) {
  RuleVariant v = original_variant(rule);
  for (const auto& [label, primary] : labels) {
    if (label == "skip_send") {
      v.send_fate = SendFate::skipped;
    } else if (label == "replace_send") {
      v.send_fate = SendFate::replaced;
    } else if (label == "matched_skip_receive") {
      v.receive_fate = ReceiveFate::skipped;
    } else if (label == "matched_replace_receive") {
      v.receive_fate = ReceiveFate::expect_negated;
    } else if (label.rfind("skip_action(", 0) == 0 ||
               label.rfind("matched_skip_action(", 0) == 0) {
      size_t open = label.find('(');
      int pos = std::stoi(label.substr(open + 1));
      if (pos < 0 || pos >= static_cast<int>(v.action_fates.size()))
        throw std::invalid_argument("action position out of range: " + label);
      v.action_fates[pos] =
          primary ? ActionFate::skipped_primary : ActionFate::skipped_matched;
    } else {
      throw std::invalid_argument("unknown mutation kind: " + label);
    }
  }
  return v;
}

inline ScriptEvent step_event_from_json(const nlohmann::json& s) {
  std::string kind = s.at("kind");
  if (kind == "start") return StartEvent{AgentId{s.at("agent")}};
  if (kind == "action")
    return ActionEvent{AgentId{s.at("agent")}, s.at("verb"), s.at("object"),
                       std::nullopt};
  MessageAtom atom{s.at("message"), s.at("negated")};
  if (kind == "snd")
    return SendEvent{AgentId{s.at("sender")}, AgentId{s.at("receiver")}, atom};
  if (kind == "rcv")
    return ReceiveEvent{AgentId{s.at("sender")}, AgentId{s.at("receiver")}, atom};
  throw std::invalid_argument("unknown step kind: " + kind);
}

}  // namespace detail

// Parses an exported document back into a trace set. Steps and assignments
// come from the document; final states are recomputed by replay.
inline TraceSet import_json(const CompiledCeremony& compiled,
                            const std::string& text) {
  nlohmann::json doc = nlohmann::json::parse(text);
  TraceSet out;
  out.ceremony = doc.at("ceremony");
  out.config.kinds.clear();
  for (const auto& k : doc.at("config").at("kinds")) {
    std::string name = k;
    if (name == "skip_action") out.config.kinds.insert(MutationKind::skip_action);
    else if (name == "skip_send") out.config.kinds.insert(MutationKind::skip_send);
    else if (name == "replace_send") out.config.kinds.insert(MutationKind::replace_send);
    else throw std::invalid_argument("unknown mutation kind: " + name);
  }
  const auto& budget = doc.at("config").at("budget");
  out.config.budget = budget.is_null() ? std::nullopt
                                       : std::optional<int>(budget.get<int>());
  for (const auto& t : doc.at("traces")) {
    Trace trace;
    std::map<int, std::vector<std::pair<std::string, bool>>> labels;
    for (const auto& e : t.at("assignment"))
      labels[e.at("rule").get<int>()].push_back({e.at("kind"), e.at("primary")});
    for (const auto& [rule, ls] : labels) {
      if (rule < 0 || rule >= static_cast<int>(compiled.rules.size()))
        throw std::invalid_argument("assignment references unknown rule");
      trace.assignment.choices.emplace(
          rule, detail::variant_from_labels(compiled.rules[rule], ls));
    }
    for (const auto& s : t.at("steps")) {
      TraceStep step;
      step.step = s.at("step");
      step.rule_index = s.at("rule");
      step.event = detail::step_event_from_json(s);
      step.mutated = s.at("mutated");
      if (step.mutated) {
        const auto* rcv = std::get_if<ReceiveEvent>(&step.event);
        step.mutation_kind = rcv ? "matched_replace_receive" : "replace_send";
      }
      trace.steps.push_back(std::move(step));
    }
    ReplayResult replayed = replay_assignment(compiled, trace.assignment, false);
    if (const Trace* full = std::get_if<Trace>(&replayed))
      trace.final_state = full->final_state;
    else
      throw std::invalid_argument("imported assignment does not replay");
    out.traces.push_back(std::move(trace));
  }
  return out;
}

// --- text MSC -------------------------------------------------------------

// One column per agent in declaration order. Actions appear as bracketed
// boxes on their agent's lifeline, each message as a single arrow drawn at
// its send step. With show_mutations, skipped elements leave explicit
// markers in place.
inline std::string render_msc(const CompiledCeremony& compiled, const Trace& trace,
                              const RenderOptions& opts) {
  if (opts.width < 12)
    throw std::invalid_argument("msc column width must be at least 12");
  const auto& agents = compiled.spec.agents;
  const int width = opts.width;
  const int total = width * static_cast<int>(agents.size());
  std::map<AgentId, int> center;
  for (size_t i = 0; i < agents.size(); ++i)
    center[agents[i]] = static_cast<int>(i) * width + width / 2;

  auto blank_row = [&] {
    std::string row(total, ' ');
    for (const auto& [_, c] : center) row[c] = '|';
    return row;
  };
  auto place = [&](std::string& row, int at_center, const std::string& text) {
    int begin = at_center - static_cast<int>(text.size()) / 2;
    begin = std::max(0, std::min(begin, total - static_cast<int>(text.size())));
    for (size_t i = 0; i < text.size() && begin + static_cast<int>(i) < total; ++i)
      row[begin + i] = text[i];
  };

  std::ostringstream out;
  {
    std::string header(total, ' ');
    for (const auto& agent : agents) place(header, center[agent], agent.name);
    out << header << "\n";
  }
  if (trace.steps.empty()) return out.str();

  auto box_row = [&](const AgentId& agent, const std::string& label) {
    std::string row = blank_row();
    place(row, center[agent], label);
    out << row << "\n";
  };
  auto arrow_row = [&](const AgentId& from, const AgentId& to,
                       const std::string& label) {
    std::string row = blank_row();
    int a = center[from], b = center[to];
    int lo = std::min(a, b), hi = std::max(a, b);
    for (int i = lo + 1; i < hi; ++i) row[i] = '-';
    place(row, (lo + hi) / 2, label);
    // The head is structural; draw it last so long labels cannot cover it.
    if (b > a)
      row[b - 1] = '>';
    else
      row[b + 1] = '<';
    out << row << "\n";
  };

  // Walk rules in order, interleaving retained steps with skip markers.
  for (const auto& rule : compiled.rules) {
    const RuleVariant* chosen = trace.assignment.choice_for(rule.premise_index);
    RuleVariant variant = chosen ? *chosen : original_variant(rule);
    if (rule.receive) {
      if (variant.receive_fate == ReceiveFate::skipped && opts.show_mutations)
        box_row(rule.receive->receiver,
                "[skipped recv: " + rule.receive->expected.label() + "]");
      // A kept receive is the head of the arrow drawn at its send.
    }
    for (size_t i = 0; i < rule.actions.size(); ++i) {
      const auto& act = rule.actions[i];
      std::string label = act.verb + "(" + act.object + ")";
      if (variant.action_fates[i] == ActionFate::kept)
        box_row(act.agent, "[" + label + "]");
      else if (opts.show_mutations)
        box_row(act.agent, "[skipped: " + label + "]");
    }
    if (rule.send) {
      if (variant.send_fate == SendFate::skipped) {
        if (opts.show_mutations)
          box_row(rule.send->sender,
                  "[skipped send: " + rule.send->message.label() + "]");
      } else {
        MessageAtom msg = variant.send_fate == SendFate::replaced
                              ? negate(rule.send->message)
                              : rule.send->message;
        arrow_row(rule.send->sender, rule.send->receiver, msg.label());
      }
    }
  }
  return out.str();
}

// --- dot ------------------------------------------------------------------

// One digraph per trace: nodes are steps, solid edges follow step order,
// dashed edges connect each send to its receive.
inline std::string export_dot(const TraceSet& traces) {
  std::ostringstream out;
  for (size_t t = 0; t < traces.traces.size(); ++t) {
    const Trace& trace = traces.traces[t];
    out << "digraph trace_" << t << " {\n";
    out << "  rankdir=TB;\n";
    for (const auto& s : trace.steps)
      out << "  s" << s.step << " [label=\"" << s.step << ": "
          << describe_event(s.event) << "\"];\n";
    for (size_t i = 1; i < trace.steps.size(); ++i)
      out << "  s" << trace.steps[i - 1].step << " -> s" << trace.steps[i].step
          << ";\n";
    // Pair sends with receives by replaying channel queues over the steps.
    std::map<std::pair<AgentId, AgentId>, std::deque<int>> pending;
    for (const auto& s : trace.steps) {
      if (const auto* snd = std::get_if<SendEvent>(&s.event)) {
        pending[{snd->sender, snd->receiver}].push_back(s.step);
      } else if (const auto* rcv = std::get_if<ReceiveEvent>(&s.event)) {
        auto& q = pending[{rcv->sender, rcv->receiver}];
        if (!q.empty()) {
          out << "  s" << q.front() << " -> s" << s.step
              << " [style=dashed, label=\"" << rcv->expected.label() << "\"];\n";
          q.pop_front();
        }
      }
    }
    out << "}\n";
  }
  return out.str();
}

inline std::string export_trace_set(const TraceSet& traces,
                                    const std::vector<Verdict>& verdicts,
                                    RenderFormat format) {
  switch (format) {
    case RenderFormat::json: return export_json(traces, verdicts);
    case RenderFormat::dot: return export_dot(traces);
    default: throw std::invalid_argument("export needs json or dot format");
  }
}

// --- violation text ---------------------------------------------------

namespace detail {

inline std::string describe_primary_mutations(const Trace& trace,
                                              const CompiledCeremony& compiled) {
  std::vector<std::string> parts;
  for (const auto& [rule, variant] : trace.assignment.normalized().choices) {
    const TransitionRule& base = compiled.rules[rule];
    for (size_t i = 0; i < variant.action_fates.size(); ++i)
      if (variant.action_fates[i] == ActionFate::skipped_primary)
        parts.push_back("skip_action(" + base.actions[i].verb + "(" +
                        base.actions[i].object + ")) at rule " +
                        std::to_string(rule) + " (" + base.agent.name + ")");
    if (variant.send_fate == SendFate::skipped)
      parts.push_back("skip_send(" + base.send->message.label() + ") at rule " +
                      std::to_string(rule) + " (" + base.agent.name + ")");
    if (variant.send_fate == SendFate::replaced)
      parts.push_back("replace_send(" + base.send->message.label() + ") at rule " +
                      std::to_string(rule) + " (" + base.agent.name + ")");
  }
  if (parts.empty()) return "none";
  std::string out;
  for (size_t i = 0; i < parts.size(); ++i) out += (i ? ", " : "") + parts[i];
  return out;
}

}  // namespace detail

// Human-readable summary of every non-kept element of an assignment, with
// mutated elements named by their events.
inline std::string describe_assignment(const MutationAssignment& assignment,
                                       const CompiledCeremony& compiled) {
  std::vector<std::string> parts;
  for (const auto& [rule, variant] : assignment.normalized().choices) {
    const TransitionRule& base = compiled.rules[rule];
    auto at_rule = [&](const std::string& what) {
      parts.push_back("rule " + std::to_string(rule) + ": " + what);
    };
    if (variant.receive_fate == ReceiveFate::skipped)
      at_rule("matched_skip_receive(" + base.receive->expected.label() + ")");
    else if (variant.receive_fate == ReceiveFate::expect_negated)
      at_rule("matched_replace_receive(" +
              negate(base.receive->expected).label() + ")");
    for (size_t i = 0; i < variant.action_fates.size(); ++i) {
      std::string action = base.actions[i].verb + "(" + base.actions[i].object + ")";
      if (variant.action_fates[i] == ActionFate::skipped_primary)
        at_rule("skip_action(" + action + ")");
      else if (variant.action_fates[i] == ActionFate::skipped_matched)
        at_rule("matched_skip_action(" + action + ")");
    }
    if (variant.send_fate == SendFate::skipped)
      at_rule("skip_send(" + base.send->message.label() + ")");
    else if (variant.send_fate == SendFate::replaced)
      at_rule("replace_send(" + base.send->message.label() + ")");
  }
  if (parts.empty()) return "original";
  std::string out;
  for (size_t i = 0; i < parts.size(); ++i) out += (i ? "; " : "") + parts[i];
  return out;
}

// Renders the witnesses of a violated forall verdict (or of a satisfied
// existential one) as one paragraph each.
inline std::string format_violation(const Verdict& verdict,
                                    const TraceSet& traces,
                                    const CompiledCeremony& compiled) {
  bool formattable = verdict.mode == PropertyMode::forall_traces
                         ? !verdict.holds
                         : verdict.holds;
  if (!formattable)
    throw std::invalid_argument("verdict for " + verdict.property +
                                " has nothing to format");
  std::ostringstream out;
  for (const auto& w : verdict.witnesses) {
    const Trace& trace = traces.traces.at(w.trace_index);
    if (verdict.mode == PropertyMode::exists_trace) {
      out << "property " << verdict.property << ": witnessed by trace "
          << w.trace_index << " (antecedent at step " << w.antecedent_position
          << ")\n";
      out << "  primary mutations: "
          << detail::describe_primary_mutations(trace, compiled) << "\n";
      continue;
    }
    out << "property " << verdict.property << ": violated in trace "
        << w.trace_index << "\n";
    for (const auto& s : trace.steps) {
      if (s.step == w.antecedent_position) {
        out << "  antecedent " << describe_event(s.event) << " at step "
            << s.step << "\n";
        break;
      }
    }
    for (const auto& p : w.prerequisites) {
      if (p.position)
        out << "  found: " << p.pattern.to_string() << " at step "
            << *p.position << "\n";
      else
        out << "  missing: " << p.pattern.to_string() << "\n";
    }
    out << "  primary mutations: "
        << detail::describe_primary_mutations(trace, compiled) << "\n";
  }
  return out.str();
}

}  // namespace ceremony
