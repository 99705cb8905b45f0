#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "ceremony/parse.hpp"
#include "ceremony/spec.hpp"

namespace ceremony {

// One premise -> conclusion rewrite block: (start | receive) actions* send?.
// The conclusion index is premise_index + 1. `owns_start` records that the
// agent's start event belongs to this block; only a block that opens with
// start rather than a receive behaves as an opening rule.
struct TransitionRule {
  int premise_index = -1;
  AgentId agent;
  bool owns_start = false;
  std::optional<ReceiveEvent> receive;
  std::vector<ActionEvent> actions;
  std::optional<SendEvent> send;

  bool is_start_rule() const { return owns_start && !receive.has_value(); }

  friend bool operator==(const TransitionRule&, const TransitionRule&) = default;
};

struct CompiledCeremony {
  CeremonySpec spec;
  std::vector<TransitionRule> rules;  // rule k has premise_index k
  int final_state = 0;
  std::map<ActionPattern, std::set<ActionPattern>> dependency_graph;
};

struct SegmentResult {
  std::map<AgentId, std::vector<TransitionRule>> blocks;
  std::vector<Diagnostic> diagnostics;

  bool ok() const { return !has_errors(diagnostics); }
};

// Partitions each script into maximal rule blocks. A block opens at the
// script's start event or at a receive and closes after its first send; the
// start event of a script whose work begins with a receive is absorbed into
// that first receive block.
inline SegmentResult segment_scripts(const CeremonySpec& spec) {
  SegmentResult result;
  for (const auto& script : spec.scripts) {
    std::vector<TransitionRule> blocks;
    std::optional<TransitionRule> current;
    auto close = [&] {
      if (current) {
        blocks.push_back(std::move(*current));
        current.reset();
      }
    };
    for (const auto& ev : script.events) {
      if (std::holds_alternative<StartEvent>(ev)) {
        if (current || !blocks.empty()) {
          result.diagnostics.push_back(
              {Severity::error, detail::event_line(ev), 0,
               "start must open the script of " + script.agent.name});
          continue;
        }
        current = TransitionRule{};
        current->agent = script.agent;
        current->owns_start = true;
      } else if (const auto* rcv = std::get_if<ReceiveEvent>(&ev)) {
        bool bare_start = current && current->owns_start &&
                          !current->receive && current->actions.empty() &&
                          !current->send;
        if (!bare_start) close();
        if (!current) {
          current = TransitionRule{};
          current->agent = script.agent;
        }
        current->receive = *rcv;
      } else if (const auto* act = std::get_if<ActionEvent>(&ev)) {
        if (!current) {
          result.diagnostics.push_back(
              {Severity::error, act->line, 0,
               "action outside any block in role " + script.agent.name});
          continue;
        }
        if (current->send) {
          result.diagnostics.push_back(
              {Severity::error, act->line, 0,
               "action after send with no intervening receive in role " +
                   script.agent.name});
          continue;
        }
        current->actions.push_back(*act);
      } else if (const auto* snd = std::get_if<SendEvent>(&ev)) {
        if (!current) {
          result.diagnostics.push_back(
              {Severity::error, snd->line, 0,
               "send outside any block in role " + script.agent.name});
          continue;
        }
        if (current->send) {
          result.diagnostics.push_back(
              {Severity::error, snd->line, 0,
               "two sends with no intervening receive in role " +
                   script.agent.name});
          continue;
        }
        current->send = *snd;
      }
    }
    close();
    result.blocks[script.agent] = std::move(blocks);
  }
  return result;
}

struct CompileResult {
  std::optional<CompiledCeremony> compiled;
  std::vector<Diagnostic> diagnostics;

  bool ok() const { return compiled.has_value() && !has_errors(diagnostics); }
};

// Assigns premise indices by the unique total order compatible with script
// order and message causality. Multiple admissible orders are an error, as
// is a receive that cannot be placed after its matching send.
inline CompileResult linearize(
    const CeremonySpec& spec,
    const std::map<AgentId, std::vector<TransitionRule>>& blocks) {
  struct Node {
    AgentId agent;
    size_t index_in_agent;
    const TransitionRule* block;
  };
  std::vector<Node> nodes;
  for (const auto& agent : spec.agents) {
    auto it = blocks.find(agent);
    if (it == blocks.end()) continue;
    for (size_t i = 0; i < it->second.size(); ++i)
      nodes.push_back({agent, i, &it->second[i]});
  }

  CompileResult result;
  auto describe = [&](size_t n) {
    return "block " + std::to_string(nodes[n].index_in_agent + 1) +
           " of agent " + nodes[n].agent.name;
  };

  // Edges: script order within an agent, and send-block -> receive-block.
  std::map<std::tuple<AgentId, AgentId, std::string>, size_t> send_node;
  for (size_t n = 0; n < nodes.size(); ++n)
    if (nodes[n].block->send) {
      const auto& s = *nodes[n].block->send;
      send_node[{s.sender, s.receiver, s.message.name}] = n;
    }
  std::vector<std::vector<size_t>> succ(nodes.size());
  std::vector<int> indegree(nodes.size(), 0);
  auto add_edge = [&](size_t from, size_t to) {
    succ[from].push_back(to);
    ++indegree[to];
  };
  for (size_t n = 0; n < nodes.size(); ++n) {
    if (nodes[n].index_in_agent > 0) add_edge(n - 1, n);
    if (nodes[n].block->receive) {
      const auto& r = *nodes[n].block->receive;
      auto it = send_node.find({r.sender, r.receiver, r.expected.name});
      if (it == send_node.end()) {
        result.diagnostics.push_back(
            {Severity::error, r.line, 0,
             "unmatched receive: no send of " + r.expected.label()});
        continue;
      }
      add_edge(it->second, n);
    }
  }
  if (has_errors(result.diagnostics)) return result;

  // Kahn's algorithm; the ready set must stay a singleton throughout.
  std::set<size_t> ready;
  for (size_t n = 0; n < nodes.size(); ++n)
    if (indegree[n] == 0) ready.insert(n);
  std::vector<TransitionRule> rules;
  while (!ready.empty()) {
    if (ready.size() > 1) {
      auto it = ready.begin();
      size_t a = *it++;
      size_t b = *it;
      result.diagnostics.push_back(
          {Severity::error, 0, 0,
           "ambiguous order: " + describe(a) + " and " + describe(b) +
               " are order-independent"});
      return result;
    }
    size_t n = *ready.begin();
    ready.erase(ready.begin());
    TransitionRule rule = *nodes[n].block;
    rule.premise_index = static_cast<int>(rules.size());
    rules.push_back(std::move(rule));
    for (size_t m : succ[n])
      if (--indegree[m] == 0) ready.insert(m);
  }
  if (rules.size() != nodes.size()) {
    result.diagnostics.push_back(
        {Severity::error, 0, 0,
         "causal cycle: some receive precedes its matching send"});
    return result;
  }

  CompiledCeremony compiled;
  compiled.spec = spec;
  compiled.final_state = static_cast<int>(rules.size());
  compiled.rules = std::move(rules);
  for (const auto& dep : spec.dependencies)
    compiled.dependency_graph[dep.dependent].insert(dep.prerequisite);
  result.compiled = std::move(compiled);
  return result;
}

inline CompileResult compile_ceremony(const CeremonySpec& spec) {
  SegmentResult seg = segment_scripts(spec);
  if (!seg.ok()) return {std::nullopt, seg.diagnostics};
  return linearize(spec, seg.blocks);
}

}  // namespace ceremony
