// ceremony-check: parse a ceremony file, explore its mutated executions and
// check its properties.
//
// Exit codes: 0 all properties hold, 1 some property violated or
// unsatisfied, 2 specification or usage error, 3 internal error or oracle
// guard/mismatch.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ceremony/ceremony.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitViolated = 1;
constexpr int kExitSpecError = 2;
constexpr int kExitInternalError = 3;

struct CommonArgs {
  std::string file;
  std::string mutations = "skip-action,skip-send,replace";
  int budget = 2;
  std::string format = "text";
};

bool parse_kinds(const std::string& arg, std::set<ceremony::MutationKind>* out) {
  out->clear();
  if (arg == "none") return true;
  std::stringstream ss(arg);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item == "skip-action")
      out->insert(ceremony::MutationKind::skip_action);
    else if (item == "skip-send")
      out->insert(ceremony::MutationKind::skip_send);
    else if (item == "replace")
      out->insert(ceremony::MutationKind::replace_send);
    else
      return false;
  }
  return true;
}

int load_and_compile(const std::string& path, ceremony::CompiledCeremony* out) {
  std::ifstream in(path);
  if (!in) {
    std::cerr << "error: cannot read " << path << "\n";
    return kExitSpecError;
  }
  std::stringstream buffer;
  buffer << in.rdbuf();

  ceremony::ParseResult parsed = ceremony::parse_ceremony(buffer.str());
  if (!parsed.ok()) {
    for (const auto& d : parsed.diagnostics)
      std::cerr << path << ":" << d.to_string() << "\n";
    return kExitSpecError;
  }
  auto diags = ceremony::validate_spec(*parsed.spec);
  if (ceremony::has_errors(diags)) {
    for (const auto& d : diags) std::cerr << path << ":" << d.to_string() << "\n";
    return kExitSpecError;
  }
  ceremony::CompileResult compiled = ceremony::compile_ceremony(*parsed.spec);
  if (!compiled.ok()) {
    for (const auto& d : compiled.diagnostics)
      std::cerr << path << ":" << d.to_string() << "\n";
    return kExitSpecError;
  }
  *out = std::move(*compiled.compiled);
  return kExitOk;
}

std::string trace_count(size_t n) {
  return std::to_string(n) + (n == 1 ? " trace" : " traces");
}

int run_verify(const CommonArgs& args, bool all_violations, bool with_oracle) {
  ceremony::CompiledCeremony compiled;
  if (int rc = load_and_compile(args.file, &compiled)) return rc;

  ceremony::ExploreConfig config;
  if (!parse_kinds(args.mutations, &config.kinds)) {
    std::cerr << "error: unknown mutation kind in --mutations\n";
    return kExitSpecError;
  }
  config.budget = args.budget;
  config.collect = all_violations ? ceremony::CollectMode::all_traces
                                  : ceremony::CollectMode::first_violation;

  ceremony::TraceSet traces = ceremony::enumerate_traces(compiled, config);
  std::vector<ceremony::Verdict> verdicts =
      ceremony::check_all(traces, compiled.spec.properties, compiled.spec);

  if (with_oracle) {
    try {
      ceremony::TraceSet reference = ceremony::brute_force_enumerate(compiled, config);
      ceremony::OracleReport report = ceremony::diff_trace_sets(traces, reference);
      if (!report.mismatches.empty()) {
        std::cerr << "oracle mismatch: " << report.mismatches.size()
                  << " differing trace(s) out of " << report.assignments_examined
                  << "\n";
        for (const auto& m : report.mismatches)
          std::cerr << "  " << m.assignment << " explorer=" << m.explorer_result
                    << " oracle=" << m.oracle_result << "\n";
        return kExitInternalError;
      }
    } catch (const ceremony::OracleGuardError& e) {
      std::cerr << "error: " << e.what() << "\n";
      return kExitInternalError;
    }
  }

  if (args.format == "json") {
    std::cout << ceremony::export_json(traces, verdicts);
  } else if (args.format == "dot") {
    std::cout << ceremony::export_dot(traces);
  } else {
    for (const auto& v : verdicts) {
      if (v.mode == ceremony::PropertyMode::forall_traces) {
        if (v.holds)
          std::cout << v.property << ": HOLDS (" << trace_count(traces.traces.size())
                    << ")\n";
        else
          std::cout << v.property << ": VIOLATED\n";
      } else {
        if (v.holds)
          std::cout << v.property << ": HOLDS (witness trace "
                    << v.witnesses.front().trace_index << ")\n";
        else
          std::cout << v.property << ": UNSATISFIED (no witness in "
                    << trace_count(traces.traces.size()) << ")\n";
      }
    }
    for (const auto& v : verdicts)
      if (v.mode == ceremony::PropertyMode::forall_traces && !v.holds)
        std::cout << ceremony::format_violation(v, traces, compiled);
  }

  for (const auto& v : verdicts)
    if (!v.holds) return kExitViolated;
  return kExitOk;
}

int run_explore(const CommonArgs& args) {
  ceremony::CompiledCeremony compiled;
  if (int rc = load_and_compile(args.file, &compiled)) return rc;

  ceremony::ExploreConfig config;
  if (!parse_kinds(args.mutations, &config.kinds)) {
    std::cerr << "error: unknown mutation kind in --mutations\n";
    return kExitSpecError;
  }
  config.budget = args.budget;

  ceremony::TraceSet traces = ceremony::enumerate_traces(compiled, config);
  if (args.format == "json") {
    std::cout << ceremony::export_json(traces, {});
  } else if (args.format == "dot") {
    std::cout << ceremony::export_dot(traces);
  } else {
    std::cout << "ceremony " << traces.ceremony << ": "
              << trace_count(traces.traces.size()) << " (budget " << args.budget
              << ")\n";
    for (size_t t = 0; t < traces.traces.size(); ++t) {
      const auto& trace = traces.traces[t];
      std::cout << "trace " << t << ": "
                << ceremony::describe_assignment(trace.assignment, compiled)
                << "\n";
      for (const auto& s : trace.steps)
        std::cout << "  " << s.step << ": " << ceremony::describe_event(s.event)
                  << (s.mutated ? " [mutated]" : "") << "\n";
    }
  }
  return kExitOk;
}

int run_render(const CommonArgs& args, int trace_index, bool show_mutations) {
  ceremony::CompiledCeremony compiled;
  if (int rc = load_and_compile(args.file, &compiled)) return rc;

  ceremony::ExploreConfig config;
  if (!parse_kinds(args.mutations, &config.kinds)) {
    std::cerr << "error: unknown mutation kind in --mutations\n";
    return kExitSpecError;
  }
  config.budget = args.budget;

  ceremony::TraceSet traces = ceremony::enumerate_traces(compiled, config);
  if (trace_index < 0 || trace_index >= static_cast<int>(traces.traces.size())) {
    std::cerr << "error: trace index " << trace_index << " out of range (0.."
              << traces.traces.size() - 1 << ")\n";
    return kExitSpecError;
  }
  ceremony::RenderOptions opts;
  opts.format = ceremony::RenderFormat::msc_text;
  opts.show_mutations = show_mutations;
  std::cout << ceremony::render_msc(compiled, traces.traces[trace_index], opts);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Verifier for multi-agent procedure ceremonies"};
  app.require_subcommand(1);

  // Accepted as a parallelism hint; exploration is deterministic either way.
  if (const char* threads = std::getenv("CEREMONY_CHECK_THREADS"))
    (void)threads;

  CommonArgs verify_args, explore_args, render_args;
  bool all_violations = false, with_oracle = false, show_mutations = false;
  int trace_index = 0;
  render_args.budget = 0;  // default render target is the unmutated trace

  auto add_common = [](CLI::App* cmd, CommonArgs* args, bool with_format) {
    cmd->add_option("file", args->file, "ceremony file (.cer)")->required();
    cmd->add_option("--mutations", args->mutations,
                    "comma list of skip-action,skip-send,replace, or 'none'");
    cmd->add_option("--budget", args->budget,
                    "maximum number of primary mutations per trace");
    if (with_format)
      cmd->add_option("--format", args->format, "text, json or dot")
          ->check(CLI::IsMember({"text", "json", "dot"}));
  };

  CLI::App* verify = app.add_subcommand("verify", "check every property");
  add_common(verify, &verify_args, true);
  verify->add_flag("--all-violations", all_violations,
                   "collect every violating trace, not just the first");
  verify->add_flag("--oracle", with_oracle,
                   "cross-check the explorer against the brute-force oracle");

  CLI::App* explore = app.add_subcommand("explore", "list every executable trace");
  add_common(explore, &explore_args, true);

  CLI::App* render = app.add_subcommand("render", "draw one trace as a text MSC");
  add_common(render, &render_args, false);
  render->add_option("--trace", trace_index, "index of the trace to draw");
  render->add_flag("--show-mutations", show_mutations,
                   "mark skipped events in the chart");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitSpecError;
  }

  try {
    if (verify->parsed()) return run_verify(verify_args, all_violations, with_oracle);
    if (explore->parsed()) return run_explore(explore_args);
    if (render->parsed()) return run_render(render_args, trace_index, show_mutations);
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternalError;
  }
  return kExitSpecError;
}
