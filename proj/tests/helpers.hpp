#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "ceremony/ceremony.hpp"

namespace test {

inline std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

inline std::string corpus_path(const std::string& name) {
  return std::string(CORPUS_DIR) + "/" + name;
}

inline ceremony::CeremonySpec parse_file(const std::string& name) {
  auto result = ceremony::parse_ceremony(read_file(corpus_path(name)));
  if (!result.ok()) throw std::runtime_error("corpus parse failed: " + name);
  return *result.spec;
}

inline ceremony::CeremonySpec parse_text(const std::string& text) {
  auto result = ceremony::parse_ceremony(text);
  if (!result.ok()) {
    std::string msg = "parse failed:";
    for (const auto& d : result.diagnostics) msg += "\n  " + d.to_string();
    throw std::runtime_error(msg);
  }
  return *result.spec;
}

inline ceremony::CompiledCeremony compile_file(const std::string& name) {
  auto spec = parse_file(name);
  auto diags = ceremony::validate_spec(spec);
  if (ceremony::has_errors(diags))
    throw std::runtime_error("corpus validation failed: " + name);
  auto result = ceremony::compile_ceremony(spec);
  if (!result.ok()) throw std::runtime_error("corpus compile failed: " + name);
  return *result.compiled;
}

inline ceremony::CompiledCeremony compile_text(const std::string& text) {
  auto spec = parse_text(text);
  auto result = ceremony::compile_ceremony(spec);
  if (!result.ok()) {
    std::string msg = "compile failed:";
    for (const auto& d : result.diagnostics) msg += "\n  " + d.to_string();
    throw std::runtime_error(msg);
  }
  return *result.compiled;
}

struct CliResult {
  int exit_code = -1;
  std::string output;  // stdout only
};

inline CliResult run_cli(const std::string& args) {
  std::string command = std::string(CLI_BIN) + " " + args + " 2>/dev/null";
  FILE* pipe = popen(command.c_str(), "r");
  if (!pipe) throw std::runtime_error("popen failed");
  CliResult result;
  char buffer[4096];
  size_t n;
  while ((n = fread(buffer, 1, sizeof(buffer), pipe)) > 0)
    result.output.append(buffer, n);
  int status = pclose(pipe);
  result.exit_code = WEXITSTATUS(status);
  return result;
}

// Convenience builders for small synthetic specs used across tests.

inline const char* kPingPong =
    "ceremony pingpong\n"
    "agents: P, Q\n"
    "role P:\n"
    "  start\n"
    "  action ping(ball)\n"
    "  send Q ping_sent\n"
    "  recv Q pong_sent\n"
    "role Q:\n"
    "  start\n"
    "  recv P ping_sent\n"
    "  action pong(ball)\n"
    "  send P pong_sent\n"
    "property pong_after_ping: on Q.pong requires-before P.ping(ball)\n";

}  // namespace test
