#pragma once

// Helpers for tests that drive the command-line binary as a subprocess.

#include <sys/wait.h>

#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

namespace cli_support {

struct CliResult {
  int exit_code = -1;
  std::string output;
};

inline CliResult run_cli(const std::string& cli, const std::string& args) {
  CliResult result;
  const std::string command = "'" + cli + "' " + args + " 2>&1";
  FILE* pipe = popen(command.c_str(), "r");
  if (pipe == nullptr) return result;
  char buffer[512];
  while (fgets(buffer, sizeof(buffer), pipe) != nullptr) {
    result.output += buffer;
  }
  const int status = pclose(pipe);
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

inline bool parse_shape(const std::string& output, std::vector<long>& dims) {
  const auto pos = output.find("shape=(");
  if (pos == std::string::npos) return false;
  std::istringstream in(output.substr(pos + 7));
  dims.clear();
  long value;
  while (in >> value) {
    dims.push_back(value);
    char c = 0;
    in >> c;
    if (c == ')') return true;
    if (c != ',') return false;
  }
  return false;
}

}  // namespace cli_support
