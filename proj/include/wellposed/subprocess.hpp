#pragma once

#include <string>
#include <vector>

namespace wellposed {

struct RunResult {
  bool spawn_failed = false;
  bool timed_out = false;
  int exit_code = -1;
  std::string out;
  std::string err;
  std::string error;  // populated for spawn failures / timeouts
};

// Runs argv with `input` piped to stdin, capturing stdout and stderr.
// Enforces a wall-clock limit; on expiry the process group is killed and
// timed_out is set. Never throws.
RunResult run_with_input(const std::vector<std::string>& argv, const std::string& input,
                         double timeout_s);

// Splits a command line on whitespace (no quoting rules; solver commands and
// interpreter paths do not need them).
std::vector<std::string> split_command(const std::string& command);

// Absolute path of the running executable's directory, or "" if unknown.
std::string executable_dir();

}  // namespace wellposed
