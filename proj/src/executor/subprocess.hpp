#pragma once

#include <chrono>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace chatvis::executor {

struct ProcessResult {
    std::optional<int> exit_code;    // set when the process exited normally
    std::optional<int> term_signal;  // set when it was killed by a signal
    bool timed_out = false;
    std::string out;
    std::string err;
    double wall_seconds = 0.0;
};

// PATH lookup in the calling process; names with a slash are taken relative to
// the current directory. Returns an absolute path, or nullopt when nothing matches.
std::optional<std::filesystem::path> resolve_executable(const std::string& name);

// Spawns argv in its own process group with cwd as working directory and
// stdin from /dev/null. Both pipes are drained concurrently; on timeout the
// whole group is killed and the partial output returned with timed_out set.
// Throws InterpreterNotFound when argv[0] cannot be executed.
ProcessResult run_process(const std::vector<std::string>& argv, const std::filesystem::path& cwd,
                          std::optional<std::chrono::duration<double>> timeout = std::nullopt);

}  // namespace chatvis::executor
