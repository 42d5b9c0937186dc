#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "executor/traceback.hpp"
#include "generator/generator.hpp"

namespace chatvis::executor {

struct ExecConfig {
    std::vector<std::string> interpreter_cmd{"pvpython"};
    std::filesystem::path work_dir;
    double timeout_seconds = 300.0;
    std::optional<std::string> expected_artifact;
    std::string script_name = "script.py";

    // CHATVIS_INTERPRETER, when set, replaces interpreter_cmd (split like a shell word list).
    void apply_env();
};

struct ExecutionResult {
    std::optional<int> exit_status;  // empty when the run timed out or died from a signal
    bool timed_out = false;
    std::optional<int> term_signal;
    std::string stdout_text;
    std::string stderr_text;
    std::vector<TracebackRecord> tracebacks;
    std::vector<std::string> artifacts;  // relative to work_dir, sorted
    double wall_time = 0.0;
    std::string script_path;

    bool success() const noexcept { return exit_status == 0 && tracebacks.empty(); }
    bool has_artifact(const std::string& name) const;
    std::string combined_output() const;
};

inline constexpr const char* kNonzeroExitClass = "NonzeroExit";
inline constexpr int kTailLines = 20;

// Writes the script into work_dir, runs interpreter_cmd + [script], and
// reports output, tracebacks and the files the run created or modified.
// A failed run without a parsable traceback gets one synthesized record:
// NonzeroExit (last 20 output lines) or TimeoutError.
ExecutionResult run_script(const generator::GeneratedScript& script, const ExecConfig& config);

}  // namespace chatvis::executor
